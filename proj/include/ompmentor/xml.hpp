#pragma once

// Minimal XML element tree used by the dialog-document reader and writer.
//
// Only what dialog documents need is modelled: elements, attributes and
// character data. Comments, processing instructions and the doctype are
// skipped. Character data of an element is the concatenation of its direct
// text and CDATA children, trimmed at both ends.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ompmentor {

/// Source line of a parsed construct. Two SourceLine values always compare
/// equal, so defaulted structural equality ignores where a node came from.
struct SourceLine {
  int value = 0;
  friend constexpr bool operator==(SourceLine, SourceLine) noexcept { return true; }
};

namespace xml {

struct Attribute {
  std::string name;
  std::string value;
  bool operator==(const Attribute&) const = default;
};

struct Element {
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::string text;
  SourceLine line;

  const std::string* attribute(std::string_view attr_name) const;
  bool operator==(const Element&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(const std::string& message, int line, int column);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Converts the raw bytes of a document to UTF-8. Honors a byte-order mark
/// or the encoding named in the XML declaration (UTF-8, UTF-16, ISO-8859-1,
/// US-ASCII). Throws Error for unsupported encodings or invalid sequences.
std::string decode_to_utf8(std::string_view bytes);

/// Parses a complete document and returns its root element.
///
/// One deliberate leniency: an attribute written without `=` directly before
/// its quoted value (`type"USER"`) is accepted as if the `=` were present.
Element parse(std::string_view bytes);

/// Writes `root` with a UTF-8 XML declaration and two-space indentation.
std::string write_document(const Element& root);
void write_element(std::string& out, const Element& element, int depth);

std::string escape(std::string_view text, bool in_attribute);

}  // namespace xml
}  // namespace ompmentor
