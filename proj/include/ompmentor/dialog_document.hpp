#pragma once

// Dialog documents: the XML format that defines a rule-based Q&A agent.
//
//   <dialog>
//     <settings><setting name="LANGUAGE" type="USER">EN</setting></settings>
//     <flow>
//       <folder label="Main">     welcome node(s)
//       <folder label="Library">  question/answer nodes
//       <folder label="Concepts"> synonym groups (optional)
//       <folder label="Global">   preserved verbatim, otherwise ignored (optional)
//     </flow>
//     <default><output>...</output></default>
//   </dialog>
//
// See docs/dialog-format.md for the full element reference.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ompmentor/xml.hpp"

namespace ompmentor::dialog {

enum class FolderLabel { Main, Library, Global, Concepts };
std::string_view to_string(FolderLabel label);
std::optional<FolderLabel> folder_label_from_string(std::string_view text);

enum class SelectionType { Random };

struct Setting {
  std::string name;
  std::string scope;
  std::string value;
  SourceLine line;
  bool operator==(const Setting&) const = default;
};

struct Output {
  SelectionType selection_type = SelectionType::Random;
  std::vector<std::string> items;
  SourceLine line;
  bool operator==(const Output&) const = default;
};

struct InputNode {
  /// Declared `id` attribute, or `<folder>/<index>` (nested: `<parent>/<index>`).
  std::string id;
  bool declared_id = false;
  /// Raw grammar items in file order; the first is the primary variation.
  std::vector<std::string> grammar;
  Output output;
  std::vector<InputNode> children;
  SourceLine line;
  bool operator==(const InputNode&) const = default;
};

struct ConceptGroup {
  std::string canonical;
  std::vector<std::string> synonyms;
  SourceLine line;
  bool operator==(const ConceptGroup&) const = default;
};

struct Folder {
  FolderLabel label = FolderLabel::Library;
  std::vector<InputNode> nodes;            // Main, Library
  std::vector<ConceptGroup> concepts;      // Concepts
  std::vector<xml::Element> opaque_content;  // Global
  SourceLine line;
  bool operator==(const Folder&) const = default;
};

struct DefaultNode {
  Output output;
  SourceLine line;
  bool operator==(const DefaultNode&) const = default;
};

enum class Severity { Error, Warning };
std::string_view to_string(Severity severity);

struct ValidationIssue {
  Severity severity = Severity::Error;
  std::string path;
  int line = 0;
  std::string message;
  bool operator==(const ValidationIssue&) const = default;
};

struct DialogDocument {
  std::vector<xml::Attribute> root_attributes;
  std::vector<Setting> settings;
  std::vector<Folder> folders;
  std::optional<DefaultNode> default_node;
  /// Warnings raised while reading (unknown elements and the like). Not part
  /// of structural equality.
  std::vector<ValidationIssue> parse_warnings;

  const Folder* folder(FolderLabel label) const;
  Folder* folder(FolderLabel label);
  std::optional<std::string> setting(std::string_view name) const;
  /// LANGUAGE setting, or empty when absent.
  std::string language() const;
  /// AUTOLEARN setting; false when absent or unparseable.
  bool autolearn() const;

  friend bool operator==(const DialogDocument& a, const DialogDocument& b) {
    return a.root_attributes == b.root_attributes && a.settings == b.settings &&
           a.folders == b.folders && a.default_node == b.default_node;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::string path, int line);
  const std::string& path() const noexcept { return path_; }
  int line() const noexcept { return line_; }

 private:
  std::string path_;
  int line_;
};

/// Reads a dialog document. Throws ParseError on malformed XML, a missing
/// `flow`, a missing Main or Library folder, or an input without grammar items.
DialogDocument parse_document(std::string_view xml_text);
DialogDocument load_document(const std::string& path);

/// Canonical XML for `doc`. Attribute order and whitespace are normalized.
std::string serialize_document(const DialogDocument& doc);

/// Structural checks. Sorted by line, then path. A document is accepted by
/// the match engine exactly when no issue has Severity::Error.
std::vector<ValidationIssue> validate_document(const DialogDocument& doc);
bool has_errors(const std::vector<ValidationIssue>& issues);

/// Depth-first id lookup over Main and Library; nullptr when absent.
const InputNode* lookup_node(const DialogDocument& doc, std::string_view node_id);

/// Visits every input node depth-first in document order.
void for_each_node(const DialogDocument& doc,
                   const std::function<void(const Folder&, const InputNode&)>& visit);

/// Parses an AUTOLEARN-style boolean, case-insensitively.
std::optional<bool> parse_bool(std::string_view text);

}  // namespace ompmentor::dialog
