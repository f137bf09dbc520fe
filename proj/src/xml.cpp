#include "ompmentor/xml.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>

namespace ompmentor::xml {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return is_name_start(c) || std::isdigit(u) || c == '-' || c == '.';
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string utf16_to_utf8(std::string_view bytes, bool big_endian) {
  if (bytes.size() % 2 != 0) throw Error("truncated UTF-16 input", 1, 1);
  std::string out;
  out.reserve(bytes.size() / 2);
  auto unit_at = [&](std::size_t i) -> std::uint32_t {
    auto b0 = static_cast<unsigned char>(bytes[i]);
    auto b1 = static_cast<unsigned char>(bytes[i + 1]);
    return big_endian ? (b0 << 8 | b1) : (b1 << 8 | b0);
  };
  for (std::size_t i = 0; i < bytes.size(); i += 2) {
    std::uint32_t unit = unit_at(i);
    if (unit >= 0xD800 && unit <= 0xDBFF) {
      if (i + 3 >= bytes.size()) throw Error("unpaired UTF-16 surrogate", 1, 1);
      std::uint32_t low = unit_at(i + 2);
      if (low < 0xDC00 || low > 0xDFFF) throw Error("unpaired UTF-16 surrogate", 1, 1);
      append_utf8(out, 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
      i += 2;
    } else if (unit >= 0xDC00 && unit <= 0xDFFF) {
      throw Error("unpaired UTF-16 surrogate", 1, 1);
    } else {
      append_utf8(out, unit);
    }
  }
  return out;
}

void check_utf8(std::string_view s) {
  int line = 1;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c == '\n') ++line;
    int extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      extra = 3;
    } else {
      throw Error("invalid UTF-8 byte sequence", line, 1);
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size() || (static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        throw Error("invalid UTF-8 byte sequence", line, 1);
      }
    }
    i += static_cast<std::size_t>(extra) + 1;
  }
}

// Reads encoding="..." out of a leading XML declaration, if any.
std::optional<std::string> declared_encoding(std::string_view s) {
  if (s.substr(0, 5) != "<?xml") return std::nullopt;
  auto end = s.find("?>");
  if (end == std::string_view::npos) return std::nullopt;
  auto decl = s.substr(0, end);
  auto pos = decl.find("encoding");
  if (pos == std::string_view::npos) return std::nullopt;
  pos = decl.find_first_of("\"'", pos);
  if (pos == std::string_view::npos) return std::nullopt;
  char quote = decl[pos];
  auto close = decl.find(quote, pos + 1);
  if (close == std::string_view::npos) return std::nullopt;
  return lower_ascii(decl.substr(pos + 1, close - pos - 1));
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Element parse_document() {
    skip_misc(true);
    if (eof() || peek() != '<') fail("expected root element");
    Element root = parse_element();
    skip_misc(false);
    if (!eof()) fail("content after root element");
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;

  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  bool starts_with(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && pos_ < s_.size(); ++k) {
      if (s_[pos_] == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(message, line_, static_cast<int>(pos_ - line_start_) + 1);
  }

  void expect(std::string_view lit) {
    if (!starts_with(lit)) fail("expected '" + std::string(lit) + "'");
    advance(lit.size());
  }

  void skip_space() {
    while (!eof() && is_space(peek())) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    auto end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
    advance(end + terminator.size() - pos_);
  }

  void skip_misc(bool allow_doctype) {
    for (;;) {
      skip_space();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (allow_doctype && starts_with("<!DOCTYPE")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  void skip_doctype() {
    int bracket = 0;
    while (!eof()) {
      char c = peek();
      if (c == '[') ++bracket;
      if (c == ']') --bracket;
      advance();
      if (c == '>' && bracket <= 0) return;
    }
    fail("unterminated doctype");
  }

  std::string parse_name() {
    if (eof() || !is_name_start(peek())) fail("expected a name");
    std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) advance();
    return std::string(s_.substr(start, pos_ - start));
  }

  void decode_reference(std::string& out) {
    // at '&'
    auto end = s_.find(';', pos_);
    if (end == std::string_view::npos || end - pos_ > 12) fail("malformed entity reference");
    auto ref = s_.substr(pos_ + 1, end - pos_ - 1);
    if (ref == "lt") {
      out += '<';
    } else if (ref == "gt") {
      out += '>';
    } else if (ref == "amp") {
      out += '&';
    } else if (ref == "quot") {
      out += '"';
    } else if (ref == "apos") {
      out += '\'';
    } else if (!ref.empty() && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
      auto digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) fail("malformed character reference");
      for (char d : digits) {
        int v;
        if (d >= '0' && d <= '9') {
          v = d - '0';
        } else if (hex && d >= 'a' && d <= 'f') {
          v = d - 'a' + 10;
        } else if (hex && d >= 'A' && d <= 'F') {
          v = d - 'A' + 10;
        } else {
          fail("malformed character reference");
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) fail("character reference out of range");
      }
      if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid character reference");
      append_utf8(out, cp);
    } else {
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
    advance(end + 1 - pos_);
  }

  std::string parse_attribute_value() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    advance();
    std::string value;
    while (!eof() && peek() != quote) {
      if (peek() == '<') fail("'<' in attribute value");
      if (peek() == '&') {
        decode_reference(value);
      } else {
        value += peek();
        advance();
      }
    }
    if (eof()) fail("unterminated attribute value");
    advance();
    return value;
  }

  Element parse_element() {
    Element el;
    el.line.value = line_;
    expect("<");
    el.name = parse_name();
    for (;;) {
      bool had_space = !eof() && is_space(peek());
      skip_space();
      if (starts_with("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) fail("expected whitespace before attribute");
      Attribute attr;
      attr.name = parse_name();
      skip_space();
      if (peek() == '=') {
        advance();
        skip_space();
      } else if (peek() != '"' && peek() != '\'') {
        fail("expected '=' after attribute name");
      }
      attr.value = parse_attribute_value();
      if (el.attribute(attr.name) != nullptr) fail("duplicate attribute '" + attr.name + "'");
      el.attributes.push_back(std::move(attr));
    }
    parse_content(el);
    return el;
  }

  void parse_content(Element& el) {
    std::string text;
    for (;;) {
      if (eof()) fail("unterminated element <" + el.name + ">");
      if (starts_with("</")) {
        advance(2);
        std::string closing = parse_name();
        if (closing != el.name) {
          fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
        }
        skip_space();
        expect(">");
        break;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        advance(9);
        auto end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        text.append(s_.substr(pos_, end - pos_));
        advance(end + 3 - pos_);
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(parse_element());
      } else if (peek() == '&') {
        decode_reference(text);
      } else {
        text += peek();
        advance();
      }
    }
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
      el.text.clear();
    } else {
      auto last = text.find_last_not_of(" \t\r\n");
      el.text = text.substr(first, last - first + 1);
    }
  }
};

}  // namespace

const std::string* Element::attribute(std::string_view attr_name) const {
  for (const auto& a : attributes) {
    if (a.name == attr_name) return &a.value;
  }
  return nullptr;
}

Error::Error(const std::string& message, int line, int column)
    : std::runtime_error(message), line_(line), column_(column) {}

std::string decode_to_utf8(std::string_view bytes) {
  auto starts = [&](std::initializer_list<unsigned char> prefix) {
    if (bytes.size() < prefix.size()) return false;
    std::size_t i = 0;
    for (auto b : prefix) {
      if (static_cast<unsigned char>(bytes[i++]) != b) return false;
    }
    return true;
  };
  if (starts({0xEF, 0xBB, 0xBF})) bytes.remove_prefix(3);
  if (starts({0xFF, 0xFE})) return utf16_to_utf8(bytes.substr(2), false);
  if (starts({0xFE, 0xFF})) return utf16_to_utf8(bytes.substr(2), true);
  if (starts({'<', 0x00, '?', 0x00})) return utf16_to_utf8(bytes, false);
  if (starts({0x00, '<', 0x00, '?'})) return utf16_to_utf8(bytes, true);

  auto encoding = declared_encoding(bytes).value_or("utf-8");
  if (encoding == "utf-8" || encoding == "utf8") {
    check_utf8(bytes);
    return std::string(bytes);
  }
  if (encoding == "us-ascii" || encoding == "ascii") {
    for (char c : bytes) {
      if (static_cast<unsigned char>(c) >= 0x80) throw Error("non-ASCII byte in US-ASCII document", 1, 1);
    }
    return std::string(bytes);
  }
  if (encoding == "iso-8859-1" || encoding == "latin1" || encoding == "latin-1") {
    std::string out;
    out.reserve(bytes.size());
    for (char c : bytes) append_utf8(out, static_cast<unsigned char>(c));
    return out;
  }
  if (encoding == "utf-16" || encoding == "utf-16le" || encoding == "utf-16be") {
    throw Error("UTF-16 declared but input is not UTF-16 encoded", 1, 1);
  }
  throw Error("unsupported encoding '" + encoding + "'", 1, 1);
}

Element parse(std::string_view bytes) {
  std::string text = decode_to_utf8(bytes);
  Parser parser(text);
  return parser.parse_document();
}

std::string escape(std::string_view text, bool in_attribute) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"':
        if (in_attribute) {
          out += "&quot;";
        } else {
          out += c;
        }
        break;
      default: out += c;
    }
  }
  return out;
}

void write_element(std::string& out, const Element& element, int depth) {
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out += indent;
  out += '<';
  out += element.name;
  for (const auto& a : element.attributes) {
    out += ' ';
    out += a.name;
    out += "=\"";
    out += escape(a.value, true);
    out += '"';
  }
  if (element.children.empty() && element.text.empty()) {
    out += "/>\n";
    return;
  }
  out += '>';
  if (element.children.empty()) {
    out += escape(element.text, false);
  } else {
    out += '\n';
    if (!element.text.empty()) {
      out += indent + "  " + escape(element.text, false) + '\n';
    }
    for (const auto& child : element.children) write_element(out, child, depth + 1);
    out += indent;
  }
  out += "</" + element.name + ">\n";
}

std::string write_document(const Element& root) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write_element(out, root, 0);
  return out;
}

}  // namespace ompmentor::xml
