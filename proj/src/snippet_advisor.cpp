#include "ompmentor/snippet_advisor.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "ompmentor/knowledge_base.hpp"
#include "ompmentor/text.hpp"

namespace ompmentor::advisor {

namespace {

enum class Kind { Ident, Number, Punct, Pragma };

struct Token {
  Kind kind;
  std::string text;
  int line;
  int pragma = -1;  // index into the pragma table for Kind::Pragma
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

constexpr std::array<std::string_view, 22> kMultiPunct = {
    "<<=", ">>=", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",  "->",  "::", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||"};

// Lexes one logical line (no preprocessor handling).
void lex_into(std::string_view s, int line, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      out.push_back({Kind::Ident, std::string(s.substr(i, j - i)), line});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (is_ident_char(s[j]) || s[j] == '.' || s[j] == '\'')) ++j;
      out.push_back({Kind::Number, std::string(s.substr(i, j - i)), line});
      i = j;
    } else {
      std::size_t len = 1;
      for (auto p : kMultiPunct) {
        if (s.substr(i, p.size()) == p) {
          len = p.size();
          break;
        }
      }
      out.push_back({Kind::Punct, std::string(s.substr(i, len)), line});
      i += len;
    }
  }
}

bool has_word(const std::vector<std::string>& tokens, std::string_view word, std::size_t from = 0) {
  int depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "(") ++depth;
    else if (tokens[i] == ")") --depth;
    else if (i >= from && depth == 0 && tokens[i] == word) return true;
  }
  return false;
}

bool is_omp(const PragmaLine& p) { return !p.tokens.empty() && p.tokens[0] == "omp"; }

std::string_view directive(const PragmaLine& p) {
  return is_omp(p) && p.tokens.size() > 1 ? std::string_view(p.tokens[1]) : std::string_view();
}

bool is_standalone(const PragmaLine& p) {
  static const std::set<std::string_view> standalone = {
      "barrier", "flush", "taskwait", "taskyield", "threadprivate", "declare",
      "cancel",  "cancellation", "depobj", "scan", "requires"};
  if (!is_omp(p)) return true;
  if (directive(p) == "ordered" && has_word(p.tokens, "depend")) return true;
  return standalone.count(directive(p)) > 0;
}

bool opens_parallel(const PragmaLine& p) { return is_omp(p) && !is_standalone(p) && has_word(p.tokens, "parallel"); }

// `for` as the worksharing directive (omp for, omp parallel for), not a clause.
bool is_for_pragma(const PragmaLine& p) {
  if (!is_omp(p)) return false;
  auto d = directive(p);
  if (d == "for") return true;
  return d == "parallel" && p.tokens.size() > 2 && p.tokens[2] == "for";
}

bool is_assignment_op(std::string_view op) {
  static const std::set<std::string_view> ops = {"++", "--", "+=", "-=", "*=", "/=", "&=", "^="};
  return ops.count(op) > 0;
}

bool is_keyword(std::string_view word) {
  static const std::set<std::string_view> kw = {"for", "while", "if", "else", "do", "switch", "return",
                                                "case", "break", "continue", "goto", "default"};
  return kw.count(word) > 0;
}

struct Snippet {
  std::vector<Token> tokens;
  std::vector<PragmaLine> pragmas;
  std::vector<std::size_t> pragma_token;  // token index of each pragma
  std::vector<std::string> source_lines;
  std::vector<int> parallel_depth;  // per token

  explicit Snippet(std::string_view code);

  std::size_t matching(std::size_t open) const;
  std::size_t stmt_end(std::size_t i) const;
  /// Token range of the structured block a pragma applies to.
  std::pair<std::size_t, std::size_t> region(std::size_t pragma_index) const {
    auto begin = pragma_token[pragma_index] + 1;
    return {begin, std::max(begin, stmt_end(begin))};
  }
  bool is(std::size_t i, std::string_view text) const { return i < tokens.size() && tokens[i].text == text; }
  const PragmaLine* pragma_at(std::size_t i) const {
    return i < tokens.size() && tokens[i].kind == Kind::Pragma ? &pragmas[tokens[i].pragma] : nullptr;
  }
  std::string excerpt(int line) const {
    if (line < 1 || line > static_cast<int>(source_lines.size())) return {};
    return std::string(text::trim(source_lines[line - 1]));
  }
};

Snippet::Snippet(std::string_view code) {
  for (auto& l : text::split_lines(code)) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    source_lines.push_back(std::move(l));
  }
  const std::string stripped = strip_comments_and_strings(code);

  int line = 1;
  std::size_t i = 0;
  while (i < stripped.size()) {
    // Find the logical line: physical lines joined on trailing backslash.
    int first_line = line;
    std::string logical;
    for (;;) {
      auto nl = stripped.find('\n', i);
      std::size_t end = nl == std::string::npos ? stripped.size() : nl;
      std::string_view phys(stripped.data() + i, end - i);
      if (!phys.empty() && phys.back() == '\r') phys.remove_suffix(1);
      i = nl == std::string::npos ? stripped.size() : nl + 1;
      if (nl != std::string::npos) ++line;
      if (!phys.empty() && phys.back() == '\\') {
        logical.append(phys.substr(0, phys.size() - 1)).push_back(' ');
        if (i < stripped.size()) continue;
      } else {
        logical.append(phys);
      }
      break;
    }
    auto trimmed = text::trim(logical);
    if (!trimmed.empty() && trimmed.front() == '#') {
      auto rest = text::trim(trimmed.substr(1));
      if (rest.substr(0, 6) == "pragma" && (rest.size() == 6 || !is_ident_char(rest[6]))) {
        PragmaLine p;
        p.line_number = first_line;
        p.raw = excerpt(first_line);
        std::vector<Token> ptoks;
        lex_into(rest.substr(6), first_line, ptoks);
        for (auto& t : ptoks) p.tokens.push_back(std::move(t.text));
        tokens.push_back({Kind::Pragma, "#pragma", first_line, static_cast<int>(pragmas.size())});
        pragma_token.push_back(tokens.size() - 1);
        pragmas.push_back(std::move(p));
      }
      // other preprocessor lines are ignored
      continue;
    }
    lex_into(logical, first_line, tokens);
  }

  int depth = 0;
  std::vector<int> brace_depth(tokens.size(), 0);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    brace_depth[k] = depth;
    if (tokens[k].text == "{" && tokens[k].kind == Kind::Punct) ++depth;
    if (tokens[k].text == "}" && tokens[k].kind == Kind::Punct) depth = std::max(0, depth - 1);
  }
  parallel_depth.assign(tokens.size(), 0);
  for (std::size_t p = 0; p < pragmas.size(); ++p) {
    pragmas[p].brace_depth_at_line = brace_depth[pragma_token[p]];
    if (!opens_parallel(pragmas[p])) continue;
    auto [b, e] = region(p);
    for (auto k = b; k < e; ++k) ++parallel_depth[k];
  }
  for (std::size_t p = 0; p < pragmas.size(); ++p) {
    pragmas[p].enclosing_parallel_depth = parallel_depth[pragma_token[p]];
  }
}

std::size_t Snippet::matching(std::size_t open) const {
  const auto& o = tokens[open].text;
  const std::string close = o == "(" ? ")" : o == "[" ? "]" : "}";
  int depth = 0;
  for (auto k = open; k < tokens.size(); ++k) {
    if (tokens[k].kind != Kind::Punct) continue;
    if (tokens[k].text == o) ++depth;
    else if (tokens[k].text == close && --depth == 0) return k;
  }
  return tokens.size();
}

std::size_t Snippet::stmt_end(std::size_t i) const {
  const auto n = tokens.size();
  if (i >= n) return n;
  const auto& t = tokens[i];
  if (t.kind == Kind::Pragma) {
    return is_standalone(pragmas[t.pragma]) ? i + 1 : stmt_end(i + 1);
  }
  if (t.kind == Kind::Punct) {
    if (t.text == "{") return std::min(n, matching(i) + 1);
    if (t.text == "}") return i;
    if (t.text == ";") return i + 1;
  }
  if (t.kind == Kind::Ident) {
    auto after_parens = [&](std::size_t j) { return is(j, "(") ? std::min(n, matching(j) + 1) : j; };
    if (t.text == "for" || t.text == "while" || t.text == "switch") return stmt_end(after_parens(i + 1));
    if (t.text == "if") {
      auto k = stmt_end(after_parens(i + 1));
      return is(k, "else") ? stmt_end(k + 1) : k;
    }
    if (t.text == "do") {
      auto k = stmt_end(i + 1);
      if (!is(k, "while")) return k;
      k = after_parens(k + 1);
      return is(k, ";") ? k + 1 : k;
    }
  }
  int depth = 0;
  for (auto j = i; j < n; ++j) {
    const auto& tj = tokens[j];
    if (tj.kind == Kind::Pragma) {
      if (depth == 0) return j;
      continue;
    }
    if (tj.kind != Kind::Punct) continue;
    if (tj.text == "(" || tj.text == "[") {
      ++depth;
    } else if (tj.text == ")" || tj.text == "]") {
      --depth;
    } else if (tj.text == "{") {
      if (depth == 0 && j > i && is(j - 1, ")")) {
        // function or lambda body
        auto k = std::min(n, matching(j) + 1);
        return is(k, ";") ? k + 1 : k;
      }
      ++depth;
    } else if (tj.text == "}") {
      if (depth == 0) return j;
      --depth;
    } else if (tj.text == ";" && depth == 0) {
      return j + 1;
    }
  }
  return n;
}

std::optional<kb::Category> entry_category(std::string_view entry_id) {
  static const auto entries = kb::list_entries();
  if (const auto* e = kb::find_entry(entries, entry_id)) return e->category;
  return std::nullopt;
}

// Argument text of `name(...)` calls, e.g. "&lock" -> "lock".
std::string call_argument(const Snippet& s, std::size_t name_index) {
  if (!s.is(name_index + 1, "(")) return {};
  auto close = s.matching(name_index + 1);
  std::string arg;
  for (auto k = name_index + 2; k < close && k < s.tokens.size(); ++k) {
    if (arg.empty() && s.tokens[k].text == "&") continue;
    arg += s.tokens[k].text;
  }
  return arg;
}

class Collector {
 public:
  explicit Collector(const Snippet& s) : snippet_(s) {
    for (const auto& r : list_rules()) rules_.emplace(r.rule_id, &r);
  }
  void add(std::string_view rule_id, int line) {
    const auto* rule = rules_.at(std::string(rule_id));
    findings_.push_back(
        {rule->rule_id, rule->entry_id, line, snippet_.excerpt(line), rule->severity, rule->description});
  }
  std::vector<Finding> take() {
    std::stable_sort(findings_.begin(), findings_.end(), [](const Finding& a, const Finding& b) {
      return std::tie(a.line, a.rule_id) < std::tie(b.line, b.rule_id);
    });
    return std::move(findings_);
  }

 private:
  const Snippet& snippet_;
  std::map<std::string, const RuleInfo*> rules_;
  std::vector<Finding> findings_;
};

void check_critical_body(const Snippet& s, std::size_t p, Collector& out) {
  auto [b, e] = s.region(p);
  if (s.is(b, "{") && s.matching(b) + 1 == e) {
    ++b;
    --e;
  }
  if (e <= b || e - b < 3) return;
  const auto& toks = s.tokens;
  // Prefix form: ++x; or --x;
  if (e - b == 3 && (toks[b].text == "++" || toks[b].text == "--") && toks[b + 1].kind == Kind::Ident &&
      !is_keyword(toks[b + 1].text) && toks[b + 2].text == ";") {
    out.add("R-critical-vs-atomic", s.pragmas[p].line_number);
    return;
  }
  if (toks[b].kind != Kind::Ident || is_keyword(toks[b].text)) return;
  const auto& op = toks[b + 1].text;
  if (toks[b + 1].kind != Kind::Punct || !is_assignment_op(op)) return;
  if (op == "++" || op == "--") {
    if (e - b != 3 || toks[b + 2].text != ";") return;
  } else {
    if (e - b < 4 || toks[e - 1].text != ";") return;
    for (auto k = b + 2; k + 1 < e; ++k) {
      const auto& t = toks[k];
      if (t.kind == Kind::Pragma || t.text == ";" || t.text == "{" || t.text == "}") return;
    }
  }
  out.add("R-critical-vs-atomic", s.pragmas[p].line_number);
}

}  // namespace

std::string_view to_string(Severity severity) { return severity == Severity::Hint ? "Hint" : "Problem"; }

std::string strip_comments_and_strings(std::string_view code) {
  std::string out(code);
  enum class State { Code, LineComment, BlockComment, String, Char } state = State::Code;
  for (std::size_t i = 0; i < out.size(); ++i) {
    char c = out[i];
    char next = i + 1 < out.size() ? out[i + 1] : '\0';
    switch (state) {
      case State::Code:
        if (c == '/' && next == '/') {
          state = State::LineComment;
          out[i] = out[i + 1] = ' ';
          ++i;
        } else if (c == '/' && next == '*') {
          state = State::BlockComment;
          out[i] = out[i + 1] = ' ';
          ++i;
        } else if (c == '"') {
          state = State::String;
        } else if (c == '\'' && !(i > 0 && std::isdigit(static_cast<unsigned char>(out[i - 1])))) {
          state = State::Char;
        }
        break;
      case State::LineComment:
        if (c == '\n') state = State::Code;
        else out[i] = ' ';
        break;
      case State::BlockComment:
        if (c == '*' && next == '/') {
          out[i] = out[i + 1] = ' ';
          ++i;
          state = State::Code;
        } else if (c != '\n') {
          out[i] = ' ';
        }
        break;
      case State::String:
      case State::Char: {
        const char quote = state == State::String ? '"' : '\'';
        if (c == '\\' && next != '\0' && next != '\n') {
          out[i] = out[i + 1] = ' ';
          ++i;
        } else if (c == quote || c == '\n') {
          state = State::Code;  // an unterminated literal ends at the line break
        } else {
          out[i] = ' ';
        }
        break;
      }
    }
  }
  return out;
}

std::vector<PragmaLine> pragma_lines(std::string_view code) { return Snippet(code).pragmas; }

const std::vector<RuleInfo>& list_rules() {
  static const std::vector<RuleInfo> rules = [] {
    std::vector<RuleInfo> r = {
        {"R-missing-omp", "missing-omp", {}, "pragma names an OpenMP directive but lacks the omp keyword"},
        {"R-missing-parallel", "missing-parallel", {}, "omp for outside any parallel region runs on one thread"},
        {"R-missing-for", "missing-for", {}, "loop in a parallel region without omp for: every thread runs all of it"},
        {"R-nested-parallel", "unnecessary-parallelization", {}, "parallel directive inside a parallel region"},
        {"R-set-threads-in-parallel", "redefine-num-threads", {}, "omp_set_num_threads called inside a parallel region"},
        {"R-critical-vs-atomic", "critical-vs-atomic", {}, "critical region around a single update that atomic can do"},
        {"R-flush-no-list", "unnecessary-flush", {}, "flush without a variable list"},
        {"R-lock-no-init", "lock-without-init", {}, "lock is set but never initialized with omp_init_lock"},
        {"R-ordered-mismatch", "incorrect-ordered", {}, "ordered clause and ordered region do not match"},
    };
    for (auto& rule : r) {
      auto cat = entry_category(rule.entry_id);
      rule.severity = cat == kb::Category::Performance ? Severity::Hint : Severity::Problem;
    }
    return r;
  }();
  return rules;
}

std::vector<Finding> scan_snippet(std::string_view code) {
  const Snippet s(code);
  Collector out(s);

  static const std::set<std::string_view> omp_words = {"parallel", "for",     "sections", "critical", "atomic",
                                                       "flush",    "ordered", "barrier",  "single"};

  for (std::size_t p = 0; p < s.pragmas.size(); ++p) {
    const auto& pr = s.pragmas[p];
    const int line = pr.line_number;
    if (!pr.tokens.empty() && omp_words.count(pr.tokens[0]) && !has_word(pr.tokens, "omp")) {
      out.add("R-missing-omp", line);
    }
    if (!is_omp(pr)) continue;
    const auto d = directive(pr);

    if (d == "for" && pr.enclosing_parallel_depth == 0) out.add("R-missing-parallel", line);
    if (opens_parallel(pr) && pr.enclosing_parallel_depth >= 1) out.add("R-nested-parallel", line);
    if (d == "flush" && std::find(pr.tokens.begin(), pr.tokens.end(), "(") == pr.tokens.end()) out.add("R-flush-no-list", line);
    if (d == "critical") check_critical_body(s, p, out);

    if (d == "parallel" && !has_word(pr.tokens, "for") && !has_word(pr.tokens, "sections") &&
        !has_word(pr.tokens, "loop")) {
      auto [b, e] = s.region(p);
      auto k = b;
      while (k < e && s.is(k, "{")) ++k;
      bool loop_next = k < e && s.tokens[k].kind == Kind::Ident && s.tokens[k].text == "for";
      bool has_worksharing = false;
      for (auto j = b; j < e; ++j) {
        if (const auto* inner = s.pragma_at(j); inner && is_for_pragma(*inner)) has_worksharing = true;
      }
      if (loop_next && !has_worksharing) out.add("R-missing-for", line);
    }

    if (is_for_pragma(pr) && has_word(pr.tokens, "ordered", 2)) {
      auto [b, e] = s.region(p);
      bool has_block = false;
      for (auto j = b; j < e; ++j) {
        if (const auto* inner = s.pragma_at(j); inner && directive(*inner) == "ordered") has_block = true;
      }
      if (!has_block) out.add("R-ordered-mismatch", line);
    }
    if (d == "ordered" && !is_standalone(pr)) {
      // innermost lexically enclosing loop directive
      const PragmaLine* owner = nullptr;
      std::size_t owner_start = 0;
      for (std::size_t q = 0; q < s.pragmas.size(); ++q) {
        if (q == p || !is_for_pragma(s.pragmas[q])) continue;
        auto [b, e] = s.region(q);
        auto at = s.pragma_token[p];
        if (at >= b && at < e && (owner == nullptr || b > owner_start)) {
          owner = &s.pragmas[q];
          owner_start = b;
        }
      }
      if (owner == nullptr || !has_word(owner->tokens, "ordered", 2)) out.add("R-ordered-mismatch", line);
    }
  }

  std::set<std::string> initialized;
  for (std::size_t k = 0; k < s.tokens.size(); ++k) {
    const auto& t = s.tokens[k];
    if (t.kind != Kind::Ident) continue;
    if (t.text == "omp_init_lock" || t.text == "omp_init_nest_lock" || t.text == "omp_init_lock_with_hint" ||
        t.text == "omp_init_nest_lock_with_hint") {
      auto arg = call_argument(s, k);
      if (auto comma = arg.find(','); comma != std::string::npos) arg.resize(comma);
      initialized.insert(arg);
    }
  }
  std::set<std::string> reported;
  for (std::size_t k = 0; k < s.tokens.size(); ++k) {
    const auto& t = s.tokens[k];
    if (t.kind != Kind::Ident || !s.is(k + 1, "(")) continue;
    if (t.text == "omp_set_num_threads" && s.parallel_depth[k] >= 1) {
      out.add("R-set-threads-in-parallel", t.line);
    }
    if (t.text == "omp_set_lock" || t.text == "omp_set_nest_lock") {
      auto arg = call_argument(s, k);
      if (!arg.empty() && !initialized.count(arg) && reported.insert(arg).second) {
        out.add("R-lock-no-init", t.line);
      }
    }
  }
  return out.take();
}

}  // namespace ompmentor::advisor
