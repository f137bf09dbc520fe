#pragma once

// Heuristic scanner that points pasted C/C++ snippets at catalog entries.
//
// The scanner works on tokens and brace nesting only; it never builds a
// syntax tree, so incomplete snippets are fine. Comments and the contents of
// string and character literals are blanked out first.

#include <string>
#include <string_view>
#include <vector>

namespace ompmentor::advisor {

enum class Severity { Problem, Hint };
std::string_view to_string(Severity severity);

struct PragmaLine {
  int line_number = 0;
  std::string raw;
  /// Tokens after `#pragma`, e.g. {"omp", "parallel", "for", "num_threads", "(", "4", ")"}.
  std::vector<std::string> tokens;
  int brace_depth_at_line = 0;
  /// Number of lexically enclosing regions opened by a pragma containing `parallel`.
  int enclosing_parallel_depth = 0;
};

struct Finding {
  std::string rule_id;
  std::string entry_id;
  int line = 0;
  std::string excerpt;
  Severity severity = Severity::Problem;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct RuleInfo {
  std::string rule_id;
  std::string entry_id;
  Severity severity = Severity::Problem;
  std::string description;
};

/// Same length and line structure as `code`, with comments and literal
/// contents replaced by spaces.
std::string strip_comments_and_strings(std::string_view code);

std::vector<PragmaLine> pragma_lines(std::string_view code);

/// Findings sorted by line, then rule id.
std::vector<Finding> scan_snippet(std::string_view code);

/// Rule registry. Severity follows the linked entry's category: Performance
/// entries give Hint, Logical entries give Problem.
const std::vector<RuleInfo>& list_rules();

}  // namespace ompmentor::advisor
