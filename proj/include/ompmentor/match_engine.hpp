#pragma once

// Grammar matching for dialog documents.
//
// A grammar item compiles to one of three pattern kinds:
//
//   Literal       "Can I change a variable inside a pragma omp loop?"
//                 matches exactly that token sequence.
//   VerbAnchored  "$ Change a variable inside a loop?"
//                 matches any input that ends with the token run; the lead-in
//                 absorbed by `$` may be empty.
//   Slotted       "change * variable * loop"
//                 matches when the runs occur in order; each interior `*`
//                 absorbs at least one token, the ends absorb zero or more.
//
// Text is normalized before matching: lowercased, punctuation split off,
// whitespace collapsed, Concepts-folder synonyms replaced by their canonical
// token.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ompmentor/dialog_document.hpp"

namespace ompmentor::match {

/// synonym token -> canonical token
using SynonymMap = std::map<std::string, std::string, std::less<>>;

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source;
};

TokenSequence normalize(std::string_view text, const SynonymMap& concepts = {});

enum class PatternKind { Literal, VerbAnchored, Slotted };
std::string_view to_string(PatternKind kind);

/// A run of literal tokens, or a gap (`is_gap`, no tokens).
struct Segment {
  bool is_gap = false;
  std::vector<std::string> tokens;
  bool operator==(const Segment&) const = default;
};

struct Pattern {
  PatternKind kind = PatternKind::Literal;
  std::vector<Segment> segments;
  std::string source_item;
  std::string node_id;
  int item_index = 0;

  std::vector<std::string> literal_tokens() const;
  std::size_t gap_count() const;
};

class PatternError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws PatternError for a `$` that is not leading, `$` mixed with `*`,
/// more than one `$`, or an item with no literal tokens.
Pattern compile_pattern(std::string_view item, std::string node_id, int item_index,
                        const SynonymMap& concepts = {});

struct MatchOutcome {
  bool matched = false;
  /// One entry per gap segment, in pattern order.
  std::vector<std::vector<std::string>> captures;
  int literal_token_count = 0;
};

/// For Slotted patterns the leftmost alignment is returned: each run is
/// placed at the earliest position that still admits a complete match.
MatchOutcome match_pattern(const Pattern& pattern, const TokenSequence& input);

struct MatchResult {
  std::string node_id;
  int item_index = 0;
  PatternKind kind = PatternKind::Literal;
  int literal_token_count = 0;
  int input_token_count = 0;
  std::vector<std::vector<std::string>> captures;
  /// literal_token_count / input_token_count, clamped to [0, 1].
  double score = 0.0;
};

struct CompiledNode {
  std::string id;
  dialog::FolderLabel folder = dialog::FolderLabel::Library;
  std::string primary_variation;
  dialog::Output output;
};

class LoadError : public std::runtime_error {
 public:
  explicit LoadError(std::vector<dialog::ValidationIssue> issues);
  const std::vector<dialog::ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<dialog::ValidationIssue> issues_;
};

/// Immutable, shareable matcher state for one document.
class CompiledIndex {
 public:
  /// Throws LoadError when validate_document reports any Error.
  static CompiledIndex build(const dialog::DialogDocument& doc);

  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }
  const std::vector<CompiledNode>& nodes() const noexcept { return nodes_; }
  const SynonymMap& concepts() const noexcept { return concepts_; }
  const dialog::Output& default_output() const noexcept { return default_output_; }
  /// Output of the first Main-folder node.
  const dialog::Output& welcome_output() const;
  const CompiledNode* node(std::string_view id) const;
  /// Position of the node in document order, or -1.
  int node_ordinal(std::string_view id) const;
  const std::string& language() const noexcept { return language_; }
  bool autolearn() const noexcept { return autolearn_; }

 private:
  std::vector<Pattern> patterns_;
  std::vector<CompiledNode> nodes_;
  std::map<std::string, int, std::less<>> ordinals_;
  SynonymMap concepts_;
  dialog::Output default_output_;
  std::string language_;
  bool autolearn_ = false;
};

/// Fallback text used when a document has no default node.
std::string builtin_fallback_text(std::string_view language);

SynonymMap synonym_map(const dialog::DialogDocument& doc);

/// Ranks matches by kind (Literal, then VerbAnchored, then Slotted), then more
/// literal tokens, then lower item index, then document order.
std::optional<MatchResult> best_match(const CompiledIndex& index, const TokenSequence& input);

struct Suggestion {
  std::string node_id;
  std::string primary_variation;
  double overlap = 0.0;
};

inline constexpr double kSuggestionThreshold = 0.5;

/// Library node whose VerbAnchored/Slotted literals best overlap the input,
/// measured as LCS(input, literals) / |literals|; none below the threshold.
std::optional<Suggestion> suggest(const CompiledIndex& index, const TokenSequence& input);

std::size_t longest_common_subsequence(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b);

}  // namespace ompmentor::match
