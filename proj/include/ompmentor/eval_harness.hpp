#pragma once

// Matcher quality on a paraphrase corpus, and Likert percentage arithmetic.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ompmentor/conversation.hpp"

namespace ompmentor::eval {

/// Expected id of rows whose question must not match any node.
inline constexpr std::string_view kDefaultSentinel = "DEFAULT";

struct CorpusRow {
  std::string language;
  std::string question;
  std::string expected;  // node id or kDefaultSentinel
  int line = 0;          // 1-based line in the corpus file, 0 if built in code
};

class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Tab-separated `language<TAB>question<TAB>expected`, `#` starts a comment
/// line, blank lines are skipped. Every malformed row is reported.
std::vector<CorpusRow> parse_corpus(std::string_view tsv);
std::vector<CorpusRow> load_corpus(const std::filesystem::path& file);

struct Confusion {
  std::string language;
  std::string question;
  std::string expected;
  std::string got;  // node id or kDefaultSentinel
  int line = 0;
};

struct EntryAccuracy {
  int correct = 0;
  int total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

struct EvalReport {
  int total = 0;
  int correct = 0;
  double accuracy = 0.0;
  std::map<std::string, EntryAccuracy> per_entry;  // keyed by expected id
  std::vector<Confusion> confusion;                // in corpus order
};

/// Throws CorpusError for an empty corpus, a language without an index, or an
/// expected id that names no node in that language's document.
EvalReport run_eval(const conversation::LanguageIndexes& indexes, const std::vector<CorpusRow>& corpus);

std::string report_to_json(const EvalReport& report);

struct LikertCounts {
  std::array<std::uint64_t, 5> counts{};  // 1 star .. 5 stars
};

class ZeroTotal : public std::domain_error {
 public:
  ZeroTotal() : std::domain_error("Likert counts sum to zero") {}
};

/// Percentages in tenths of a percent, rounded half-up from the exact value:
/// 100 * c / sum = 12.5 gives 125.
std::array<std::uint64_t, 5> likert_tenths(const LikertCounts& c);
std::array<double, 5> likert_percentages(const LikertCounts& c);

}  // namespace ompmentor::eval
