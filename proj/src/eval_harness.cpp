#include "ompmentor/eval_harness.hpp"

#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ompmentor/match_engine.hpp"
#include "ompmentor/text.hpp"

namespace ompmentor::eval {

CorpusError::CorpusError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "corpus error";
        for (const auto& p : problems) msg += "; " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<CorpusRow> parse_corpus(std::string_view tsv) {
  std::vector<CorpusRow> rows;
  std::vector<std::string> problems;
  int line_no = 0;
  for (auto line : text::split_lines(tsv)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
      auto tab = line.find('\t', pos);
      fields.emplace_back(text::trim(std::string_view(line).substr(pos, tab == std::string::npos ? tab : tab - pos)));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    auto where = "row " + std::to_string(line_no) + ": ";
    if (fields.size() != 3) {
      problems.push_back(where + "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
      continue;
    }
    const auto& lang = fields[0];
    if (lang.size() != 2 || !std::isupper(static_cast<unsigned char>(lang[0])) ||
        !std::isupper(static_cast<unsigned char>(lang[1]))) {
      problems.push_back(where + "language '" + lang + "' is not a two-letter uppercase code");
      continue;
    }
    if (fields[1].empty()) problems.push_back(where + "empty question");
    if (fields[2].empty()) problems.push_back(where + "empty expected id");
    if (fields[1].empty() || fields[2].empty()) continue;
    rows.push_back({fields[0], fields[1], fields[2], line_no});
  }
  if (!problems.empty()) throw CorpusError(std::move(problems));
  return rows;
}

std::vector<CorpusRow> load_corpus(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CorpusError({"cannot read " + file.string()});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

EvalReport run_eval(const conversation::LanguageIndexes& indexes, const std::vector<CorpusRow>& corpus) {
  if (corpus.empty()) throw CorpusError({"corpus is empty"});
  std::vector<std::string> problems;
  for (const auto& row : corpus) {
    auto where = row.line > 0 ? "row " + std::to_string(row.line) + ": " : std::string();
    auto it = indexes.find(row.language);
    if (it == indexes.end()) {
      problems.push_back(where + "no document for language " + row.language);
    } else if (row.expected != kDefaultSentinel && it->second->node(row.expected) == nullptr) {
      problems.push_back(where + "expected id '" + row.expected + "' is not a node");
    }
  }
  if (!problems.empty()) throw CorpusError(std::move(problems));

  EvalReport report;
  for (const auto& row : corpus) {
    const auto& index = *indexes.find(row.language)->second;
    auto hit = match::best_match(index, match::normalize(row.question, index.concepts()));
    std::string got = hit ? hit->node_id : std::string(kDefaultSentinel);
    bool ok = got == row.expected;
    auto& entry = report.per_entry[row.expected];
    ++entry.total;
    ++report.total;
    if (ok) {
      ++entry.correct;
      ++report.correct;
    } else {
      report.confusion.push_back({row.language, row.question, row.expected, got, row.line});
    }
  }
  report.accuracy = static_cast<double>(report.correct) / report.total;
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["total"] = report.total;
  j["correct"] = report.correct;
  j["accuracy"] = report.accuracy;
  auto& per = j["per_entry"] = nlohmann::ordered_json::object();
  for (const auto& [id, acc] : report.per_entry) {
    per[id] = {{"correct", acc.correct}, {"total", acc.total}, {"accuracy", acc.accuracy()}};
  }
  auto& conf = j["confusion"] = nlohmann::ordered_json::array();
  for (const auto& c : report.confusion) {
    conf.push_back({{"line", c.line},
                    {"language", c.language},
                    {"question", c.question},
                    {"expected", c.expected},
                    {"got", c.got}});
  }
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::array<std::uint64_t, 5> likert_tenths(const LikertCounts& c) {
  const std::uint64_t sum = std::accumulate(c.counts.begin(), c.counts.end(), std::uint64_t{0});
  if (sum == 0) throw ZeroTotal();
  std::array<std::uint64_t, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) {
    // round(1000 c / sum) with ties going up, in integers
    out[i] = (2000 * c.counts[i] + sum) / (2 * sum);
  }
  return out;
}

std::array<double, 5> likert_percentages(const LikertCounts& c) {
  auto tenths = likert_tenths(c);
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) out[i] = static_cast<double>(tenths[i]) / 10.0;
  return out;
}

}  // namespace ompmentor::eval
