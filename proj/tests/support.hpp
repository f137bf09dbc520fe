#pragma once

// Helpers shared by the unit suites and the acceptance binary.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ompm_test {

inline std::filesystem::path source_dir() { return OMPM_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return OMPM_TEST_DATA; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

/// Non-comment, non-blank lines of a tab-separated file, split into fields.
inline std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_tabs(line));
  }
  return rows;
}

inline std::vector<std::filesystem::path> files_in(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("ompm-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Brute-force reference for wildcard matching. Works on plain token vectors
// and knows nothing about the engine's data structures.
namespace oracle {

struct Shape {
  enum Kind { Literal, Anchored, Slotted } kind = Literal;
  std::vector<std::vector<std::string>> runs;
  bool leading_star = false;
  bool trailing_star = false;
};

struct Result {
  bool matched = false;
  std::vector<std::vector<std::string>> captures;
};

inline bool run_fits(const std::vector<std::string>& in, std::size_t at, const std::vector<std::string>& run) {
  if (at + run.size() > in.size()) return false;
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (in[at + i] != run[i]) return false;
  }
  return true;
}

inline std::vector<std::string> slice(const std::vector<std::string>& in, std::size_t a, std::size_t b) {
  return {in.begin() + static_cast<long>(a), in.begin() + static_cast<long>(b)};
}

/// Enumerates every assignment of tokens to the gaps and keeps the one whose
/// run start positions are lexicographically smallest.
inline Result evaluate(const Shape& s, const std::vector<std::string>& in) {
  Result r;
  if (s.kind == Shape::Literal) {
    r.matched = in == s.runs.front();
    return r;
  }
  if (s.kind == Shape::Anchored) {
    const auto& run = s.runs.front();
    for (std::size_t prefix = 0; prefix <= in.size(); ++prefix) {
      if (prefix + run.size() == in.size() && run_fits(in, prefix, run)) {
        r.matched = true;
        r.captures.push_back(slice(in, 0, prefix));
      }
    }
    return r;
  }

  std::optional<std::vector<std::size_t>> best;
  std::vector<std::size_t> starts;
  std::function<void(std::size_t, std::size_t)> place = [&](std::size_t k, std::size_t min_start) {
    if (k == s.runs.size()) {
      if (!best || starts < *best) best = starts;
      return;
    }
    for (std::size_t pos = min_start; pos <= in.size(); ++pos) {
      if (!run_fits(in, pos, s.runs[k])) continue;
      starts.push_back(pos);
      place(k + 1, pos + s.runs[k].size() + 1);
      starts.pop_back();
    }
  };
  place(0, 0);
  if (!best) return r;
  r.matched = true;
  const auto& st = *best;
  if (s.leading_star) r.captures.push_back(slice(in, 0, st.front()));
  for (std::size_t k = 1; k < s.runs.size(); ++k) {
    r.captures.push_back(slice(in, st[k - 1] + s.runs[k - 1].size(), st[k]));
  }
  if (s.trailing_star) r.captures.push_back(slice(in, st.back() + s.runs.back().size(), in.size()));
  return r;
}

/// Grammar item text for `s`, in the dialog wildcard syntax.
inline std::string to_item(const Shape& s) {
  auto join = [](const std::vector<std::string>& run) {
    std::string out;
    for (const auto& t : run) out += (out.empty() ? "" : " ") + t;
    return out;
  };
  if (s.kind == Shape::Literal) return join(s.runs.front());
  if (s.kind == Shape::Anchored) return "$ " + join(s.runs.front());
  std::string out = s.leading_star ? "* " : "";
  for (std::size_t k = 0; k < s.runs.size(); ++k) {
    if (k > 0) out += " * ";
    out += join(s.runs[k]);
  }
  if (s.trailing_star) out += " *";
  return out;
}

struct Case {
  Shape shape;
  std::vector<std::string> input;
};

/// Random case over a three-word vocabulary so that matches are frequent.
/// Slotted patterns need at least one star, so a single run gets a leading
/// or trailing one.
inline Case random_case(std::mt19937_64& gen) {
  static const std::vector<std::string> vocab = {"a", "b", "c"};
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  auto word = [&] { return vocab[static_cast<std::size_t>(uniform(0, 2))]; };
  Case c;
  c.shape.kind = static_cast<Shape::Kind>(uniform(0, 2));
  int runs = c.shape.kind == Shape::Slotted ? uniform(1, 4) : 1;
  for (int k = 0; k < runs; ++k) {
    std::vector<std::string> run(static_cast<std::size_t>(uniform(1, 3)));
    for (auto& t : run) t = word();
    c.shape.runs.push_back(run);
  }
  if (c.shape.kind == Shape::Slotted) {
    c.shape.leading_star = uniform(0, 1) == 1;
    c.shape.trailing_star = uniform(0, 1) == 1;
    if (runs == 1 && !c.shape.leading_star && !c.shape.trailing_star) c.shape.trailing_star = true;
  }
  // Half the inputs are planted: runs separated by random filler, so the
  // matching branch is exercised as often as the rejecting one.
  if (uniform(0, 1) == 1) {
    auto filler = [&](int lo, int hi) {
      for (int n = uniform(lo, hi); n > 0; --n) c.input.push_back(word());
    };
    if (c.shape.kind != Shape::Literal) filler(0, 2);
    for (std::size_t k = 0; k < c.shape.runs.size(); ++k) {
      if (k > 0) filler(1, 2);
      c.input.insert(c.input.end(), c.shape.runs[k].begin(), c.shape.runs[k].end());
    }
    if (c.shape.kind == Shape::Slotted) filler(0, 2);
    if (c.input.size() > 12) c.input.resize(12);
  } else {
    c.input.resize(static_cast<std::size_t>(uniform(0, 12)));
    for (auto& t : c.input) t = word();
  }
  return c;
}

}  // namespace oracle
}  // namespace ompm_test
