#include "ompmentor/match_engine.hpp"

#include <algorithm>
#include <tuple>

#include "ompmentor/text.hpp"

namespace ompmentor::match {

namespace {

// Separators: whitespace plus ? ! . , ; : " ( ) and the Spanish ¿ ¡.
// Apostrophes are dropped without splitting the word.
std::vector<std::string> raw_tokens(std::string_view text) {
  std::string lowered = ompmentor::text::to_lower(text);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    char c = lowered[i];
    auto u = static_cast<unsigned char>(c);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      flush();
    } else if (c == '?' || c == '!' || c == '.' || c == ',' || c == ';' || c == ':' ||
               c == '"' || c == '(' || c == ')') {
      flush();
    } else if (c == '\'') {
      // dropped
    } else if (u == 0xC2 && i + 1 < lowered.size() &&
               (static_cast<unsigned char>(lowered[i + 1]) == 0xBF ||
                static_cast<unsigned char>(lowered[i + 1]) == 0xA1)) {
      flush();  // ¿ ¡
      ++i;
    } else if (u == 0xE2 && i + 2 < lowered.size() &&
               static_cast<unsigned char>(lowered[i + 1]) == 0x80 &&
               (static_cast<unsigned char>(lowered[i + 2]) == 0x99 ||
                static_cast<unsigned char>(lowered[i + 2]) == 0x98)) {
      i += 2;  // typographic apostrophes
    } else if (u == 0xE2 && i + 2 < lowered.size() &&
               static_cast<unsigned char>(lowered[i + 1]) == 0x80 &&
               (static_cast<unsigned char>(lowered[i + 2]) == 0x9C ||
                static_cast<unsigned char>(lowered[i + 2]) == 0x9D)) {
      flush();  // typographic double quotes
      i += 2;
    } else {
      current += c;
    }
  }
  flush();
  return tokens;
}

int kind_rank(PatternKind kind) {
  switch (kind) {
    case PatternKind::Literal: return 0;
    case PatternKind::VerbAnchored: return 1;
    case PatternKind::Slotted: return 2;
  }
  return 3;
}

bool run_at(const std::vector<std::string>& input, std::size_t pos,
            const std::vector<std::string>& run) {
  if (pos + run.size() > input.size()) return false;
  return std::equal(run.begin(), run.end(), input.begin() + static_cast<std::ptrdiff_t>(pos));
}

std::vector<std::string> slice(const std::vector<std::string>& v, std::size_t from, std::size_t to) {
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

MatchOutcome match_slotted(const Pattern& p, const std::vector<std::string>& input) {
  // Greedy earliest placement of each run. Every later run only needs to start
  // after the previous one ends (plus the mandatory interior gap token), so
  // placing runs as early as possible never rules out a completion.
  MatchOutcome out;
  std::vector<std::size_t> starts;
  std::size_t cursor = 0;
  bool after_run = false;
  for (const auto& seg : p.segments) {
    if (seg.is_gap) continue;
    std::size_t pos = cursor + (after_run ? 1 : 0);
    bool found = false;
    for (; pos + seg.tokens.size() <= input.size(); ++pos) {
      if (run_at(input, pos, seg.tokens)) {
        found = true;
        break;
      }
    }
    if (!found) return out;
    starts.push_back(pos);
    cursor = pos + seg.tokens.size();
    after_run = true;
  }

  out.matched = true;
  std::size_t run_index = 0;
  std::size_t consumed = 0;  // end of the previous run
  for (std::size_t i = 0; i < p.segments.size(); ++i) {
    const auto& seg = p.segments[i];
    if (seg.is_gap) {
      std::size_t gap_end = run_index < starts.size() ? starts[run_index] : input.size();
      out.captures.push_back(slice(input, consumed, gap_end));
    } else {
      out.literal_token_count += static_cast<int>(seg.tokens.size());
      consumed = starts[run_index] + seg.tokens.size();
      ++run_index;
    }
  }
  return out;
}

}  // namespace

TokenSequence normalize(std::string_view text, const SynonymMap& concepts) {
  TokenSequence seq;
  seq.source = std::string(text);
  seq.tokens = raw_tokens(text);
  if (!concepts.empty()) {
    for (auto& tok : seq.tokens) {
      auto it = concepts.find(tok);
      if (it != concepts.end()) tok = it->second;
    }
  }
  return seq;
}

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::Literal: return "Literal";
    case PatternKind::VerbAnchored: return "VerbAnchored";
    case PatternKind::Slotted: return "Slotted";
  }
  return "?";
}

std::vector<std::string> Pattern::literal_tokens() const {
  std::vector<std::string> out;
  for (const auto& seg : segments) {
    out.insert(out.end(), seg.tokens.begin(), seg.tokens.end());
  }
  return out;
}

std::size_t Pattern::gap_count() const {
  return static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(), [](const Segment& s) { return s.is_gap; }));
}

Pattern compile_pattern(std::string_view item, std::string node_id, int item_index,
                        const SynonymMap& concepts) {
  Pattern p;
  p.source_item = std::string(item);
  p.node_id = std::move(node_id);
  p.item_index = item_index;

  auto dollars = std::count(item.begin(), item.end(), '$');
  bool has_star = item.find('*') != std::string_view::npos;
  if (dollars > 0 && has_star) throw PatternError("'$' and '*' cannot be combined in one item");
  if (dollars > 1) throw PatternError("more than one '$' in item");

  if (dollars == 1) {
    auto body = ompmentor::text::trim(item);
    if (body.empty() || body.front() != '$') throw PatternError("'$' must lead the item");
    auto run = normalize(body.substr(1), concepts).tokens;
    if (run.empty()) throw PatternError("item has no literal tokens");
    p.kind = PatternKind::VerbAnchored;
    p.segments.push_back(Segment{true, {}});
    p.segments.push_back(Segment{false, std::move(run)});
    return p;
  }

  if (!has_star) {
    auto run = normalize(item, concepts).tokens;
    if (run.empty()) throw PatternError("item has no literal tokens");
    p.kind = PatternKind::Literal;
    p.segments.push_back(Segment{false, std::move(run)});
    return p;
  }

  p.kind = PatternKind::Slotted;
  std::size_t start = 0;
  bool first_piece = true;
  for (;;) {
    auto star = item.find('*', start);
    auto piece = item.substr(start, star == std::string_view::npos ? std::string_view::npos : star - start);
    auto run = normalize(piece, concepts).tokens;
    if (!first_piece && (p.segments.empty() || !p.segments.back().is_gap)) {
      p.segments.push_back(Segment{true, {}});
    }
    if (!run.empty()) p.segments.push_back(Segment{false, std::move(run)});
    first_piece = false;
    if (star == std::string_view::npos) break;
    start = star + 1;
  }
  bool any_run = std::any_of(p.segments.begin(), p.segments.end(),
                             [](const Segment& s) { return !s.is_gap; });
  if (!any_run) throw PatternError("item has only wildcards");
  return p;
}

MatchOutcome match_pattern(const Pattern& pattern, const TokenSequence& input) {
  const auto& toks = input.tokens;
  MatchOutcome out;
  switch (pattern.kind) {
    case PatternKind::Literal: {
      const auto& run = pattern.segments.front().tokens;
      if (toks == run) {
        out.matched = true;
        out.literal_token_count = static_cast<int>(run.size());
      }
      return out;
    }
    case PatternKind::VerbAnchored: {
      const auto& run = pattern.segments.back().tokens;
      if (toks.size() < run.size()) return out;
      std::size_t split = toks.size() - run.size();
      if (!run_at(toks, split, run)) return out;
      out.matched = true;
      out.literal_token_count = static_cast<int>(run.size());
      out.captures.push_back(slice(toks, 0, split));
      return out;
    }
    case PatternKind::Slotted:
      return match_slotted(pattern, toks);
  }
  return out;
}

LoadError::LoadError(std::vector<dialog::ValidationIssue> issues)
    : std::runtime_error([&] {
        std::string msg = "document has validation errors";
        for (const auto& issue : issues) {
          if (issue.severity == dialog::Severity::Error) {
            msg += "; " + issue.path + ": " + issue.message;
          }
        }
        return msg;
      }()),
      issues_(std::move(issues)) {}

std::string builtin_fallback_text(std::string_view language) {
  if (language == "ES") {
    return "Lo siento, no he entendido tu pregunta. Por favor, intenta con otra pregunta.";
  }
  return "I am sorry, I did not understand your question. Please try another question.";
}

SynonymMap synonym_map(const dialog::DialogDocument& doc) {
  SynonymMap map;
  for (const auto& folder : doc.folders) {
    for (const auto& group : folder.concepts) {
      auto canonical = normalize(group.canonical).tokens;
      if (canonical.size() != 1) continue;
      for (const auto& syn : group.synonyms) {
        auto toks = normalize(syn).tokens;
        if (toks.size() == 1 && toks[0] != canonical[0]) map.emplace(toks[0], canonical[0]);
      }
    }
  }
  return map;
}

CompiledIndex CompiledIndex::build(const dialog::DialogDocument& doc) {
  auto issues = dialog::validate_document(doc);
  if (dialog::has_errors(issues)) throw LoadError(std::move(issues));

  CompiledIndex idx;
  idx.language_ = doc.language();
  idx.autolearn_ = doc.autolearn();
  idx.concepts_ = synonym_map(doc);
  if (doc.default_node) {
    idx.default_output_ = doc.default_node->output;
  } else {
    idx.default_output_.items.push_back(builtin_fallback_text(idx.language_));
  }
  dialog::for_each_node(doc, [&](const dialog::Folder& folder, const dialog::InputNode& node) {
    idx.ordinals_.emplace(node.id, static_cast<int>(idx.nodes_.size()));
    idx.nodes_.push_back(CompiledNode{node.id, folder.label, node.grammar.front(), node.output});
    for (std::size_t i = 0; i < node.grammar.size(); ++i) {
      idx.patterns_.push_back(
          compile_pattern(node.grammar[i], node.id, static_cast<int>(i), idx.concepts_));
    }
  });
  return idx;
}

const dialog::Output& CompiledIndex::welcome_output() const {
  for (const auto& n : nodes_) {
    if (n.folder == dialog::FolderLabel::Main) return n.output;
  }
  // validate_document guarantees a Main node
  throw std::logic_error("index has no Main node");
}

const CompiledNode* CompiledIndex::node(std::string_view id) const {
  auto it = ordinals_.find(id);
  return it == ordinals_.end() ? nullptr : &nodes_[static_cast<std::size_t>(it->second)];
}

int CompiledIndex::node_ordinal(std::string_view id) const {
  auto it = ordinals_.find(id);
  return it == ordinals_.end() ? -1 : it->second;
}

std::optional<MatchResult> best_match(const CompiledIndex& index, const TokenSequence& input) {
  if (input.tokens.empty()) return std::nullopt;
  std::optional<MatchResult> best;
  auto key = [&](const MatchResult& r) {
    return std::make_tuple(kind_rank(r.kind), -r.literal_token_count, r.item_index,
                           index.node_ordinal(r.node_id));
  };
  for (const auto& p : index.patterns()) {
    auto outcome = match_pattern(p, input);
    if (!outcome.matched) continue;
    MatchResult r;
    r.node_id = p.node_id;
    r.item_index = p.item_index;
    r.kind = p.kind;
    r.literal_token_count = outcome.literal_token_count;
    r.input_token_count = static_cast<int>(input.tokens.size());
    r.captures = std::move(outcome.captures);
    r.score = std::clamp(static_cast<double>(r.literal_token_count) / r.input_token_count, 0.0, 1.0);
    if (!best || key(r) < key(*best)) best = std::move(r);
  }
  return best;
}

std::size_t longest_common_subsequence(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<Suggestion> suggest(const CompiledIndex& index, const TokenSequence& input) {
  if (input.tokens.empty()) return std::nullopt;
  std::optional<Suggestion> best;
  int best_ordinal = 0;
  for (const auto& p : index.patterns()) {
    if (p.kind == PatternKind::Literal) continue;
    const auto* node = index.node(p.node_id);
    if (node == nullptr || node->folder != dialog::FolderLabel::Library) continue;
    auto literals = p.literal_tokens();
    double overlap = static_cast<double>(longest_common_subsequence(input.tokens, literals)) /
                     static_cast<double>(literals.size());
    if (overlap < kSuggestionThreshold) continue;
    int ordinal = index.node_ordinal(p.node_id);
    if (!best || overlap > best->overlap || (overlap == best->overlap && ordinal < best_ordinal)) {
      best = Suggestion{node->id, node->primary_variation, overlap};
      best_ordinal = ordinal;
    }
  }
  return best;
}

}  // namespace ompmentor::match
