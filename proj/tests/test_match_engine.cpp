#include <gtest/gtest.h>

#include <random>

#include "ompmentor/dialog_document.hpp"
#include "ompmentor/knowledge_base.hpp"
#include "ompmentor/match_engine.hpp"
#include "ompmentor/text.hpp"
#include "support.hpp"

using namespace ompmentor;
using namespace ompmentor::match;
using Tokens = std::vector<std::string>;

namespace {

TokenSequence seq(const Tokens& t) { return TokenSequence{t, ""}; }

CompiledIndex sample_index() {
  return CompiledIndex::build(dialog::parse_document(ompm_test::read_file(ompm_test::data_dir() / "sample_dialog.xml")));
}

// LCS by exhaustive subsequence enumeration of the shorter side.
std::size_t brute_lcs(const Tokens& a, const Tokens& b) {
  const Tokens& s = a.size() <= b.size() ? a : b;
  const Tokens& l = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << s.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    std::size_t j = 0;
    for (const auto& t : l) {
      if (j < sub.size() && sub[j] == t) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

}  // namespace

TEST(Normalize, WorkedQuestion) {
  EXPECT_EQ(normalize("Can I change a variable inside a pragma omp loop?").tokens,
            (Tokens{"can", "i", "change", "a", "variable", "inside", "a", "pragma", "omp", "loop"}));
}

TEST(Normalize, EmptyAndBlank) {
  EXPECT_TRUE(normalize("").tokens.empty());
  EXPECT_TRUE(normalize("  \t ?! ").tokens.empty());
}

TEST(Normalize, AppliesSynonyms) {
  SynonymMap concepts{{"directive", "pragma"}};
  EXPECT_EQ(normalize("the directive omp", concepts).tokens, (Tokens{"the", "pragma", "omp"}));
}

TEST(Normalize, SpanishPunctuationAndCase) {
  EXPECT_EQ(normalize("¿Puedo CAMBIAR una variable?").tokens, (Tokens{"puedo", "cambiar", "una", "variable"}));
  EXPECT_EQ(normalize("\"quoted\", (paren); colon: end.").tokens, (Tokens{"quoted", "paren", "colon", "end"}));
  auto s = normalize("Keep Source");
  EXPECT_EQ(s.source, "Keep Source");
}

TEST(CompilePattern, VerbAnchored) {
  auto p = compile_pattern("$ Change a variable inside a loop?", "n", 1);
  EXPECT_EQ(p.kind, PatternKind::VerbAnchored);
  ASSERT_EQ(p.segments.size(), 2u);
  EXPECT_TRUE(p.segments[0].is_gap);
  EXPECT_EQ(p.segments[1].tokens, (Tokens{"change", "a", "variable", "inside", "a", "loop"}));
}

TEST(CompilePattern, Slotted) {
  auto p = compile_pattern("change * variable * loop", "n", 2);
  EXPECT_EQ(p.kind, PatternKind::Slotted);
  ASSERT_EQ(p.segments.size(), 5u);
  EXPECT_EQ(p.segments[0].tokens, Tokens{"change"});
  EXPECT_TRUE(p.segments[1].is_gap);
  EXPECT_EQ(p.segments[2].tokens, Tokens{"variable"});
  EXPECT_TRUE(p.segments[3].is_gap);
  EXPECT_EQ(p.segments[4].tokens, Tokens{"loop"});
  EXPECT_EQ(p.gap_count(), 2u);
  EXPECT_EQ(p.literal_tokens(), (Tokens{"change", "variable", "loop"}));
}

TEST(CompilePattern, LiteralAndErrors) {
  EXPECT_EQ(compile_pattern("Hello there", "n", 0).kind, PatternKind::Literal);
  EXPECT_THROW(compile_pattern("* * *", "n", 0), PatternError);
  EXPECT_THROW(compile_pattern("change $ loop", "n", 0), PatternError);
  EXPECT_THROW(compile_pattern("$ a * b", "n", 0), PatternError);
  EXPECT_THROW(compile_pattern("$ a $ b", "n", 0), PatternError);
  EXPECT_THROW(compile_pattern("$", "n", 0), PatternError);
  EXPECT_THROW(compile_pattern("?!", "n", 0), PatternError);
}

TEST(MatchPattern, VerbAnchoredCapturesLeadIn) {
  auto p = compile_pattern("$ Change a variable inside a loop?", "n", 1);
  auto r = match_pattern(p, normalize("Is it possible to change a variable inside a loop?"));
  ASSERT_TRUE(r.matched);
  ASSERT_EQ(r.captures.size(), 1u);
  EXPECT_EQ(r.captures[0], (Tokens{"is", "it", "possible", "to"}));
  EXPECT_EQ(r.literal_token_count, 6);
  auto bare = match_pattern(p, normalize("change a variable inside a loop"));
  ASSERT_TRUE(bare.matched);
  EXPECT_TRUE(bare.captures[0].empty());
  EXPECT_FALSE(match_pattern(p, normalize("change a variable inside a loop please")).matched);
}

TEST(MatchPattern, SlottedLeftmostAlignment) {
  auto p = compile_pattern("change * variable * loop", "n", 2);
  auto r = match_pattern(p, normalize("can i change a variable inside a loop"));
  ASSERT_TRUE(r.matched);
  ASSERT_EQ(r.captures.size(), 2u);
  EXPECT_EQ(r.captures[0], Tokens{"a"});
  EXPECT_EQ(r.captures[1], (Tokens{"inside", "a"}));
  EXPECT_EQ(r.literal_token_count, 3);
}

TEST(MatchPattern, InteriorGapNeedsAToken) {
  auto p = compile_pattern("change * variable", "n", 0);
  EXPECT_FALSE(match_pattern(p, normalize("change variable")).matched);
  EXPECT_TRUE(match_pattern(p, normalize("change my variable")).matched);
}

TEST(MatchPattern, LiteralIdentity) {
  auto p = compile_pattern("Can I change a variable inside a pragma omp loop?", "n", 0);
  auto r = match_pattern(p, normalize("can i change a variable inside a pragma omp loop"));
  EXPECT_TRUE(r.matched);
  EXPECT_TRUE(r.captures.empty());
  EXPECT_FALSE(match_pattern(p, normalize("can i change a variable inside a pragma omp loop now")).matched);
}

TEST(MatchPattern, EndStarsCaptureTheEnds) {
  auto p = compile_pattern("* b *", "n", 0);
  auto r = match_pattern(p, seq({"a", "b", "c", "c"}));
  ASSERT_TRUE(r.matched);
  EXPECT_EQ(r.captures, (std::vector<Tokens>{{"a"}, {"c", "c"}}));
  auto empty_ends = match_pattern(p, seq({"b"}));
  ASSERT_TRUE(empty_ends.matched);
  EXPECT_EQ(empty_ends.captures, (std::vector<Tokens>{{}, {}}));
}

TEST(MatchPattern, AgreesWithBruteForceOracle) {
  std::mt19937_64 gen(20240611);
  int matched = 0;
  for (int i = 0; i < 2000; ++i) {
    auto c = ompm_test::oracle::random_case(gen);
    auto expected = ompm_test::oracle::evaluate(c.shape, c.input);
    auto item = ompm_test::oracle::to_item(c.shape);
    auto got = match_pattern(compile_pattern(item, "n", 0), seq(c.input));
    ASSERT_EQ(got.matched, expected.matched) << item;
    if (expected.matched) {
      ++matched;
      ASSERT_EQ(got.captures, expected.captures) << item;
    }
  }
  EXPECT_GT(matched, 400);
}

TEST(MatchProperties, LiteralEquivalence) {
  std::mt19937_64 gen(7);
  const Tokens vocab = {"x", "y"};
  for (int i = 0; i < 300; ++i) {
    Tokens a(gen() % 4 + 1), b(gen() % 5);
    for (auto& t : a) t = vocab[gen() % 2];
    for (auto& t : b) t = vocab[gen() % 2];
    std::string item = text::join(a, " ");
    auto p = compile_pattern(item, "n", 0);
    EXPECT_EQ(match_pattern(p, seq(b)).matched, normalize(item).tokens == b);
  }
}

TEST(MatchProperties, VerbAnchoredSubsumesLiteral) {
  for (const char* sentence : {"Can I change a variable?", "What is false sharing", "hello"}) {
    auto lit = compile_pattern(sentence, "n", 0);
    auto anchored = compile_pattern(std::string("$ ") + sentence, "n", 1);
    auto input = normalize(sentence);
    EXPECT_TRUE(match_pattern(lit, input).matched);
    EXPECT_TRUE(match_pattern(anchored, input).matched);
  }
}

TEST(MatchProperties, SlottedMonotonicity) {
  auto p = compile_pattern("change * variable * loop", "n", 0);
  auto base = Tokens{"change", "the", "variable", "in", "loop"};
  ASSERT_TRUE(match_pattern(p, seq(base)).matched);
  auto longer = base;
  longer.insert(longer.begin() + 2, {"number", "of"});
  EXPECT_TRUE(match_pattern(p, seq(longer)).matched);
  auto missing = base;
  missing.erase(missing.begin() + 2);
  EXPECT_FALSE(match_pattern(p, seq(missing)).matched);
}

TEST(BestMatch, WorkedQuestionIsLiteral) {
  auto idx = sample_index();
  auto r = best_match(idx, normalize("Can I change a variable inside a pragma omp loop?"));
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->node_id, "Library/0");
  EXPECT_EQ(r->kind, PatternKind::Literal);
  EXPECT_DOUBLE_EQ(r->score, 1.0);
}

TEST(BestMatch, MayIToMatchesVerbAnchored) {
  auto idx = sample_index();
  auto r = best_match(idx, normalize("May I to change a variable inside a loop?"));
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->kind, PatternKind::VerbAnchored);
  EXPECT_EQ(r->node_id, "Library/0");
  EXPECT_EQ(r->captures, (std::vector<Tokens>{{"may", "i", "to"}}));
  EXPECT_DOUBLE_EQ(r->score, 6.0 / 9.0);
}

TEST(BestMatch, EmptyInputAndNoMatch) {
  auto idx = sample_index();
  EXPECT_FALSE(best_match(idx, normalize("")).has_value());
  EXPECT_FALSE(best_match(idx, normalize("what is the weather")).has_value());
}

TEST(BestMatch, RankingOrder) {
  auto doc = dialog::parse_document(R"(<dialog><flow>
    <folder label="Main"><input><grammar><item>hi</item></grammar><output><prompt><item>h</item><item>i</item></prompt></output></input></folder>
    <folder label="Library">
      <input id="slot"><grammar><item>q1</item><item>alpha * gamma</item></grammar><output><prompt><item>s</item></prompt></output></input>
      <input id="anchor"><grammar><item>q2</item><item>$ beta gamma</item></grammar><output><prompt><item>a</item></prompt></output></input>
      <input id="lit"><grammar><item>q3</item><item>alpha beta gamma</item></grammar><output><prompt><item>l</item></prompt></output></input>
      <input id="long"><grammar><item>q4</item><item>$ alpha beta gamma</item></grammar><output><prompt><item>x</item></prompt></output></input>
      <input id="first"><grammar><item>q5</item><item>* delta</item></grammar><output><prompt><item>x</item></prompt></output></input>
      <input id="second"><grammar><item>q6</item><item>* delta</item></grammar><output><prompt><item>x</item></prompt></output></input>
      <input id="low"><grammar><item>epsilon * zeta</item><item>q7</item></grammar><output><prompt><item>x</item></prompt></output></input>
      <input id="high"><grammar><item>q8</item><item>epsilon * zeta</item></grammar><output><prompt><item>x</item></prompt></output></input>
    </folder></flow></dialog>)");
  auto idx = CompiledIndex::build(doc);
  EXPECT_EQ(best_match(idx, normalize("alpha beta gamma"))->node_id, "lit");
  EXPECT_EQ(best_match(idx, normalize("so alpha beta gamma"))->node_id, "long");
  EXPECT_EQ(best_match(idx, normalize("alpha x beta gamma"))->node_id, "anchor");
  EXPECT_EQ(best_match(idx, normalize("alpha x gamma"))->node_id, "slot");
  EXPECT_EQ(best_match(idx, normalize("delta"))->node_id, "first");
  EXPECT_EQ(best_match(idx, normalize("epsilon y zeta"))->node_id, "low");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(best_match(idx, normalize("so alpha beta gamma"))->node_id, "long");
}

TEST(BestMatch, ScoreIsBounded) {
  const auto& idx = *kb::shipped_indexes().at("EN");
  for (const char* q : {"hello", "can i use critical instead of atomic here please", "what about the missing omp"}) {
    auto r = best_match(idx, normalize(q, idx.concepts()));
    if (r) {
      EXPECT_GE(r->score, 0.0);
      EXPECT_LE(r->score, 1.0);
    }
  }
}

TEST(Suggest, OverlapOfTwoThirds) {
  auto idx = sample_index();
  auto s = suggest(idx, seq({"change", "threads", "loop"}));
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->node_id, "Library/0");
  EXPECT_EQ(s->primary_variation, "Can I change a variable inside a pragma omp loop?");
  EXPECT_GE(s->overlap, 2.0 / 3.0 - 1e-12);
  EXPECT_FALSE(suggest(idx, seq({"weather", "today"})).has_value());
}

TEST(Suggest, NoSuggestionFromShippedContentForOffTopic) {
  const auto& idx = *kb::shipped_indexes().at("EN");
  EXPECT_FALSE(suggest(idx, normalize("weather today", idx.concepts())).has_value());
}

TEST(Lcs, AgreesWithBruteForce) {
  std::mt19937_64 gen(3);
  const Tokens vocab = {"p", "q", "r"};
  for (int i = 0; i < 300; ++i) {
    Tokens a(gen() % 7), b(gen() % 7);
    for (auto& t : a) t = vocab[gen() % 3];
    for (auto& t : b) t = vocab[gen() % 3];
    EXPECT_EQ(longest_common_subsequence(a, b), brute_lcs(a, b));
  }
}

TEST(CompiledIndex, FallbackWhenNoDefaultNode) {
  auto doc = dialog::parse_document(ompm_test::read_file(ompm_test::data_dir() / "sample_dialog.xml"));
  doc.default_node.reset();
  auto idx = CompiledIndex::build(doc);
  EXPECT_EQ(idx.default_output().items, (Tokens{builtin_fallback_text("EN")}));
  EXPECT_EQ(idx.welcome_output().items.size(), 2u);
  EXPECT_EQ(idx.node_ordinal("Library/0"), 1);
  EXPECT_EQ(idx.node_ordinal("zzz"), -1);
}
