#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "qdiff/error.hpp"
#include "qdiff/metrics.hpp"

using namespace qdiff;
using testing::Gen;

namespace {

using Strings = std::vector<std::string>;

QuestionRecord record(Strings raw, Strings content, std::string answer, std::size_t id = 0) {
  QuestionRecord r;
  r.id = id;
  r.raw_tokens = std::move(raw);
  r.content_tokens = std::move(content);
  r.answer = std::move(answer);
  r.difficulty = 1;
  return r;
}

// Angle through long-double arccos, computed from scratch.
long double acos_deg(long double c) {
  c = std::clamp(c, -1.0L, 1.0L);
  return std::acos(c) * 180.0L / std::numbers::pi_v<long double>;
}

long double cosine_ld(std::span<const float> a, std::span<const long double> b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

struct Oracle {
  long double synergistic;
  long double independent;
  long double keyword;
};

Oracle oracle(const EmbeddingSpace& space, const Strings& tokens, const std::string& answer) {
  const auto a = space.vector(answer);
  std::vector<long double> sum(space.dimension(), 0.0L);
  long double cos_sum = 0;
  long double best = -2;
  for (const auto& t : tokens) {
    const auto v = space.vector(t);
    std::vector<long double> q(v.begin(), v.end());
    for (std::size_t i = 0; i < q.size(); ++i) sum[i] += q[i];
    const long double c = cosine_ld(a, q);
    cos_sum += c;
    best = std::max(best, c);
  }
  return {acos_deg(cosine_ld(a, sum)), acos_deg(cos_sum / static_cast<long double>(tokens.size())), acos_deg(best)};
}

EmbeddingSpace random_space(Gen& g, std::size_t words, std::size_t dim, Strings& names) {
  EmbeddingSpaceBuilder b(dim);
  names.clear();
  for (std::size_t i = 0; i < words; ++i) {
    names.push_back("w" + std::to_string(i));
    b.add(names.back(), g.vec(dim));
  }
  return std::move(b).build();
}

Strings pick(Gen& g, const Strings& names, std::size_t k) {
  Strings out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(names[g.below(names.size())]);
  return out;
}

}  // namespace

TEST_CASE("synergistic_opacity: examples") {
  const auto space = testing::load_text("a 1 0 0\nq1 1 1 0\nq2 1 -1 0\nq3 -1 -1 0\n");
  const Strings both{"q1", "q2"};
  CHECK(*synergistic_opacity(space, both, "a") == 0.0);
  const Strings one{"q1"};
  CHECK(*synergistic_opacity(space, one, "a") ==
        angle_between(space.vector(std::string("q1")), space.vector(std::string("a"))));
  // q1 + q3 = (0, 0, 0): undefined
  const Strings cancel{"q1", "q3"};
  CHECK_FALSE(synergistic_opacity(space, cancel, "a").has_value());
  CHECK_THROWS_AS(synergistic_opacity(space, Strings{}, "a"), ArgumentError);
  CHECK_THROWS_AS(synergistic_opacity(space, Strings{"nope"}, "a"), ArgumentError);
}

TEST_CASE("independent and keyword opacity: examples") {
  const auto space = testing::load_text("a 1 0\nq1 1 0\nq2 0 1\n");
  const Strings clue{"q1", "q2"};
  CHECK(independent_opacity(space, clue, "a") == doctest::Approx(60.0).epsilon(1e-14));
  CHECK(keyword_opacity(space, clue, "a") == 0.0);
  // mean of per-word angles: (0 + 90) / 2
  CHECK(independent_opacity(space, clue, "a", IndependentAggregation::mean_angle) == doctest::Approx(45.0));
  const Strings one{"q2"};
  CHECK(independent_opacity(space, one, "a") == doctest::Approx(90.0));
  CHECK(keyword_opacity(space, one, "a") == doctest::Approx(90.0));
}

TEST_CASE("opacity models against a long-double oracle") {
  Gen g(21);
  Strings names;
  const auto space = random_space(g, 60, 16, names);
  for (int i = 0; i < 400; ++i) {
    const auto tokens = pick(g, names, 1 + g.below(6));
    const auto answer = names[g.below(names.size())];
    const auto o = oracle(space, tokens, answer);
    const auto p = opacity_profile(space, tokens, answer);
    REQUIRE(p.synergistic_deg.has_value());
    CHECK(std::fabs(*p.synergistic_deg - static_cast<double>(o.synergistic)) < 1e-9);
    CHECK(std::fabs(p.independent_deg - static_cast<double>(o.independent)) < 1e-9);
    CHECK(std::fabs(p.keyword_deg - static_cast<double>(o.keyword)) < 1e-9);
  }
}

TEST_CASE("opacity properties: ordering, single token agreement, invariances") {
  Gen g(22);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 2 + g.below(30);
    const std::size_t k = 1 + g.below(5);
    std::vector<std::pair<std::string, std::vector<float>>> entries;
    const auto answer_vec = g.vec(dim);
    entries.emplace_back("ans", answer_vec);
    // a power of two, so the stored float vector is exactly a rescaling
    const float alpha = std::ldexp(1.0f, static_cast<int>(g.below(7)) - 3);
    std::vector<float> scaled_answer(answer_vec);
    for (auto& x : scaled_answer) x *= alpha;
    entries.emplace_back("ans_scaled", scaled_answer);
    Strings tokens;
    for (std::size_t i = 0; i < k; ++i) {
      tokens.push_back("t" + std::to_string(i));
      entries.emplace_back(tokens.back(), g.vec(dim));
    }
    // one token rescaled, for the independent-model invariance
    std::vector<float> t0_scaled(entries[2].second);
    for (auto& x : t0_scaled) x *= 4.0f;
    entries.emplace_back("t0_scaled", t0_scaled);
    const auto space = testing::space_from(entries);

    const auto p = opacity_profile(space, tokens, "ans");
    CHECK(p.keyword_deg <= p.independent_deg);
    if (k == 1) {
      CHECK(p.synergistic_deg.value() == p.independent_deg);
      CHECK(p.keyword_deg == p.independent_deg);
    }

    // answer scale
    const auto s2 = synergistic_opacity(space, tokens, "ans_scaled");
    CHECK(std::fabs(*s2 - *p.synergistic_deg) < 1e-9);

    // permutation
    Strings perm(tokens.rbegin(), tokens.rend());
    CHECK(std::fabs(*synergistic_opacity(space, perm, "ans") - *p.synergistic_deg) < 1e-9);
    CHECK(std::fabs(independent_opacity(space, perm, "ans") - p.independent_deg) < 1e-9);

    // clue token scale
    Strings rescaled(tokens);
    rescaled[0] = "t0_scaled";
    CHECK(std::fabs(independent_opacity(space, rescaled, "ans") - p.independent_deg) < 1e-9);
  }
}

TEST_CASE("question_features: examples") {
  FrequencyTable table({{"game", 80.0}, {"bat", 12.0}, {"ball", 50.0}, {"and", 20000.0}, {"with", 7000.0},
                        {"iron", 40.0}, {"horse", 60.0}},
                       "test");
  auto f = question_features(record({"game", "with", "bat", "and", "ball"}, {"game", "bat", "ball"}, "baseball"),
                             table);
  CHECK(f.q_length == 5);
  CHECK(f.content_length == 3);
  CHECK(f.conjunction_freq == 0.2);
  CHECK(*f.min_q_word_freq == doctest::Approx(std::log10(12.0)).epsilon(1e-14));  // libm vs constant folding

  auto g = question_features(record({"iron", "horse"}, {"iron", "horse"}, "train"), table);
  CHECK(*g.min_q_word_freq == doctest::Approx(std::log10(40.0)).epsilon(1e-14));
  CHECK(g.conjunction_freq == 0.0);

  auto h = question_features(record({"blorf", "quazzle"}, {"blorf"}, "x"), table);
  CHECK_FALSE(h.min_q_word_freq.has_value());

  auto all = question_features(record({"and", "or", "but"}, {"x"}, "x"), table);
  CHECK(all.conjunction_freq == 1.0);

  CHECK_THROWS_AS(question_features(record({}, {}, "x"), table), ArgumentError);
}

TEST_CASE("flags round trip through names") {
  for (std::uint32_t bits = 0; bits < 16; ++bits) {
    std::uint32_t back = 0;
    for (const auto& n : flag_names(bits)) back |= flag_from_name(n);
    CHECK(back == bits);
  }
  CHECK_THROWS_AS(flag_from_name("bogus"), FormatError);
}

TEST_CASE("density vocab names") {
  for (auto v : {DensityVocab::corpus, DensityVocab::top100k, DensityVocab::full}) {
    CHECK(density_vocab_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(density_vocab_from_string("all"), ArgumentError);
}

TEST_CASE("score_corpus: empty corpus") {
  const auto space = testing::load_text("a 1 0\n");
  CHECK(score_corpus({}, space, FrequencyTable{}).empty());
}

TEST_CASE("score_corpus: features, flags and neighbors") {
  const auto space = testing::load_text(
      "baseball 1 0 0\ngame 1 1 0\nbat 0 1 1\nball 1 0 1\n"
      "q1 1 1 0\nq3 -1 -1 0\n"
      "etch 0 0 1\netched 0 0 1.1\nglass 0 1 1\n");
  FrequencyTable table({{"baseball", 33.4}, {"game", 80}, {"bat", 12}, {"ball", 50}, {"glass", 30}, {"etch", 2}},
                       "t");
  std::vector<QuestionRecord> recs{
      record({"game", "with", "bat", "and", "ball"}, {"game", "bat", "ball"}, "baseball", 0),
      record({"q1", "q3"}, {"q1", "q3"}, "etch", 1),
      record({"blorf", "glass"}, {"glass"}, "etched", 2),
  };
  ScoreConfig cfg;
  cfg.density_vocab = DensityVocab::full;
  const auto out = score_corpus(recs, space, table, cfg);
  REQUIRE(out.size() == 3);

  CHECK(out[0].id == 0);
  CHECK(*out[0].answer_fpm == 33.4);
  CHECK(*out[0].features.obscurity == doctest::Approx(-std::log10(33.4)).epsilon(1e-15));
  CHECK(out[0].flags == 0);
  CHECK(out[0].features.q_length == 5);

  // zero clue sum: carried with a flag, not dropped
  CHECK_FALSE(out[1].opacity.synergistic_deg.has_value());
  CHECK((out[1].flags & flags::undefined_opacity) != 0);
  CHECK((out[1].flags & flags::missing_question_frequency) != 0);
  // etched is a stem of etch, so the neighbor is elsewhere
  REQUIRE(out[1].density_neighbor.has_value());
  CHECK(*out[1].density_neighbor != "etched");
  CHECK(*out[1].density_neighbor == "ball");

  CHECK((out[2].flags & flags::missing_answer_frequency) != 0);
  CHECK_FALSE(out[2].features.obscurity.has_value());
  CHECK(*out[2].density_neighbor == "ball");  // three-way tie with bat and glass
}

TEST_CASE("score_corpus: parallel matches serial, any thread count") {
  Gen g(30);
  Strings names;
  const auto space = random_space(g, 400, 12, names);
  std::unordered_map<std::string, double> freq;
  for (std::size_t i = 0; i < names.size(); i += 2) freq[names[i]] = g.uniform(0.1, 500.0);
  FrequencyTable table(freq, "t");
  std::vector<QuestionRecord> recs;
  for (std::size_t i = 0; i < 700; ++i) {
    auto toks = pick(g, names, 1 + g.below(5));
    recs.push_back(record(toks, toks, names[g.below(names.size())], i));
  }
  ScoreConfig cfg;
  cfg.top_n = 50;
  for (auto vocab : {DensityVocab::corpus, DensityVocab::top100k, DensityVocab::full}) {
    cfg.density_vocab = vocab;
    cfg.threads = 1;
    const auto ref = serial::score_corpus(recs, space, table, cfg);
    for (int threads : {1, 2, 5}) {
      cfg.threads = threads;
      const auto par = score_corpus(recs, space, table, cfg);
      REQUIRE(par.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(par[i].opacity.synergistic_deg == ref[i].opacity.synergistic_deg);
        CHECK(par[i].opacity.independent_deg == ref[i].opacity.independent_deg);
        CHECK(par[i].features.answer_density == ref[i].features.answer_density);
        CHECK(par[i].density_neighbor == ref[i].density_neighbor);
        CHECK(par[i].flags == ref[i].flags);
      }
    }
  }
}

TEST_CASE("density_search_vocab and score_vocab_filter") {
  const auto space = testing::load_text("a 1 0\nb 0 1\nc 1 1\nd 2 1\n");
  FrequencyTable table({{"c", 100}, {"d", 50}, {"zz", 900}}, "t");
  std::vector<QuestionRecord> recs{record({"b"}, {"b"}, "a")};
  ScoreConfig cfg;
  cfg.top_n = 2;
  cfg.density_vocab = DensityVocab::corpus;
  CHECK(density_search_vocab(recs, space, table, cfg) == std::vector<std::size_t>{0});
  cfg.density_vocab = DensityVocab::top100k;
  CHECK(density_search_vocab(recs, space, table, cfg) == std::vector<std::size_t>{0, 2});
  auto filter = score_vocab_filter(recs, table, cfg);
  REQUIRE(filter.has_value());
  CHECK(*filter == std::unordered_set<std::string>{"a", "b", "zz", "c"});
  cfg.density_vocab = DensityVocab::full;
  CHECK(density_search_vocab(recs, space, table, cfg).size() == 4);
  CHECK_FALSE(score_vocab_filter(recs, table, cfg).has_value());
}
