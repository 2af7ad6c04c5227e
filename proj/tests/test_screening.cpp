#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "screener/error.hpp"
#include "screener/novelty.hpp"
#include "screener/screening.hpp"
#include "screener/tfidf.hpp"

using namespace screener;
using fixtures::doc;

namespace {

Corpus labelled_corpus(std::size_t n, std::size_t relevant) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "d%04zu", i);
    docs.push_back(doc(id, "t", "x", i < relevant ? 1 : 0));
  }
  return Corpus(std::move(docs));
}

// Relevance aligned with the unlabelled pool, produced by f(doc).
template <class F>
std::vector<double> pool_scores(const ScreeningState& s, F f) {
  std::vector<double> r;
  for (std::size_t d : s.unlabelled()) r.push_back(f(d));
  return r;
}

std::vector<std::size_t> batch_docs(const BatchProposal& p) {
  std::vector<std::size_t> out;
  for (const auto& d : p.batch) out.push_back(d.doc);
  return out;
}

TopicMatrix random_topics(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> g(0.3, 1.0);
  DenseMatrix v(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += v(i, j) = g(gen) + 1e-9;
    for (std::size_t j = 0; j < k; ++j) v(i, j) /= s;
  }
  return TopicMatrix(v);
}

FeatureMatrix bow_features(const Corpus& c) {
  const TokenizedCorpus docs = tokenize_corpus(c, Tokenizer());
  return tfidf(docs, build_vocabulary(docs));
}

class PartialOracle : public Oracle {
 public:
  PartialOracle(std::vector<int> gold, std::size_t missing) : gold_(std::move(gold)), missing_(missing) {}
  std::optional<int> label(std::size_t doc) override {
    if (doc == missing_) return std::nullopt;
    return gold_.at(doc);
  }

 private:
  std::vector<int> gold_;
  std::size_t missing_;
};

}  // namespace

TEST_SUITE("seed set") {
  TEST_CASE("both classes are present") {
    const Corpus c = labelled_corpus(40, 20);
    const auto gold = c.gold_labels();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const ScreeningState s = seed_labelled_set(c, gold, 10, seed);
      CHECK(s.labelled().size() == 10);
      CHECK(s.has_both_classes());
      CHECK(s.check_invariants());
    }
  }

  TEST_CASE("a single relevant document is forced in") {
    const Corpus c = labelled_corpus(1000, 1);
    const auto gold = c.gold_labels();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ScreeningState s = seed_labelled_set(c, gold, 25, seed);
      CHECK(s.relevant_found() == 1);
      CHECK(s.is_labelled(0));
      CHECK(s.labelled().size() == 25);
      CHECK(s.unlabelled().size() == 975);
    }
  }

  TEST_CASE("determinism, candidate restriction and errors") {
    const Corpus c = labelled_corpus(60, 10);
    const auto gold = c.gold_labels();
    CHECK(seed_labelled_set(c, gold, 8, 3).labelled() == seed_labelled_set(c, gold, 8, 3).labelled());
    CHECK(seed_labelled_set(c, gold, 8, 3).labelled() != seed_labelled_set(c, gold, 8, 4).labelled());

    const std::vector<std::size_t> pool = {0, 1, 30, 31, 32, 33, 34};
    const ScreeningState s = seed_labelled_set(c, gold, 5, 1, pool);
    for (std::size_t d : s.labelled()) CHECK(std::find(pool.begin(), pool.end(), d) != pool.end());

    CHECK_THROWS_AS(seed_labelled_set(labelled_corpus(10, 0), std::vector<int>(10, 0), 3, 0), DegenerateInput);
    CHECK_THROWS_AS(seed_labelled_set(c, gold, 60, 0), InvalidArgument);
    CHECK_THROWS_AS(seed_labelled_set(c, gold, 1, 0), InvalidArgument);
    const std::vector<std::size_t> only_irrelevant = {20, 21, 22, 23};
    CHECK_THROWS_AS(seed_labelled_set(c, gold, 2, 0, only_irrelevant), DegenerateInput);
  }
}

TEST_SUITE("ranking") {
  TEST_CASE("relevance only and the product score") {
    const std::vector<std::string> ids = {"a", "b"};
    const std::vector<double> rel = {0.9, 0.5}, nov = {0.1, 0.9};
    CHECK(rank_candidates(ids, rel) == std::vector<std::size_t>{0, 1});
    CHECK(rank_candidates(ids, rel, nov) == std::vector<std::size_t>{1, 0});
    const std::vector<double> short_scores = {0.1};
    CHECK_THROWS_AS(rank_candidates(ids, short_scores), InvalidArgument);
    CHECK_THROWS_AS(rank_candidates(ids, rel, short_scores), InvalidArgument);
  }

  TEST_CASE("ties are broken by ascending id") {
    const std::vector<std::string> ids = {"z", "b", "m"};
    const std::vector<double> rel = {0.5, 0.5, 0.5};
    CHECK(rank_candidates(ids, rel) == std::vector<std::size_t>{1, 2, 0});
  }

  TEST_CASE("100 random scores match a brute-force sort") {
    std::mt19937_64 gen(21);
    std::uniform_int_distribution<int> coarse(0, 9);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::string> ids(100);
      std::vector<double> rel(100), nov(100);
      for (std::size_t i = 0; i < 100; ++i) {
        ids[i] = "id" + std::to_string((i * 37) % 100);
        rel[i] = coarse(gen) / 10.0;
        nov[i] = coarse(gen) / 10.0;
      }
      std::vector<std::tuple<double, std::string, std::size_t>> oracle;
      for (std::size_t i = 0; i < 100; ++i) oracle.emplace_back(-rel[i] * nov[i], ids[i], i);
      std::sort(oracle.begin(), oracle.end());
      const auto got = rank_candidates(ids, rel, nov);
      for (std::size_t i = 0; i < 100; ++i) CHECK(got[i] == std::get<2>(oracle[i]));
    }
  }
}

TEST_SUITE("steps") {
  TEST_CASE("naive step exhausts a small pool") {
    const Corpus c = labelled_corpus(5, 1);
    const auto gold = c.gold_labels();
    ScreeningState s = seed_labelled_set(c, gold, 2, 0);
    REQUIRE(s.unlabelled().size() == 3);
    SimulatedOracle oracle(gold);
    step_naive(s, pool_scores(s, [](std::size_t) { return 0.3; }), 25, oracle);
    CHECK(s.exhausted());
    CHECK(s.iteration() == 1);
    CHECK(s.trace().steps[0].batch.size() == 3);
    CHECK(s.trace().steps[0].cumulative_screened == 5);
    CHECK(s.check_invariants());
    CHECK_THROWS_AS(step_naive(s, std::vector<double>{}, 25, oracle), InvalidArgument);
  }

  TEST_CASE("trace grows by one per step and records the batch in rank order") {
    const Corpus c = labelled_corpus(100, 20);
    const auto gold = c.gold_labels();
    ScreeningState s = seed_labelled_set(c, gold, 10, 5);
    SimulatedOracle oracle(gold);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u;
    for (std::size_t it = 1; !s.exhausted(); ++it) {
      const auto rel = pool_scores(s, [&](std::size_t) { return u(gen); });
      step_naive(s, rel, 7, oracle);
      CHECK(s.iteration() == it);
      const auto& batch = s.trace().steps.back().batch;
      for (std::size_t i = 1; i < batch.size(); ++i) CHECK(batch[i - 1].relevance >= batch[i].relevance);
      for (const auto& d : batch) CHECK(d.label == gold[d.doc]);
      CHECK(s.check_invariants());
    }
    CHECK(s.iteration() == 13);  // ceil(90 / 7)
  }

  TEST_CASE("a perfect classifier finds every relevant document in ceil(R/s) steps") {
    for (std::size_t relevant : {1u, 24u, 25u, 26u, 61u}) {
      const Corpus c = labelled_corpus(300, relevant + 1);
      const auto gold = c.gold_labels();
      ScreeningState s = seed_labelled_set(c, gold, 2, 9);
      const std::size_t remaining = c.relevant_count() - s.relevant_found();
      SimulatedOracle oracle(gold);
      std::size_t steps = 0;
      while (s.relevant_found() < c.relevant_count()) {
        step_naive(s, pool_scores(s, [&](std::size_t d) { return gold[d] ? 1.0 : 0.0; }), 25, oracle);
        ++steps;
      }
      CHECK(steps == (remaining + 24) / 25);
    }
  }

  TEST_CASE("novelty outweighs relevance when the candidate leaves the labelled span") {
    // Labelled rows lie on e1; x is orthogonal, y is on e1.
    DenseMatrix v(4, 2);
    v(0, 0) = 1; v(1, 0) = 1; v(2, 1) = 1; v(3, 0) = 1;
    const TopicMatrix topics(v);
    ScreeningState s({"h1", "h2", "x", "y"});
    const std::vector<std::size_t> seed = {0, 1};
    const std::vector<int> labels = {1, 0};
    s.add_seed(seed, labels);
    StrategyConfig config;
    config.batch_size = 1;
    config.components = 1;
    const std::vector<double> rel = {0.5, 0.8};  // pool order: x, y
    const BatchProposal p = propose_ig(s, topics, rel, config);
    REQUIRE(p.batch.size() == 1);
    CHECK(p.batch[0].doc == 2);
    CHECK(p.batch[0].novelty == doctest::Approx(1.0));
    CHECK(p.batch[0].rank_score == doctest::Approx(0.5));
    CHECK(p.phase == Phase::kNovelty);
    CHECK(propose_naive(s, rel, 1).batch[0].doc == 3);
  }

  TEST_CASE("IG switches to relevance only once enough topics are found") {
    const std::size_t n = 80;
    const TopicMatrix topics = random_topics(n, 6, 3);
    const Corpus c = labelled_corpus(n, 20);
    const auto gold = c.gold_labels();
    ScreeningState s = seed_labelled_set(c, gold, 4, 1);
    StrategyConfig config;
    config.batch_size = 5;
    config.max_topics = 2;
    SimulatedOracle oracle(gold);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u;
    s.set_topics_found(topics_discovered(topics, s.labelled()));
    bool switched = false;
    std::size_t prev_topics = s.topics_found();
    while (!s.exhausted()) {
      const auto rel = pool_scores(s, [&](std::size_t) { return u(gen); });
      const Phase before = s.phase();
      step_ig(s, topics, rel, config, oracle);
      CHECK(s.trace().steps.back().phase == before);
      CHECK(s.topics_found() >= prev_topics);
      prev_topics = s.topics_found();
      if (switched) CHECK(s.phase() == Phase::kRelevanceOnly);
      if (s.topics_found() >= 2) {
        CHECK(s.phase() == Phase::kRelevanceOnly);
        switched = true;
      }
    }
    CHECK(switched);
    CHECK(s.check_invariants());

    // Once switched, IG proposals coincide with naive ones.
    ScreeningState t = seed_labelled_set(c, gold, 4, 2);
    t.switch_to_relevance_only();
    const auto rel = pool_scores(t, [&](std::size_t d) { return (d * 7 % 13) / 13.0; });
    CHECK(batch_docs(propose_ig(t, topics, rel, config)) == batch_docs(propose_naive(t, rel, 5)));
  }

  TEST_CASE("the switch target is capped by the topics the pool occupies") {
    // Every row peaks on topic 0 or 1, so max_topics = 150 is unreachable.
    DenseMatrix v(30, 5);
    for (std::size_t i = 0; i < 30; ++i) {
      v(i, i % 2) = 0.6;
      for (std::size_t j = 2; j < 5; ++j) v(i, j) = 0.4 / 3.0;
    }
    const TopicMatrix topics(v);
    const Corpus c = labelled_corpus(30, 10);
    const auto gold = c.gold_labels();
    ScreeningState s = seed_labelled_set(c, gold, 4, 0);
    StrategyConfig config;
    config.batch_size = 3;
    update_ig_phase(s, topics, config);
    const bool both = topics_discovered(topics, s.labelled()) == 2;
    CHECK((s.phase() == Phase::kRelevanceOnly) == both);
  }

  TEST_CASE("novelty fixed at 1 gives the naive trace") {
    const std::size_t n = 90;
    const TopicMatrix topics = random_topics(n, 8, 5);
    const Corpus c = labelled_corpus(n, 15);
    const auto gold = c.gold_labels();
    StrategyConfig config;
    config.batch_size = 6;
    config.novelty_override = 1.0;
    ScreeningState ig = seed_labelled_set(c, gold, 6, 2);
    ScreeningState naive = ig;
    SimulatedOracle oracle(gold);
    while (!ig.exhausted()) {
      const auto rel = pool_scores(ig, [&](std::size_t d) { return std::fmod(d * 0.618034, 1.0); });
      step_ig(ig, topics, rel, config, oracle);
      step_naive(naive, rel, 6, oracle);
      CHECK(ig.labelled() == naive.labelled());
    }
  }

  TEST_CASE("LC samples the uncertainty band early and ranks by relevance later") {
    const Corpus c = labelled_corpus(1000, 100);
    const auto gold = c.gold_labels();
    ScreeningState s = seed_labelled_set(c, gold, 25, 1);
    StrategyConfig config;
    config.strategy = Strategy::kLc;

    // Empty band: the naive batch.
    const auto outside = pool_scores(s, [](std::size_t d) { return d % 2 ? 0.9 - d * 1e-4 : 0.1; });
    CHECK(batch_docs(propose_lc(s, outside, config)) == batch_docs(propose_naive(s, outside, 25)));

    // 100 documents in the band: all 25 drawn from it.
    const auto banded = pool_scores(s, [](std::size_t d) { return d % 9 == 0 ? 0.5 : 0.95; });
    std::size_t in_band = 0;
    for (double r : banded) in_band += r == 0.5;
    REQUIRE(in_band >= 100);
    const BatchProposal p = propose_lc(s, banded, config);
    CHECK(p.batch.size() == 25);
    for (const auto& d : p.batch) CHECK(d.relevance == 0.5);
    CHECK(batch_docs(propose_lc(s, banded, config)) == batch_docs(p));
    config.seed = 77;
    CHECK(batch_docs(propose_lc(s, banded, config)) != batch_docs(p));

    // Band smaller than s: topped up by relevance.
    const auto few = pool_scores(s, [](std::size_t d) { return d < 15 ? 0.45 : 0.01 + d * 1e-5; });
    std::size_t few_band = 0;
    for (double r : few) few_band += r == 0.45;
    const BatchProposal q = propose_lc(s, few, config);
    CHECK(q.batch.size() == 25);
    for (std::size_t i = 0; i < q.batch.size(); ++i) CHECK((q.batch[i].relevance == 0.45) == (i < few_band));

    // Progress 0.15 >= 0.10: pure relevance.
    ScreeningState late = s;
    SimulatedOracle oracle(gold);
    while (late.labelled().size() < 150) step_naive(late, pool_scores(late, [](std::size_t d) { return d * 1e-4; }), 25, oracle);
    const auto late_scores = pool_scores(late, [](std::size_t d) { return d % 9 == 0 ? 0.5 : 0.95 - d * 1e-5; });
    CHECK(batch_docs(propose_lc(late, late_scores, config)) == batch_docs(propose_naive(late, late_scores, 25)));
  }

  TEST_CASE("a missing oracle label leaves the state untouched") {
    const Corpus c = labelled_corpus(50, 10);
    const auto gold = c.gold_labels();
    ScreeningState s = seed_labelled_set(c, gold, 5, 0);
    const auto rel = pool_scores(s, [](std::size_t d) { return 1.0 - d * 0.01; });
    const BatchProposal p = propose_naive(s, rel, 10);
    PartialOracle oracle(gold, p.batch[4].doc);
    const auto before_labelled = s.labelled();
    const auto before_pool = s.unlabelled();
    CHECK_THROWS_AS(commit_with_oracle(s, p, oracle), OracleUnavailable);
    CHECK(s.labelled() == before_labelled);
    CHECK(s.unlabelled() == before_pool);
    CHECK(s.iteration() == 0);
    SimulatedOracle full(gold);
    commit_with_oracle(s, p, full);
    CHECK(s.iteration() == 1);
    CHECK(s.check_invariants());
  }

  TEST_CASE("state guards") {
    ScreeningState s({"a", "b", "c"});
    const std::vector<std::size_t> seed = {0};
    const std::vector<int> one = {1};
    s.add_seed(seed, one);
    CHECK_THROWS_AS(s.add_seed(seed, one), InvalidArgument);
    const std::vector<int> bad = {2};
    const std::vector<std::size_t> other = {1};
    CHECK_THROWS_AS(s.add_seed(other, bad), InvalidArgument);
    CHECK(s.check_invariants());
  }
}

TEST_SUITE("simulation") {
  TEST_CASE("every strategy screens the whole corpus in ceil((n - seed)/s) steps") {
    const Corpus c = fixtures::random_corpus(130, 0.2, 4);
    const FeatureMatrix x = bow_features(c);
    const TopicMatrix topics = random_topics(c.size(), 10, 6);
    for (Strategy strat : {Strategy::kNaive, Strategy::kIg, Strategy::kLc}) {
      for (std::size_t s : {7u, 25u}) {
        CAPTURE(to_string(strat));
        CAPTURE(s);
        StrategyConfig config;
        config.strategy = strat;
        config.batch_size = s;
        config.seed_size = 10;
        config.seed = 3;
        config.max_topics = 8;
        const SimulationResult r = run_simulation(c, x, &topics, config);
        const auto& trace = r.state.trace();
        CHECK(trace.steps.size() == (c.size() - 10 + s - 1) / s);
        CHECK(trace.steps.back().cumulative_screened == c.size());
        CHECK(trace.steps.back().cumulative_relevant == c.relevant_count());
        CHECK(r.state.check_invariants());
        REQUIRE(r.metrics.has_value());
        CHECK(r.metrics->wss >= -1.0);
        CHECK(r.metrics->wss <= 1.0);
        const SimulationResult again = run_simulation(c, x, &topics, config);
        CHECK(again.state.labelled() == r.state.labelled());
        CHECK(trace_csv(again.state.trace(), c) == trace_csv(trace, c));
      }
    }
  }

  TEST_CASE("partial runs stop at the requested count and skip metrics") {
    const Corpus c = fixtures::random_corpus(100, 0.3, 5);
    const FeatureMatrix x = bow_features(c);
    StrategyConfig config;
    config.strategy = Strategy::kNaive;
    config.batch_size = 10;
    config.seed_size = 5;
    SimulationOptions opts;
    opts.stop_after_screened = 30;
    const SimulationResult r = run_simulation(c, x, nullptr, config, opts);
    CHECK(r.state.labelled().size() == 35);
    CHECK_FALSE(r.metrics.has_value());
    config.strategy = Strategy::kIg;
    CHECK_THROWS_AS(run_simulation(c, x, nullptr, config), InvalidArgument);
    const Corpus unlabelled({doc("a", "t", "x"), doc("b", "t", "y", 1)});
    CHECK_THROWS_AS(run_simulation(unlabelled, x, nullptr, config), InvalidArgument);
  }

  TEST_CASE("method choice") {
    const MethodSelection lhvs = choose_method(0.896, 0.275);
    CHECK(lhvs.chosen == FeatureChoice::kBow);
    CHECK_FALSE(lhvs.tie);
    const MethodSelection spchd = choose_method(0.693, 0.950);
    CHECK(spchd.chosen == FeatureChoice::kPv);
    CHECK(spchd.recall_pv == 0.950);
    const MethodSelection tie = choose_method(0.5, 0.5);
    CHECK(tie.chosen == FeatureChoice::kBow);
    CHECK(tie.tie);
  }

  TEST_CASE("select_method reports both recalls at the cutoff") {
    const Corpus c = fixtures::random_corpus(120, 0.25, 8);
    const FeatureMatrix x = bow_features(c);
    const TopicMatrix topics = random_topics(c.size(), 6, 2);
    StrategyConfig config;
    config.batch_size = 5;
    config.seed_size = 6;
    const MethodSelection m = select_method(c, x, topics.as_features(), topics, config, 0.25);
    CHECK(m.recall_bow >= 0.0);
    CHECK(m.recall_bow <= 1.0);
    CHECK(m.recall_pv >= 0.0);
    CHECK(m.recall_pv <= 1.0);
    CHECK(m.chosen == choose_method(m.recall_bow, m.recall_pv).chosen);
    CHECK_THROWS_AS(select_method(c, x, x, topics, config, 0.0), InvalidArgument);
  }
}

TEST_SUITE("strategy config") {
  TEST_CASE("parse, format and validation") {
    std::istringstream in("# comment\nstrategy = lc\ns = 10\nt=4\nlc_low = 0.3\ncenter_novelty = yes\nnovelty_override = 1\n");
    const StrategyConfig c = parse_strategy_config(in);
    CHECK(c.strategy == Strategy::kLc);
    CHECK(c.batch_size == 10);
    CHECK(c.components == 4);
    CHECK(c.lc_low == 0.3);
    CHECK(c.center_novelty);
    CHECK(c.novelty_override == 1.0);
    std::istringstream round(format_strategy_config(c));
    const StrategyConfig back = parse_strategy_config(round);
    CHECK(format_strategy_config(back) == format_strategy_config(c));

    std::istringstream unknown("colour = red\n");
    CHECK_THROWS_AS(parse_strategy_config(unknown), ParseError);
    std::istringstream no_eq("strategy ig\n");
    CHECK_THROWS_AS(parse_strategy_config(no_eq), ParseError);
    StrategyConfig bad;
    bad.lc_low = 0.7;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_THROWS_AS(strategy_from_string("greedy"), InvalidArgument);
  }
}
