#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "evoindex/ground_truth.hpp"
#include "evoindex/log.hpp"
#include "evoindex/selection.hpp"
#include "evoindex/user_sim.hpp"

using namespace evoindex;

namespace {

TermId t(std::uint32_t v) { return TermId{v}; }
ObjectId o(std::uint32_t v) { return ObjectId{v}; }

std::vector<TermId> vocab(std::uint32_t n) {
  std::vector<TermId> v;
  for (std::uint32_t i = 0; i < n; ++i) v.push_back(t(i));
  return v;
}

double mean_interarrival(std::uint64_t seed, double lambda, int n) {
  Rng rng(seed);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dt = next_interarrival(rng, lambda);
    REQUIRE(dt > 0.0);
    sum += dt;
  }
  return sum / n;
}

}  // namespace

TEST_CASE("interarrival mean at lambda = 8000 per day") {
  const double mean = mean_interarrival(1, 8000.0, 1'000'000);
  CHECK(std::abs(mean - 1.25e-4) / 1.25e-4 < 0.01);
  CHECK_THROWS(next_interarrival(*std::make_unique<Rng>(1), 0.0));
}

TEST_CASE("doubling lambda halves the mean interarrival") {
  const double a = mean_interarrival(2, 100.0, 400'000);
  const double b = mean_interarrival(3, 200.0, 400'000);
  // each mean has relative sd 1/sqrt(n); the ratio's relative sd is about sqrt(2/n)
  CHECK(std::abs(a / b - 2.0) / 2.0 < 3.0 * std::sqrt(2.0 / 400'000));
}

TEST_CASE("open-interval uniform never reaches the endpoints") {
  Rng rng(4);
  for (int i = 0; i < 1'000'000; ++i) {
    const double u = uniform_open01(rng);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("arrival counts over a horizon are Poisson") {
  const double lambda = 50.0, horizon = 2.0;
  const int runs = 4000;
  std::vector<double> counts;
  for (int r = 0; r < runs; ++r) {
    Rng rng(1000 + static_cast<std::uint64_t>(r));
    double clock = 0.0;
    int n = 0;
    while (true) {
      const double next = clock + next_interarrival(rng, lambda);
      REQUIRE(next > clock);
      clock = next;
      if (clock > horizon) break;
      ++n;
    }
    counts.push_back(n);
  }
  const double mu = lambda * horizon;
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / runs;
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double var = ss / (runs - 1);
  CHECK(std::abs(mean - mu) < 3.0 * std::sqrt(mu / runs));
  // sample variance of a Poisson has sd about mu * sqrt(2 / runs) for large mu
  CHECK(std::abs(var - mu) < 3.0 * mu * std::sqrt(2.0 / runs));
}

TEST_CASE("query generator validation") {
  QueryGenerator g;
  CHECK_NOTHROW(g.validate());
  g.case_mix = {0.5, 0.5, 0.5};
  CHECK_THROWS(g.validate());
  g = QueryGenerator{};
  g.min_terms = 3;
  g.max_terms = 2;
  CHECK_THROWS(g.validate());
  g.min_terms = 0;
  CHECK_THROWS(g.validate());
}

TEST_CASE("first query is all-new whatever the mix") {
  const auto v = vocab(50);
  QueryGenerator g;
  g.case_mix = {0.0, 1.0, 0.0};
  g.warn_on_fallback = false;
  VocabularyState state(v);
  Rng rng(5);
  const GeneratedQuery first = generate_query(rng, g, state);
  CHECK(first.query_case == QueryCase::AllNew);
  CHECK(first.requested == QueryCase::AllExisting);
}

TEST_CASE("fallback is logged") {
  const auto v = vocab(10);
  QueryGenerator g;
  g.case_mix = {0.0, 1.0, 0.0};
  VocabularyState state(v);
  Rng rng(6);
  std::vector<std::string> msgs;
  auto prev = set_warning_sink([&](std::string_view m) { msgs.emplace_back(m); });
  generate_query(rng, g, state);
  set_warning_sink(prev);
  CHECK(msgs.size() == 1);
}

TEST_CASE("all-existing mix only reuses terms after warm-up") {
  const auto v = vocab(100);
  QueryGenerator g;
  g.case_mix = {0.0, 1.0, 0.0};
  g.warn_on_fallback = false;
  VocabularyState state(v);
  Rng rng(7);
  const auto warm = generate_query(rng, g, state);
  std::set<TermId> seen(warm.query.terms().begin(), warm.query.terms().end());
  for (int i = 0; i < 500; ++i) {
    const auto q = generate_query(rng, g, state);
    REQUIRE(q.query_case == QueryCase::AllExisting);
    for (TermId term : q.query.terms()) REQUIRE(seen.contains(term));
  }
}

TEST_CASE("hybrid mix always mixes new and old terms") {
  const auto v = vocab(5000);
  QueryGenerator g;
  g.case_mix = {1.0, 0.0, 0.0};
  VocabularyState state(v);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) generate_query(rng, g, state);
  g.case_mix = {0.0, 0.0, 1.0};
  for (int i = 0; i < 1000; ++i) {
    std::set<TermId> before(state.seen_terms().begin(), state.seen_terms().end());
    const auto q = generate_query(rng, g, state);
    REQUIRE(q.query_case == QueryCase::Hybrid);
    REQUIRE(q.query.size() >= 2);
    REQUIRE(q.query.size() <= 3);
    int fresh = 0, old = 0;
    for (TermId term : q.query.terms()) (before.contains(term) ? old : fresh)++;
    REQUIRE(fresh >= 1);
    REQUIRE(old >= 1);
    for (TermId term : q.query.terms()) REQUIRE(state.seen(term));
  }
}

TEST_CASE("case tags are verifiable from the term history") {
  const auto v = vocab(300);
  QueryGenerator g;
  g.warn_on_fallback = false;
  VocabularyState state(v);
  Rng rng(9);
  std::set<TermId> history;
  for (int i = 0; i < 2000; ++i) {
    const auto q = generate_query(rng, g, state);
    std::size_t old = 0;
    for (TermId term : q.query.terms()) old += history.contains(term);
    switch (q.query_case) {
      case QueryCase::AllNew: REQUIRE(old == 0); break;
      case QueryCase::AllExisting: REQUIRE(old == q.query.size()); break;
      case QueryCase::Hybrid:
        REQUIRE(old >= 1);
        REQUIRE(old < q.query.size());
        break;
    }
    history.insert(q.query.terms().begin(), q.query.terms().end());
  }
  CHECK(state.unseen_count() + state.seen_count() == 300);
}

TEST_CASE("exhausted vocabulary falls back to existing terms") {
  const auto v = vocab(3);
  QueryGenerator g;
  g.case_mix = {1.0, 0.0, 0.0};
  g.warn_on_fallback = false;
  VocabularyState state(v);
  Rng rng(10);
  for (int i = 0; i < 10; ++i) generate_query(rng, g, state);
  CHECK(state.unseen_count() == 0);
  CHECK(generate_query(rng, g, state).query_case == QueryCase::AllExisting);
}

TEST_CASE("clicks follow the pertinence rule exactly") {
  const std::vector<IndexKey> pairs{{t(1), o(1)}, {t(2), o(2)}, {t(3), o(3)}};
  const GroundTruth truth(pairs);
  const MQList mq = compose_mq(std::vector<ObjectId>{o(1), o(2)}, std::vector<ObjectId>{o(3), o(4)});

  CHECK(simulate_click(mq, truth, Query({t(2)})).clicked == std::vector<ObjectId>{o(2)});
  CHECK(simulate_click(mq, truth, Query({t(9)})).clicked.empty());
  CHECK(simulate_click(mq, truth, Query({t(1), t(2), t(3)})).clicked == std::vector<ObjectId>{o(1), o(2), o(3)});

  const std::vector<IndexKey> all{{t(1), o(1)}, {t(1), o(2)}, {t(1), o(3)}, {t(1), o(4)}};
  CHECK(simulate_click(mq, GroundTruth(all), Query({t(1)})).clicked.size() == 4);
}

TEST_CASE("click noise flips decisions at the configured rate") {
  const std::vector<IndexKey> pairs{{t(1), o(1)}};
  const GroundTruth truth(pairs);
  const MQList mq = compose_mq(std::vector<ObjectId>{o(1)}, std::vector<ObjectId>{o(2)});
  Rng rng(11);
  const int n = 100'000;
  int relevant_missed = 0, irrelevant_clicked = 0;
  for (int i = 0; i < n; ++i) {
    const Feedback fb = simulate_click(mq, truth, Query({t(1)}), 0.1, rng);
    const bool c1 = std::find(fb.clicked.begin(), fb.clicked.end(), o(1)) != fb.clicked.end();
    const bool c2 = std::find(fb.clicked.begin(), fb.clicked.end(), o(2)) != fb.clicked.end();
    relevant_missed += !c1;
    irrelevant_clicked += c2;
  }
  const double sd = std::sqrt(n * 0.1 * 0.9);
  CHECK(std::abs(relevant_missed - 0.1 * n) < 4 * sd);
  CHECK(std::abs(irrelevant_clicked - 0.1 * n) < 4 * sd);
  CHECK(simulate_click(mq, truth, Query({t(1)}), 0.0, rng).clicked == std::vector<ObjectId>{o(1)});
  CHECK_THROWS(simulate_click(mq, truth, Query({t(1)}), 1.5, rng));
}

TEST_CASE("random bipartite truth has the requested shape") {
  Rng rng(12);
  const GroundTruth truth = GroundTruth::random_bipartite(200, 40, 15, rng);
  CHECK(truth.size() == 600);
  CHECK(truth.objects().size() == 40);
  for (ObjectId obj : truth.objects()) {
    const auto terms = truth.terms_of(obj);
    CHECK(terms.size() == 15);
    std::set<TermId> unique(terms.begin(), terms.end());
    CHECK(unique.size() == 15);
    for (TermId term : terms) CHECK(truth.relevant(term, obj));
  }
  CHECK_THROWS(GroundTruth::random_bipartite(10, 5, 11, rng));
}

TEST_CASE("truth graph export round-trips") {
  Rng rng(13);
  const GroundTruth truth = GroundTruth::random_bipartite(30, 6, 4, rng);
  std::stringstream buf;
  truth.save(buf);
  const std::string text = buf.str();
  CHECK(text.find(',') != std::string::npos);
  const GroundTruth back = GroundTruth::load(buf);
  CHECK(std::equal(back.pairs().begin(), back.pairs().end(), truth.pairs().begin(), truth.pairs().end()));
  std::stringstream bad("1,2\nfoo\n");
  CHECK_THROWS(GroundTruth::load(bad));
}
