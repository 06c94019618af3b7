#include <catch_amalgamated.hpp>

#include <map>
#include <sstream>
#include <vector>

#include "evoindex/ground_truth.hpp"
#include "evoindex/index_store.hpp"
#include "evoindex/random.hpp"
#include "support/helpers.hpp"

using namespace evoindex;
using Catch::Approx;
using testsupport::set_riv;

namespace {

TermId t(std::uint32_t v) { return TermId{v}; }
ObjectId o(std::uint32_t v) { return ObjectId{v}; }

}  // namespace

TEST_CASE("init_minimal_index links absent pairs at r_init") {
  IndexStore store;
  const std::vector<TermId> terms{t(1), t(2)};
  CHECK(store.init_minimal_index(o(1), terms) == 2);
  CHECK(store.riv(t(1), o(1)) == 1.0);
  CHECK(store.riv(t(2), o(1)) == 1.0);
  CHECK(store.total_riv() == 2.0);
  CHECK(store.tuple_count() == 2);
  CHECK(store.pool_size() == 0);
}

TEST_CASE("init_minimal_index leaves existing pairs alone") {
  IndexStore store;
  set_riv(store, t(1), o(1), 7.0);
  const std::vector<TermId> terms{t(1)};
  CHECK(store.init_minimal_index(o(1), terms) == 0);
  CHECK(store.riv(t(1), o(1)) == 7.0);
}

TEST_CASE("init_minimal_index rejects an empty term set") {
  IndexStore store;
  CHECK_THROWS_AS(store.init_minimal_index(o(1), std::span<const TermId>{}), std::invalid_argument);
}

TEST_CASE("index params must keep r_init below the threshold") {
  CHECK_THROWS(IndexStore(IndexParams{10.0, 1.0, 10.0}));
  CHECK_THROWS(IndexStore(IndexParams{10.0, 0.0, 1.0}));
  CHECK_THROWS(IndexStore(IndexParams{10.0, 1.0, 0.0}));
  CHECK_NOTHROW(IndexStore(IndexParams{10.0, 1.0, 9.5}));
}

TEST_CASE("reinforce adds weight times relevance base") {
  IndexStore store(IndexParams{20.0, 4.0, 1.0});
  store.reinforce(t(1), o(1), 0.25);  // 1 + 1 = 2
  REQUIRE(store.riv(t(1), o(1)) == 2.0);
  const RivChange c = store.reinforce(t(1), o(1), 0.5);
  CHECK(c.riv == 4.0);
  CHECK(c.delta == 2.0);
  CHECK_FALSE(c.created);
}

TEST_CASE("reinforce on an absent pair creates it at r_init first") {
  IndexStore store;
  const RivChange c = store.reinforce(t(3), o(4), 1.0);
  CHECK(c.created);
  CHECK(c.riv == 2.0);
  CHECK(c.delta == 1.0);
  CHECK(store.total_riv() == 2.0);
}

TEST_CASE("reinforce rejects weights outside (0, 1]") {
  IndexStore store;
  CHECK_THROWS_AS(store.reinforce(t(1), o(1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(store.reinforce(t(1), o(1), -0.5), std::invalid_argument);
  CHECK_THROWS_AS(store.reinforce(t(1), o(1), 1.5), std::invalid_argument);
  CHECK(store.tuple_count() == 0);
}

TEST_CASE("crossing the threshold promotes") {
  IndexStore store;
  set_riv(store, t(1), o(1), 9.75);
  CHECK(store.classify(t(1), o(1)) == IndexClass::Unexplored);
  store.reinforce(t(1), o(1), 0.25);
  CHECK(store.classify(t(1), o(1)) == IndexClass::Explored);
  CHECK(store.pool_size() == 1);
  CHECK(store.generator_size() == 0);
}

TEST_CASE("successive reinforcements match the closed form") {
  for (double w : {0.25, 0.5, 1.0}) {
    for (double base : {1.0, 2.5}) {
      IndexStore store(IndexParams{100.0, base, 1.0});
      const double r0 = 1.0 + w * base;
      store.reinforce(t(1), o(1), w);
      for (int i = 0; i < 5; ++i) store.reinforce(t(1), o(1), w);
      CHECK(*store.riv(t(1), o(1)) == Approx(r0 + 5 * w * base).epsilon(1e-15));
    }
  }
}

TEST_CASE("penalize subtracts and clamps at zero") {
  SECTION("plain subtraction") {
    IndexStore store(IndexParams{20.0, 4.0, 3.0});
    const std::vector<TermId> terms{t(1)};
    store.init_minimal_index(o(1), terms);
    const RivChange c = store.penalize(t(1), o(1), 0.25);
    CHECK(c.riv == 2.0);
    CHECK(c.delta == -1.0);
  }
  SECTION("clamp") {
    IndexStore store(IndexParams{10.0, 1.0, 0.5});
    const std::vector<TermId> terms{t(1)};
    store.init_minimal_index(o(1), terms);
    const RivChange c = store.penalize(t(1), o(1), 1.0);
    CHECK(c.riv == 0.0);
    CHECK(c.delta == -0.5);
    CHECK(store.classify(t(1), o(1)) == IndexClass::Unexplored);
    CHECK(store.total_riv() == 0.0);
  }
  SECTION("absent pair is a no-op") {
    IndexStore store;
    const RivChange c = store.penalize(t(1), o(1), 1.0);
    CHECK(c.delta == 0.0);
    CHECK(store.classify(t(1), o(1)) == IndexClass::Absent);
    CHECK(store.tuple_count() == 0);
  }
  SECTION("scale multiplies the magnitude") {
    IndexStore store;
    set_riv(store, t(1), o(1), 5.0);
    CHECK(store.penalize(t(1), o(1), 0.5, 2.0).delta == -1.0);
    CHECK(store.penalize(t(1), o(1), 0.5, 0.0).delta == 0.0);
    CHECK_THROWS(store.penalize(t(1), o(1), 0.5, -1.0));
  }
}

TEST_CASE("penalty below the threshold demotes") {
  IndexStore store;
  set_riv(store, t(1), o(1), 10.5);
  REQUIRE(store.classify(t(1), o(1)) == IndexClass::Explored);
  store.penalize(t(1), o(1), 1.0);
  CHECK(store.classify(t(1), o(1)) == IndexClass::Unexplored);
  CHECK(store.pool_size() == 0);
}

TEST_CASE("classify at the boundaries") {
  IndexStore store;
  set_riv(store, t(1), o(1), 10.0);
  CHECK(store.classify(t(1), o(1)) == IndexClass::Explored);
  const std::vector<TermId> terms{t(2)};
  store.init_minimal_index(o(2), terms);
  CHECK(store.classify(t(2), o(2)) == IndexClass::Unexplored);
  CHECK(store.classify(t(9), o(9)) == IndexClass::Absent);
  CHECK(std::string(to_string(IndexClass::Explored)) == "explored");
}

TEST_CASE("deconstruct removes tuples entirely") {
  IndexStore store;
  const std::vector<TermId> terms{t(1), t(2), t(3)};
  store.init_minimal_index(o(1), terms);
  store.reinforce(t(1), o(1), 1.0);
  const std::vector<TermId> other{t(1)};
  store.init_minimal_index(o(2), other);
  REQUIRE(store.total_riv() == 5.0);

  CHECK(store.deconstruct(o(1)) == 3);
  for (TermId term : terms) CHECK(store.classify(term, o(1)) == IndexClass::Absent);
  CHECK(store.total_riv() == 1.0);
  CHECK_FALSE(store.knows(o(1)));
  CHECK(store.object_count() == 1);
  CHECK(store.deconstruct(t(5), o(2)) == 0);
  CHECK(store.deconstruct(o(1)) == 0);
}

TEST_CASE("cumulative riv ignores deconstructed pairs") {
  IndexStore store;
  set_riv(store, t(1), o(1), 2.0);
  set_riv(store, t(2), o(1), 3.0);
  const std::vector<TermId> q{t(1), t(2)};
  CHECK(store.cumulative_riv(q, o(1)) == 5.0);
  CHECK(store.deconstruct(t(2), o(1)) == 1);
  CHECK(store.cumulative_riv(q, o(1)) == 2.0);
  const std::vector<TermId> absent{t(7), t(8)};
  CHECK(store.cumulative_riv(absent, o(1)) == 0.0);
  CHECK_THROWS(store.cumulative_riv(std::span<const TermId>{}, o(1)));
}

TEST_CASE("cumulative riv matches a naive re-summation") {
  Rng rng(11);
  IndexStore store;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> naive;
  for (int i = 0; i < 2000; ++i) {
    const auto term = static_cast<std::uint32_t>(uniform_index(rng, 50));
    const auto obj = static_cast<std::uint32_t>(uniform_index(rng, 20));
    const double w = 0.25 * static_cast<double>(1 + uniform_index(rng, 4));
    const auto c = store.reinforce(t(term), o(obj), w);
    naive[{term, obj}] = c.riv;
  }
  std::vector<TermId> all_terms;
  for (std::uint32_t i = 0; i < 50; ++i) all_terms.push_back(t(i));
  for (std::uint32_t obj = 0; obj < 20; ++obj) {
    double expect = 0.0;
    for (const auto& [key, riv] : naive) {
      if (key.second == obj) expect += riv;
    }
    CHECK(store.cumulative_riv(all_terms, o(obj)) == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("count_unexplored counts truth pairs not yet explored") {
  Rng rng(5);
  const GroundTruth truth = GroundTruth::random_bipartite(40, 10, 6, rng);
  IndexStore store;
  CHECK(store.count_unexplored(truth) == truth.size());
  CHECK(truth.size() == 60);

  for (const auto& key : truth.pairs()) set_riv(store, key.term, key.object, 10.0);
  CHECK(store.count_unexplored(truth) == 0);

  // random mid-run state against an exhaustive scan
  IndexStore mid;
  for (int i = 0; i < 3000; ++i) {
    const auto term = t(static_cast<std::uint32_t>(uniform_index(rng, 40)));
    const auto obj = o(static_cast<std::uint32_t>(uniform_index(rng, 10)));
    if (uniform_index(rng, 4) == 0) {
      mid.penalize(term, obj, 1.0);
    } else {
      mid.reinforce(term, obj, 1.0);
    }
  }
  std::size_t scan = 0;
  for (const auto& key : truth.pairs()) {
    if (mid.classify(key.term, key.object) != IndexClass::Explored) ++scan;
  }
  CHECK(mid.count_unexplored(truth) == scan);
}

TEST_CASE("snapshot round-trips exactly") {
  Rng rng(3);
  IndexStore store(IndexParams{7.5, 1.25, 0.3});
  for (int i = 0; i < 500; ++i) {
    const auto term = t(static_cast<std::uint32_t>(uniform_index(rng, 30)));
    const auto obj = o(static_cast<std::uint32_t>(uniform_index(rng, 15)));
    store.reinforce(term, obj, uniform_open01(rng));
    if (i % 7 == 0) store.penalize(term, obj, uniform_open01(rng), 0.3);
  }
  std::stringstream buf;
  store.save(buf);
  const std::string first = buf.str();
  const IndexStore back = IndexStore::load(buf);
  CHECK(back.tuples() == store.tuples());
  CHECK(back.params().threshold == 7.5);
  CHECK(back.params().relevance_base == 1.25);
  CHECK(back.params().r_init == 0.3);
  CHECK(back.pool_size() == store.pool_size());
  std::stringstream again;
  back.save(again);
  CHECK(again.str() == first);
}

TEST_CASE("snapshot loading reports the offending line") {
  std::stringstream bad("10,1,1\n1,2,3\n1,2\n");
  try {
    IndexStore::load(bad);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::stringstream dup("10,1,1\n1,2,3\n1,2,4\n");
  CHECK_THROWS(IndexStore::load(dup));
  std::stringstream neg("10,1,1\n1,2,-3\n");
  CHECK_THROWS(IndexStore::load(neg));
}

TEST_CASE("property: cached totals survive random operation sequences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    IndexStore store;
    for (int i = 0; i < 1500; ++i) {
      const auto term = t(static_cast<std::uint32_t>(uniform_index(rng, 12)));
      const auto obj = o(static_cast<std::uint32_t>(uniform_index(rng, 8)));
      switch (uniform_index(rng, 6)) {
        case 0: store.penalize(term, obj, uniform_open01(rng), 2.0); break;
        case 1: store.deconstruct(term, obj); break;
        case 2:
          if (uniform_index(rng, 10) == 0) store.deconstruct(obj);
          break;
        case 3: {
          const std::vector<TermId> terms{term};
          store.init_minimal_index(obj, terms);
          break;
        }
        default: store.reinforce(term, obj, uniform_open01(rng)); break;
      }
      std::size_t pool = 0;
      store.for_each([&](const TorTuple& tt) {
        CHECK(tt.riv >= 0.0);
        if (tt.riv >= store.params().threshold) ++pool;
        CHECK((store.classify(tt.term, tt.object) == IndexClass::Explored) == (tt.riv >= 10.0));
      });
      REQUIRE(store.total_riv() == Approx(store.recompute_total_riv()).margin(1e-9));
      REQUIRE(pool == store.pool_size());
      REQUIRE(store.tuples().size() == store.tuple_count());
    }
    std::size_t linked = 0;
    for (const auto& [obj, links] : store.objects()) linked += links;
    CHECK(linked == store.tuple_count());
    CHECK(store.object_list().size() == store.objects().size());
  }
}

TEST_CASE("property: remaining unexplored never rises under pure reinforcement") {
  Rng rng(9);
  const GroundTruth truth = GroundTruth::random_bipartite(30, 10, 5, rng);
  IndexStore store;
  std::size_t last = store.count_unexplored(truth);
  for (int i = 0; i < 3000; ++i) {
    const auto term = t(static_cast<std::uint32_t>(uniform_index(rng, 30)));
    const auto obj = o(static_cast<std::uint32_t>(uniform_index(rng, 10)));
    store.reinforce(term, obj, 1.0);
    const std::size_t now = store.count_unexplored(truth);
    REQUIRE(now <= last);
    last = now;
  }
}

TEST_CASE("property: deconstructed objects contribute nothing until re-initialized") {
  Rng rng(21);
  IndexStore store;
  std::vector<TermId> terms;
  for (std::uint32_t i = 0; i < 10; ++i) terms.push_back(t(i));
  for (int i = 0; i < 400; ++i) {
    store.reinforce(terms[uniform_index(rng, 10)], o(static_cast<std::uint32_t>(uniform_index(rng, 5))), 1.0);
  }
  store.deconstruct(o(2));
  for (TermId term : terms) {
    CHECK_FALSE(store.riv(term, o(2)).has_value());
    CHECK_FALSE(store.postings(term).contains(o(2)));
    store.penalize(term, o(2), 1.0);
  }
  CHECK(store.cumulative_riv(terms, o(2)) == 0.0);
  CHECK_FALSE(store.knows(o(2)));
  const std::vector<TermId> one{t(4)};
  store.init_minimal_index(o(2), one);
  CHECK(store.cumulative_riv(terms, o(2)) == 1.0);
}

TEST_CASE("property: reinforce then penalize with equal weight restores riv") {
  Rng rng(17);
  IndexStore store;
  for (int i = 0; i < 1000; ++i) {
    const auto term = t(static_cast<std::uint32_t>(uniform_index(rng, 10)));
    const auto obj = o(static_cast<std::uint32_t>(uniform_index(rng, 10)));
    store.reinforce(term, obj, 1.0);
    const double before = *store.riv(term, obj);
    const double w = 0.25 * static_cast<double>(1 + uniform_index(rng, 4));
    store.reinforce(term, obj, w);
    store.penalize(term, obj, w);
    REQUIRE(*store.riv(term, obj) == before);
  }
}
