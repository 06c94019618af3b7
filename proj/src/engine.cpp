#include "evoindex/engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "evoindex/log.hpp"

namespace evoindex {

Query::Query(std::vector<TermId> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("a query needs at least one term");
  std::unordered_set<TermId> seen;
  for (TermId t : terms_) {
    if (!seen.insert(t).second) throw std::invalid_argument("query repeats a term");
  }
}

void EngineConfig::validate() const {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (!(weight > 0.0 && weight <= 1.0)) throw std::invalid_argument("weight must lie in (0, 1]");
  if (!(penalty_scale >= 0.0)) throw std::invalid_argument("penalty_scale must be non-negative");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!beta_policy.on_grid(m)) {
    throw std::invalid_argument("beta " + beta_policy.to_string() + " is not on the grid {1/m, ..., m/m} for m=" +
                                std::to_string(m));
  }
}

MQList select_action(const IndexStore& store, const Query& query, const EngineConfig& cfg, Rng& rng) {
  std::size_t m = cfg.m;
  if (store.object_count() < m) {
    warn("select_action: only " + std::to_string(store.object_count()) + " objects known, fewer than M=" +
         std::to_string(m));
    m = store.object_count();
  }
  if (m == 0) return {};

  const double beta = cfg.beta_policy.draw(rng);
  const std::size_t oa_size = choose_oa_size(beta, m);
  const auto oa = construct_oa(store, query.terms(), oa_size);
  const auto ob = sample_ob_from_store(rng, store, oa, m - oa.size());
  return order_mq(compose_mq(oa, ob), cfg.ordering, store, query.terms(), rng);
}

RewardSignal apply_feedback(IndexStore& store, const Query& query, const MQList& presented, const Feedback& fb,
                            const EngineConfig& cfg) {
  for (ObjectId o : fb.clicked) {
    if (!presented.contains(o)) {
      throw std::invalid_argument("clicked object " + std::to_string(o.value) + " was not presented");
    }
  }
  std::unordered_set<ObjectId> unique_clicks(fb.clicked.begin(), fb.clicked.end());
  if (unique_clicks.size() != fb.clicked.size()) throw std::invalid_argument("an object is clicked twice");

  RewardSignal signal;
  auto record = [&](TermId term, ObjectId object, IndexClass before, double riv_before, double riv_after) {
    const double delta = riv_after - riv_before;
    signal.deltas.push_back({term, object, delta});
    signal.total += delta;
    const IndexClass after = store.classify(term, object);
    if (before != IndexClass::Explored && after == IndexClass::Explored) signal.promoted.push_back({term, object});
    if (before == IndexClass::Explored && after != IndexClass::Explored) signal.demoted.push_back({term, object});
  };

  if (!fb.clicked.empty()) {
    for (ObjectId object : fb.clicked) {
      for (TermId term : query.terms()) {
        const IndexClass before = store.classify(term, object);
        const double riv_before = store.riv(term, object).value_or(0.0);
        const auto change = store.reinforce(term, object, cfg.weight);
        record(term, object, before, riv_before, change.riv);
      }
    }
  } else {
    for (const auto& entry : presented.entries) {
      for (TermId term : query.terms()) {
        const auto riv_before = store.riv(term, entry.object);
        if (!riv_before) continue;
        const IndexClass before = store.classify(term, entry.object);
        const auto change = store.penalize(term, entry.object, cfg.weight, cfg.penalty_scale);
        record(term, entry.object, before, *riv_before, change.riv);
      }
    }
  }
  return signal;
}

Episode run_episode(IndexStore& store, const Query& query, const EngineConfig& cfg, const ClickModel& click_model,
                    Rng& rng) {
  Episode ep;
  ep.presented = select_action(store, query, cfg, rng);
  ep.feedback = click_model(ep.presented, query);
  ep.reward = apply_feedback(store, query, ep.presented, ep.feedback, cfg);
  return ep;
}

}  // namespace evoindex
