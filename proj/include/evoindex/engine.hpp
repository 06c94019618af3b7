#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "evoindex/ids.hpp"
#include "evoindex/index_store.hpp"
#include "evoindex/random.hpp"
#include "evoindex/selection.hpp"

namespace evoindex {

/// A query: a non-empty list of distinct terms.
class Query {
 public:
  /// Throws on an empty list or repeated terms.
  explicit Query(std::vector<TermId> terms);

  std::span<const TermId> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  friend bool operator==(const Query&, const Query&) = default;

 private:
  std::vector<TermId> terms_;
};

/// Objects the user clicked in the presented list; empty means no click.
struct Feedback {
  std::vector<ObjectId> clicked;
  friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct RivDelta {
  TermId term;
  ObjectId object;
  double delta = 0.0;
  friend bool operator==(const RivDelta&, const RivDelta&) = default;
};

/// Net RIV change caused by one feedback event.
struct RewardSignal {
  std::vector<RivDelta> deltas;
  double total = 0.0;
  std::vector<IndexKey> promoted;  ///< pairs that crossed into the pool
  std::vector<IndexKey> demoted;   ///< pairs that fell back into the generator
  friend bool operator==(const RewardSignal&, const RewardSignal&) = default;
};

struct EngineConfig {
  std::size_t m = 10;  ///< list length M
  BetaPolicy beta_policy = BetaPolicy::deterministic(0.8);
  OrderingStrategy ordering = OrderingStrategy::NonRandom;
  double weight = 1.0;         ///< reinforcement weight, in (0, 1]
  double penalty_scale = 1.0;  ///< penalty magnitude as a multiple of weight * R
  double gamma = 0.9;          ///< discount factor; reported, not used by the fixed strategy

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Draws beta, builds O_a and O_b, and returns the ranked list. Uses
/// min(M, known objects) as the list length.
MQList select_action(const IndexStore& store, const Query& query, const EngineConfig& cfg, Rng& rng);

/// Clicks reinforce every clicked object on every query term; a click-free
/// list penalizes every presented object on every query term.
RewardSignal apply_feedback(IndexStore& store, const Query& query, const MQList& presented, const Feedback& fb,
                            const EngineConfig& cfg);

using ClickModel = std::function<Feedback(const MQList&, const Query&)>;

struct Episode {
  MQList presented;
  Feedback feedback;
  RewardSignal reward;
};

/// select_action, then the click model, then apply_feedback.
Episode run_episode(IndexStore& store, const Query& query, const EngineConfig& cfg, const ClickModel& click_model,
                    Rng& rng);

}  // namespace evoindex
