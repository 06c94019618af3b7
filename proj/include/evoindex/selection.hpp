#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evoindex/ids.hpp"
#include "evoindex/index_store.hpp"
#include "evoindex/random.hpp"

namespace evoindex {

/// Exploit fraction policy: a fixed beta, or beta ~ Uniform(0,1) per query.
class BetaPolicy {
 public:
  static BetaPolicy deterministic(double beta);
  static BetaPolicy uniform() { return BetaPolicy(std::nullopt); }

  bool is_uniform() const noexcept { return !beta_.has_value(); }
  double fixed_beta() const { return beta_.value(); }

  /// The beta to use for one query.
  double draw(Rng& rng) const { return beta_ ? *beta_ : uniform_open01(rng); }

  /// True for the uniform policy, and when the fixed beta is 0 or lies on the grid {1/m, ..., m/m}.
  bool on_grid(std::size_t m) const;

  std::string to_string() const;
  /// Accepts a real in [0,1] or "uniform" (optionally quoted).
  static BetaPolicy parse(std::string_view text);

 private:
  explicit BetaPolicy(std::optional<double> beta) : beta_(beta) {}
  std::optional<double> beta_;
};

enum class OrderingStrategy { CompletelyRandom, SectionallyRandom, PartiallyRandom, NonRandom };

std::string_view to_string(OrderingStrategy s) noexcept;
OrderingStrategy parse_ordering(std::string_view text);

enum class Provenance { Exploit, Explore };

std::string_view to_string(Provenance p) noexcept;

struct MQEntry {
  ObjectId object;
  Provenance provenance = Provenance::Exploit;
  std::size_t rank = 0;  ///< 1-based once ordered, 0 before
  friend bool operator==(const MQEntry&, const MQEntry&) = default;
};

/// The answer list M_Q shown for a query.
struct MQList {
  std::vector<MQEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  bool contains(ObjectId object) const;
  std::vector<ObjectId> objects() const;
  std::size_t count(Provenance p) const;
  friend bool operator==(const MQList&, const MQList&) = default;
};

/// |O_a| = floor(beta * m + 1/2), clamped to [0, m].
std::size_t choose_oa_size(double beta, std::size_t m);

/// The k objects with the largest cumulative RIV over the query terms, in
/// descending score order, ties by ascending id. If k exceeds the number
/// of known objects every object is returned.
std::vector<ObjectId> construct_oa(const IndexStore& store, std::span<const TermId> terms, std::size_t k);

/// `count` distinct candidates drawn uniformly without replacement, in
/// draw order. Throws if count exceeds the candidate count.
std::vector<ObjectId> sample_ob(Rng& rng, std::span<const ObjectId> candidates, std::size_t count);

/// As sample_ob over the store's known objects minus `exclude`. Draws by
/// rejection, so each pick is uniform over the remaining candidates.
std::vector<ObjectId> sample_ob_from_store(Rng& rng, const IndexStore& store, std::span<const ObjectId> exclude,
                                           std::size_t count);

/// Unranked union of the exploit and explore sets. Throws on overlap.
MQList compose_mq(std::span<const ObjectId> oa, std::span<const ObjectId> ob);

/// Orders and ranks the list. Explore entries keep their incoming (draw)
/// order except under CompletelyRandom.
MQList order_mq(const MQList& mq, OrderingStrategy strategy, const IndexStore& store, std::span<const TermId> terms,
                Rng& rng);

}  // namespace evoindex
