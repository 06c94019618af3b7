#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evoindex/engine.hpp"
#include "evoindex/ground_truth.hpp"
#include "evoindex/ids.hpp"
#include "evoindex/random.hpp"
#include "evoindex/selection.hpp"

namespace evoindex {

/// Days until the next arrival of a Poisson(lambda per day) stream.
double next_interarrival(Rng& rng, double lambda);

enum class QueryCase { AllNew, AllExisting, Hybrid };

std::string_view to_string(QueryCase c) noexcept;

struct QueryGenerator {
  /// Probabilities of {AllNew, AllExisting, Hybrid}; must sum to 1.
  std::array<double, 3> case_mix{0.1, 0.6, 0.3};
  std::size_t min_terms = 1;
  std::size_t max_terms = 3;
  bool warn_on_fallback = true;

  void validate() const;
};

/// Which terms of a fixed vocabulary have already appeared in a query.
class VocabularyState {
 public:
  explicit VocabularyState(std::span<const TermId> vocabulary);

  bool seen(TermId term) const;
  void mark_seen(TermId term);

  std::size_t seen_count() const noexcept { return seen_.size(); }
  std::size_t unseen_count() const noexcept { return unseen_.size(); }

  TermId draw_seen(Rng& rng) const;
  TermId draw_unseen(Rng& rng) const;
  std::span<const TermId> seen_terms() const noexcept { return seen_; }

 private:
  std::vector<TermId> seen_;
  std::vector<TermId> unseen_;
  std::unordered_map<TermId, std::size_t> unseen_slot_;
};

struct GeneratedQuery {
  Query query;
  QueryCase query_case;
  QueryCase requested;  ///< differs from query_case after a fallback
};

/// Draws a case from the mix, then distinct terms meeting it, and marks
/// them seen. AllExisting with nothing seen falls back to AllNew; AllNew
/// with nothing unseen falls back to AllExisting; Hybrid degrades to
/// whichever side is available.
GeneratedQuery generate_query(Rng& rng, const QueryGenerator& generator, VocabularyState& vocabulary);

/// Iff-pertinent clicks: every presented object relevant to at least one
/// query term is clicked.
Feedback simulate_click(const MQList& presented, const GroundTruth& truth, const Query& query);

/// As above, but each object's click decision is flipped with probability `noise`.
Feedback simulate_click(const MQList& presented, const GroundTruth& truth, const Query& query, double noise,
                        Rng& rng);

}  // namespace evoindex
