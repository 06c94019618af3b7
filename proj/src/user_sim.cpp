#include "evoindex/user_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "evoindex/log.hpp"

namespace evoindex {

double next_interarrival(Rng& rng, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("arrival rate must be positive");
  return exponential(rng, lambda);
}

std::string_view to_string(QueryCase c) noexcept {
  switch (c) {
    case QueryCase::AllNew: return "all_new";
    case QueryCase::AllExisting: return "all_existing";
    case QueryCase::Hybrid: return "hybrid";
  }
  return "?";
}

void QueryGenerator::validate() const {
  double sum = 0.0;
  for (double p : case_mix) {
    if (!(p >= 0.0)) throw std::invalid_argument("case_mix entries must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("case_mix must sum to 1");
  if (min_terms < 1 || min_terms > max_terms) throw std::invalid_argument("terms_per_query must be a range 1 <= a <= b");
}

VocabularyState::VocabularyState(std::span<const TermId> vocabulary) : unseen_(vocabulary.begin(), vocabulary.end()) {
  for (std::size_t i = 0; i < unseen_.size(); ++i) {
    if (!unseen_slot_.emplace(unseen_[i], i).second) throw std::invalid_argument("vocabulary repeats a term");
  }
}

bool VocabularyState::seen(TermId term) const { return !unseen_slot_.contains(term); }

void VocabularyState::mark_seen(TermId term) {
  auto it = unseen_slot_.find(term);
  if (it == unseen_slot_.end()) return;
  const std::size_t slot = it->second;
  unseen_slot_.erase(it);
  if (slot + 1 != unseen_.size()) {
    unseen_[slot] = unseen_.back();
    unseen_slot_[unseen_[slot]] = slot;
  }
  unseen_.pop_back();
  seen_.push_back(term);
}

TermId VocabularyState::draw_seen(Rng& rng) const {
  if (seen_.empty()) throw std::logic_error("no seen terms");
  return seen_[uniform_index(rng, seen_.size())];
}

TermId VocabularyState::draw_unseen(Rng& rng) const {
  if (unseen_.empty()) throw std::logic_error("no unseen terms");
  return unseen_[uniform_index(rng, unseen_.size())];
}

namespace {

QueryCase draw_case(Rng& rng, const QueryGenerator& generator) {
  const double u = uniform_open01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    acc += generator.case_mix[i];
    if (u < acc) return static_cast<QueryCase>(i);
  }
  // u landed past the rounded partial sums; take the last case with mass.
  for (std::size_t i = 3; i-- > 0;) {
    if (generator.case_mix[i] > 0.0) return static_cast<QueryCase>(i);
  }
  return QueryCase::AllNew;
}

// Up to `count` distinct terms from one side of the vocabulary.
void draw_distinct(Rng& rng, bool from_seen, std::size_t count, const VocabularyState& vocab,
                   std::vector<TermId>& out) {
  const std::size_t available = from_seen ? vocab.seen_count() : vocab.unseen_count();
  count = std::min(count, available);
  const std::size_t target = out.size() + count;
  while (out.size() < target) {
    const TermId t = from_seen ? vocab.draw_seen(rng) : vocab.draw_unseen(rng);
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
}

}  // namespace

GeneratedQuery generate_query(Rng& rng, const QueryGenerator& generator, VocabularyState& vocabulary) {
  if (vocabulary.seen_count() + vocabulary.unseen_count() == 0) throw std::invalid_argument("empty vocabulary");
  QueryCase wanted = draw_case(rng, generator);
  const std::size_t n_terms =
      generator.min_terms + uniform_index(rng, generator.max_terms - generator.min_terms + 1);

  const bool have_seen = vocabulary.seen_count() > 0;
  const bool have_unseen = vocabulary.unseen_count() > 0;
  QueryCase actual = wanted;
  if (actual == QueryCase::AllExisting && !have_seen) actual = QueryCase::AllNew;
  if (actual == QueryCase::AllNew && !have_unseen) actual = QueryCase::AllExisting;
  if (actual == QueryCase::Hybrid && !(have_seen && have_unseen)) {
    actual = have_seen ? QueryCase::AllExisting : QueryCase::AllNew;
  }
  if (actual != wanted && generator.warn_on_fallback) {
    warn(std::string("generate_query: case ") + std::string(to_string(wanted)) + " unavailable, using " +
         std::string(to_string(actual)));
  }

  std::vector<TermId> terms;
  switch (actual) {
    case QueryCase::AllNew: draw_distinct(rng, false, n_terms, vocabulary, terms); break;
    case QueryCase::AllExisting: draw_distinct(rng, true, n_terms, vocabulary, terms); break;
    case QueryCase::Hybrid: {
      // at least one of each side, the remainder split uniformly
      const std::size_t total = std::max<std::size_t>(2, n_terms);
      const std::size_t n_new = 1 + uniform_index(rng, total - 1);
      draw_distinct(rng, false, n_new, vocabulary, terms);
      draw_distinct(rng, true, total - n_new, vocabulary, terms);
      break;
    }
  }
  for (TermId t : terms) vocabulary.mark_seen(t);
  return {Query(std::move(terms)), actual, wanted};
}

Feedback simulate_click(const MQList& presented, const GroundTruth& truth, const Query& query) {
  Feedback fb;
  for (const auto& entry : presented.entries) {
    const bool pertinent = std::any_of(query.terms().begin(), query.terms().end(),
                                       [&](TermId t) { return truth.relevant(t, entry.object); });
    if (pertinent) fb.clicked.push_back(entry.object);
  }
  return fb;
}

Feedback simulate_click(const MQList& presented, const GroundTruth& truth, const Query& query, double noise,
                        Rng& rng) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw std::invalid_argument("click noise must lie in [0, 1]");
  if (noise == 0.0) return simulate_click(presented, truth, query);
  Feedback fb;
  for (const auto& entry : presented.entries) {
    bool click = std::any_of(query.terms().begin(), query.terms().end(),
                             [&](TermId t) { return truth.relevant(t, entry.object); });
    if (uniform_open01(rng) < noise) click = !click;
    if (click) fb.clicked.push_back(entry.object);
  }
  return fb;
}

}  // namespace evoindex
