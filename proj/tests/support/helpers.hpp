#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "evoindex/index_store.hpp"
#include "evoindex/random.hpp"
#include "evoindex/selection.hpp"

namespace testsupport {

/// Upper 1% points of the chi-square distribution.
inline double chi2_critical_99(int dof) {
  switch (dof) {
    case 1: return 6.635;
    case 2: return 9.210;
    case 3: return 11.345;
    case 5: return 15.086;
    case 23: return 41.638;
    default: return NAN;
  }
}

inline double chi_square(const std::vector<std::uint64_t>& counts, double expected_each) {
  double s = 0.0;
  for (auto c : counts) s += (static_cast<double>(c) - expected_each) * (static_cast<double>(c) - expected_each) / expected_each;
  return s;
}

/// Moves a pair to `target` through the public learning operations.
inline void set_riv(evoindex::IndexStore& store, evoindex::TermId term, evoindex::ObjectId object, double target) {
  store.reinforce(term, object, 1.0);
  const double step = store.params().relevance_base;
  while (*store.riv(term, object) + step <= target) store.reinforce(term, object, 1.0);
  const double gap = target - *store.riv(term, object);
  if (gap > 0) store.reinforce(term, object, gap / step);
  if (gap < 0) store.penalize(term, object, 1.0, -gap / step);
}

/// Brute-force reference for the exploit set: score every known object, sort
/// fully by (score desc, id asc), keep the first k.
inline std::vector<evoindex::ObjectId> brute_force_top_k(const evoindex::IndexStore& store,
                                                         const std::vector<evoindex::TermId>& terms, std::size_t k) {
  std::vector<std::pair<double, evoindex::ObjectId>> all;
  for (const auto& [object, links] : store.objects()) {
    double s = 0.0;
    for (auto term : terms) {
      if (auto r = store.riv(term, object)) s += *r;
    }
    all.emplace_back(s, object);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<evoindex::ObjectId> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

/// Random store with integer-valued scores so ties are common.
inline evoindex::IndexStore random_store(evoindex::Rng& rng, std::size_t objects, std::size_t terms) {
  evoindex::IndexStore store;
  for (std::uint32_t o = 0; o < objects; ++o) {
    const evoindex::TermId label{static_cast<std::uint32_t>(evoindex::uniform_index(rng, terms))};
    store.init_minimal_index(evoindex::ObjectId{o}, std::span(&label, 1));
    const std::size_t extra = evoindex::uniform_index(rng, 4);
    for (std::size_t i = 0; i < extra; ++i) {
      const evoindex::TermId term{static_cast<std::uint32_t>(evoindex::uniform_index(rng, terms))};
      const std::size_t times = evoindex::uniform_index(rng, 6);
      for (std::size_t j = 0; j < times; ++j) store.reinforce(term, evoindex::ObjectId{o}, 1.0);
      if (evoindex::uniform_index(rng, 5) == 0) store.penalize(term, evoindex::ObjectId{o}, 1.0, 20.0);
    }
  }
  return store;
}

}  // namespace testsupport
