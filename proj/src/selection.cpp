#include "evoindex/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "evoindex/log.hpp"

namespace evoindex {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Uniform in-place shuffle (Fisher-Yates, forward form).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const std::size_t j = i + uniform_index(rng, v.size() - i);
    std::swap(v[i], v[j]);
  }
}

bool score_order(const std::pair<double, ObjectId>& a, const std::pair<double, ObjectId>& b) {
  if (a.first != b.first) return a.first > b.first;
  return a.second < b.second;
}

}  // namespace

BetaPolicy BetaPolicy::deterministic(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  return BetaPolicy(beta);
}

bool BetaPolicy::on_grid(std::size_t m) const {
  if (!beta_ || m == 0) return !beta_.has_value();
  const double scaled = *beta_ * static_cast<double>(m);
  return std::abs(scaled - std::round(scaled)) < 1e-9;
}

std::string BetaPolicy::to_string() const {
  if (!beta_) return "uniform";
  std::ostringstream os;
  os << *beta_;
  return os.str();
}

BetaPolicy BetaPolicy::parse(std::string_view text) {
  text = trim(text);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
  if (text == "uniform") return uniform();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("beta must be a real in [0,1] or \"uniform\", got '" + std::string(text) + "'");
  }
  return deterministic(value);
}

std::string_view to_string(OrderingStrategy s) noexcept {
  switch (s) {
    case OrderingStrategy::CompletelyRandom: return "completely_random";
    case OrderingStrategy::SectionallyRandom: return "sectionally_random";
    case OrderingStrategy::PartiallyRandom: return "partially_random";
    case OrderingStrategy::NonRandom: return "non_random";
  }
  return "?";
}

OrderingStrategy parse_ordering(std::string_view text) {
  text = trim(text);
  for (auto s : {OrderingStrategy::CompletelyRandom, OrderingStrategy::SectionallyRandom,
                 OrderingStrategy::PartiallyRandom, OrderingStrategy::NonRandom}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown ordering '" + std::string(text) +
                              "' (expected completely_random | sectionally_random | partially_random | non_random)");
}

std::string_view to_string(Provenance p) noexcept { return p == Provenance::Exploit ? "exploit" : "explore"; }

bool MQList::contains(ObjectId object) const {
  return std::any_of(entries.begin(), entries.end(), [&](const MQEntry& e) { return e.object == object; });
}

std::vector<ObjectId> MQList::objects() const {
  std::vector<ObjectId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.object);
  return out;
}

std::size_t MQList::count(Provenance p) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const MQEntry& e) { return e.provenance == p; }));
}

std::size_t choose_oa_size(double beta, std::size_t m) {
  if (m == 0) throw std::invalid_argument("list length m must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  const double rounded = std::floor(beta * static_cast<double>(m) + 0.5);
  return std::min(m, static_cast<std::size_t>(std::max(0.0, rounded)));
}

std::vector<ObjectId> construct_oa(const IndexStore& store, std::span<const TermId> terms, std::size_t k) {
  if (terms.empty()) throw std::invalid_argument("construct_oa needs at least one query term");
  if (k > store.object_count()) {
    warn("construct_oa: k=" + std::to_string(k) + " exceeds the " + std::to_string(store.object_count()) +
         " known objects; returning all");
    k = store.object_count();
  }
  if (k == 0) return {};

  // Only linked objects can score above zero; everything else ties at zero.
  std::vector<std::pair<double, ObjectId>> scored;
  std::unordered_set<ObjectId> visited;
  for (TermId term : terms) {
    for (const auto& [object, riv] : store.postings(term)) {
      if (!visited.insert(object).second) continue;
      const double score = store.cumulative_riv(terms, object);
      if (score > 0.0) scored.emplace_back(score, object);
    }
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), score_order);

  std::vector<ObjectId> out;
  out.reserve(k);
  std::unordered_set<ObjectId> positive;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    positive.insert(scored[i].second);
    if (i < take) out.push_back(scored[i].second);
  }
  for (auto it = store.objects().begin(); out.size() < k && it != store.objects().end(); ++it) {
    if (!positive.contains(it->first)) out.push_back(it->first);
  }
  return out;
}

std::vector<ObjectId> sample_ob(Rng& rng, std::span<const ObjectId> candidates, std::size_t count) {
  if (count > candidates.size()) {
    throw std::invalid_argument("cannot sample " + std::to_string(count) + " of " +
                                std::to_string(candidates.size()) + " candidates");
  }
  std::vector<ObjectId> pool(candidates.begin(), candidates.end());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<ObjectId> sample_ob_from_store(Rng& rng, const IndexStore& store, std::span<const ObjectId> exclude,
                                           std::size_t count) {
  std::unordered_set<ObjectId> taken;
  for (ObjectId o : exclude) {
    if (store.knows(o)) taken.insert(o);
  }
  const auto universe = store.object_list();
  const std::size_t available = universe.size() - taken.size();
  if (count > available) {
    throw std::invalid_argument("cannot sample " + std::to_string(count) + " of " + std::to_string(available) +
                                " candidates");
  }
  // Dense draws go through the explicit candidate list instead of rejection.
  if (2 * (taken.size() + count) > universe.size()) {
    std::vector<ObjectId> candidates;
    candidates.reserve(available);
    for (ObjectId o : universe) {
      if (!taken.contains(o)) candidates.push_back(o);
    }
    return sample_ob(rng, candidates, count);
  }
  std::vector<ObjectId> out;
  out.reserve(count);
  while (out.size() < count) {
    const ObjectId pick = universe[uniform_index(rng, universe.size())];
    if (taken.insert(pick).second) out.push_back(pick);
  }
  return out;
}

MQList compose_mq(std::span<const ObjectId> oa, std::span<const ObjectId> ob) {
  MQList mq;
  mq.entries.reserve(oa.size() + ob.size());
  std::unordered_set<ObjectId> seen;
  for (ObjectId o : oa) {
    if (!seen.insert(o).second) throw std::invalid_argument("duplicate object in exploit set");
    mq.entries.push_back({o, Provenance::Exploit, 0});
  }
  for (ObjectId o : ob) {
    if (!seen.insert(o).second) throw std::invalid_argument("explore set overlaps exploit set");
    mq.entries.push_back({o, Provenance::Explore, 0});
  }
  return mq;
}

MQList order_mq(const MQList& mq, OrderingStrategy strategy, const IndexStore& store, std::span<const TermId> terms,
                Rng& rng) {
  if (mq.empty()) throw std::invalid_argument("cannot order an empty list");

  std::vector<MQEntry> exploit;
  std::vector<MQEntry> explore;
  for (const auto& e : mq.entries) (e.provenance == Provenance::Exploit ? exploit : explore).push_back(e);

  std::vector<MQEntry> ordered;
  ordered.reserve(mq.size());

  switch (strategy) {
    case OrderingStrategy::CompletelyRandom: {
      ordered = mq.entries;
      shuffle(ordered, rng);
      break;
    }
    case OrderingStrategy::SectionallyRandom: {
      shuffle(exploit, rng);
      ordered = exploit;
      break;
    }
    case OrderingStrategy::PartiallyRandom: {
      // Successive draws without replacement, each proportional to the
      // cumulative RIV of what is left. All-zero remainders draw uniformly.
      std::vector<double> weight;
      weight.reserve(exploit.size());
      for (const auto& e : exploit) weight.push_back(store.cumulative_riv(terms, e.object));
      while (!exploit.empty()) {
        double total = 0.0;
        for (double w : weight) total += w;
        std::size_t pick = exploit.size() - 1;
        if (total > 0.0) {
          const double u = uniform_open01(rng) * total;
          double acc = 0.0;
          for (std::size_t i = 0; i < weight.size(); ++i) {
            acc += weight[i];
            if (u < acc && weight[i] > 0.0) {
              pick = i;
              break;
            }
          }
          // Rounding can leave u just past the last partial sum.
          while (weight[pick] <= 0.0) --pick;
        } else {
          pick = uniform_index(rng, exploit.size());
        }
        ordered.push_back(exploit[pick]);
        exploit.erase(exploit.begin() + static_cast<std::ptrdiff_t>(pick));
        weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      break;
    }
    case OrderingStrategy::NonRandom: {
      std::vector<std::pair<double, ObjectId>> keyed;
      keyed.reserve(exploit.size());
      for (const auto& e : exploit) keyed.emplace_back(store.cumulative_riv(terms, e.object), e.object);
      std::sort(keyed.begin(), keyed.end(), score_order);
      for (const auto& [score, object] : keyed) ordered.push_back({object, Provenance::Exploit, 0});
      break;
    }
  }
  if (strategy != OrderingStrategy::CompletelyRandom) {
    ordered.insert(ordered.end(), explore.begin(), explore.end());
  }

  MQList out;
  out.entries = std::move(ordered);
  for (std::size_t i = 0; i < out.entries.size(); ++i) out.entries[i].rank = i + 1;
  return out;
}

}  // namespace evoindex
