#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "evoindex/ids.hpp"
#include "evoindex/random.hpp"

namespace evoindex {

/// The latent term/object relevance relation driving simulated clicks.
/// Its size C is the initial number of unexplored indexes S_0.
class GroundTruth {
 public:
  GroundTruth() = default;
  /// Duplicate pairs are collapsed.
  explicit GroundTruth(std::span<const IndexKey> pairs);

  /// Random bipartite graph: each of `objects` objects is relevant to
  /// `degree` distinct terms drawn uniformly from `terms` terms.
  static GroundTruth random_bipartite(std::size_t terms, std::size_t objects, std::size_t degree, Rng& rng);

  bool relevant(TermId term, ObjectId object) const { return set_.contains(IndexKey{term, object}.packed()); }
  std::size_t size() const noexcept { return pairs_.size(); }
  std::span<const IndexKey> pairs() const noexcept { return pairs_; }

  /// Terms that appear in at least one pair, ascending.
  std::span<const TermId> terms() const noexcept { return terms_; }
  /// Objects that appear in at least one pair, ascending.
  std::span<const ObjectId> objects() const noexcept { return objects_; }
  std::span<const TermId> terms_of(ObjectId object) const;

  /// "term_id,object_id" per line.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static GroundTruth load(std::istream& in);
  static GroundTruth load(const std::filesystem::path& path);

 private:
  std::vector<IndexKey> pairs_;
  std::unordered_set<std::uint64_t> set_;
  std::vector<TermId> terms_;
  std::vector<ObjectId> objects_;
  std::unordered_map<ObjectId, std::vector<TermId>> by_object_;
};

}  // namespace evoindex
