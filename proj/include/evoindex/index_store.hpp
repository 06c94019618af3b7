#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "evoindex/ids.hpp"

namespace evoindex {

class GroundTruth;

/// One (term, object, RIV) relevance triple.
struct TorTuple {
  TermId term;
  ObjectId object;
  double riv = 0.0;
  friend bool operator==(const TorTuple&, const TorTuple&) = default;
};

enum class IndexClass { Explored, Unexplored, Absent };

const char* to_string(IndexClass c) noexcept;

/// Constants of the learning function.
struct IndexParams {
  double threshold = 10.0;      ///< h: a tuple is explored iff riv >= h
  double relevance_base = 1.0;  ///< R: one unit-weight reinforcement adds R
  double r_init = 1.0;          ///< RIV given to a minimal index

  /// Throws std::invalid_argument unless 0 < r_init < threshold and R > 0.
  void validate() const;
};

struct RivChange {
  double riv = 0.0;    ///< value after the operation
  double delta = 0.0;  ///< signed change applied by the operation itself
  bool created = false;
};

/// The dynamic index: every TOR-tuple, partitioned by the threshold into
/// the index generator (riv < h) and the index pool (riv >= h).
///
/// Single writer. Objects are "known" while they hold at least one tuple.
class IndexStore {
 public:
  explicit IndexStore(IndexParams params = {});

  const IndexParams& params() const noexcept { return params_; }

  /// Links the object to every term it is not yet linked to, at r_init.
  /// Returns the number of links created. Throws on an empty term set.
  std::size_t init_minimal_index(ObjectId object, std::span<const TermId> terms);

  /// Adds weight * R; an absent pair is first created at r_init.
  /// weight must lie in (0, 1].
  RivChange reinforce(TermId term, ObjectId object, double weight);

  /// Subtracts scale * weight * R, clamped at zero. Absent pairs are left
  /// absent and report a zero delta.
  RivChange penalize(TermId term, ObjectId object, double weight, double scale = 1.0);

  IndexClass classify(TermId term, ObjectId object) const;

  std::optional<double> riv(TermId term, ObjectId object) const;

  /// Removes one pair. Returns 0 or 1.
  std::size_t deconstruct(TermId term, ObjectId object);

  /// Removes every pair of the object; the object stops being known.
  std::size_t deconstruct(ObjectId object);

  /// Sum of riv over the given terms, absent pairs counting 0. Throws on
  /// an empty term list.
  double cumulative_riv(std::span<const TermId> terms, ObjectId object) const;

  /// Number of truth pairs not currently explored (S_t).
  std::size_t count_unexplored(const GroundTruth& truth) const;

  double total_riv() const noexcept { return total_riv_; }
  /// Sum of riv recomputed from the tuples, independent of the cached total.
  double recompute_total_riv() const;

  std::size_t tuple_count() const noexcept { return tuple_count_; }
  std::size_t pool_size() const noexcept { return pool_size_; }
  std::size_t generator_size() const noexcept { return tuple_count_ - pool_size_; }

  std::size_t object_count() const noexcept { return object_list_.size(); }
  bool knows(ObjectId object) const { return object_links_.contains(object); }
  /// Known objects in ascending id order.
  const std::map<ObjectId, std::size_t>& objects() const noexcept { return object_links_; }
  /// Known objects in an arbitrary but deterministic order, for O(1) random access.
  std::span<const ObjectId> object_list() const noexcept { return object_list_; }

  /// Objects linked to the term together with their riv. Empty if the term is unknown.
  const std::unordered_map<ObjectId, double>& postings(TermId term) const;

  /// Every tuple in (term, object) order.
  std::vector<TorTuple> tuples() const;
  void for_each(const std::function<void(const TorTuple&)>& fn) const;

  // Snapshot: first line "h,R,r_init", then one "term_id,object_id,riv" per tuple.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static IndexStore load(std::istream& in);
  static IndexStore load(const std::filesystem::path& path);

 private:
  bool is_explored(double riv) const noexcept { return riv >= params_.threshold; }
  double& insert(TermId term, ObjectId object, double riv);
  void erase(TermId term, ObjectId object, double riv);

  IndexParams params_;
  std::unordered_map<TermId, std::unordered_map<ObjectId, double>> postings_;
  std::unordered_map<ObjectId, std::vector<TermId>> object_terms_;
  std::map<ObjectId, std::size_t> object_links_;
  std::vector<ObjectId> object_list_;
  std::unordered_map<ObjectId, std::size_t> object_slot_;
  double total_riv_ = 0.0;
  std::size_t tuple_count_ = 0;
  std::size_t pool_size_ = 0;
};

}  // namespace evoindex
