#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "evoindex/random.hpp"

namespace evoindex {

/// Pure-death model of index exposure: S_0 unexplored indexes, each
/// exposed after an Exp(alpha) waiting time (alpha per day).
struct DeathModel {
  std::uint64_t s0 = 1;
  double alpha = 1.0;

  /// Throws std::invalid_argument unless s0 >= 1 and alpha > 0.
  void validate() const;
};

/// E(S_t) = S_0 e^{-alpha t}.
double expected_remaining(const DeathModel& model, double t);

/// V(S_t) = S_0 e^{-alpha t} (1 - e^{-alpha t}).
double variance_remaining(const DeathModel& model, double t);

/// p = 1 - e^{-alpha T_s}, the fraction of indexes exposed by time T_s.
double exposure_proportion(double alpha, double ts);

/// Inverse of exposure_proportion: -ln(1 - p) / alpha. Requires 0 <= p < 1.
double time_to_proportion(double alpha, double p);

struct TrajectorySample {
  double t = 0.0;
  std::uint64_t remaining = 0;
  double p = 0.0;
  std::uint64_t clicks = 0;
  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// Remaining-unexplored counts sampled over time for one trial.
struct Trajectory {
  std::uint64_t s0 = 0;
  std::vector<TrajectorySample> samples;

  /// Appends a sample, deriving p from s0. Throws unless t increases.
  void add(double t, std::uint64_t remaining, std::uint64_t clicks);

  /// Header "t_days,remaining,p,clicks", reals with 6 decimals.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Brute-force oracle: draws s0 independent Exp(alpha) exposure times and
/// counts how many exceed each sample time. Sample times must be strictly
/// increasing and lie in [0, horizon].
Trajectory pure_death_oracle(const DeathModel& model, double horizon, std::span<const double> sample_times, Rng& rng);

struct AlphaEstimate {
  double alpha = 0.0;
  double standard_error = 0.0;  ///< NaN when only two points were usable
  std::size_t points = 0;
};

/// Unweighted least-squares slope of ln(remaining / s0) on t, negated.
/// Samples with remaining == 0 are dropped; fewer than two usable samples throws.
AlphaEstimate estimate_alpha(std::span<const double> t, std::span<const double> remaining, double s0);
AlphaEstimate estimate_alpha(const Trajectory& trajectory);

}  // namespace evoindex
