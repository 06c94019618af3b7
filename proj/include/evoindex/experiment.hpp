#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoindex/config.hpp"
#include "evoindex/death_model.hpp"

namespace evoindex {

/// Everything one seeded trial produces.
struct TrialResult {
  std::uint64_t seed = 0;
  Trajectory trajectory;
  std::uint64_t arrivals = 0;
  /// clicks received -> number of explored indexes with that many clicks, at the end of the run
  std::map<std::uint64_t, std::uint64_t> click_histogram;
  std::uint64_t explored_indexes = 0;
  std::vector<ObjectId> deconstructed;
  /// presented entries that named an already-deconstructed object
  std::uint64_t deconstructed_presentations = 0;
  std::uint64_t case_fallbacks = 0;
};

/// One seeded trial. Abstract mode exposes each of the s0 indexes after an
/// Exp(alpha) clock, registered at the first arrival past it; mechanistic
/// mode runs the full engine against a random truth graph.
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed);

struct EnsembleRow {
  double t = 0.0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased, across seeds
  double theory_mean = 0.0;
  double theory_variance = 0.0;
  std::optional<double> z;  ///< (mean - theory_mean) / sqrt(theory_variance / n)
};

struct EnsembleReport {
  Mode mode = Mode::Abstract;
  std::uint64_t s0 = 0;
  double gamma = 0.0;         ///< discount factor of the engine, metadata only
  double theory_alpha = 0.0;  ///< configured alpha, or the fitted one in mechanistic mode
  AlphaEstimate alpha_hat;    ///< fitted on the ensemble mean
  std::vector<std::uint64_t> seeds;
  std::vector<EnsembleRow> rows;
  std::vector<std::optional<double>> convergence_times;  ///< per seed, first t with p > 0.9
  std::vector<TrialResult> trials;
};

/// Aggregates trajectories sampled on a common grid. The theory curves use
/// `theory_alpha`, or the ensemble fit when it is absent. Throws on fewer
/// than two trajectories or mismatched grids.
EnsembleReport aggregate(std::vector<TrialResult> trials, std::optional<double> theory_alpha, Mode mode);

/// Runs every seed (in parallel when cores allow) and aggregates.
EnsembleReport run_monte_carlo(const ExperimentConfig& config, unsigned threads = 0);

/// Earliest sample time with p > 0.9.
std::optional<double> detect_convergence(const Trajectory& trajectory, double proportion = 0.9);

struct TheoryComparison {
  bool pass = false;
  double fraction_within = 0.0;  ///< share of defined z-scores with |z| <= 3
  std::size_t defined = 0;
  std::string table;
};

/// Abstract mode passes when at least 99% of defined z-scores satisfy
/// |z| <= 3. Mechanistic mode passes when every seed converged, no removed
/// object was presented again and the fitted alpha is positive; the z table
/// is reported alongside.
TheoryComparison compare_with_theory(const EnsembleReport& report);

struct OutputFiles {
  std::vector<std::filesystem::path> trajectories;
  std::filesystem::path ensemble;
  std::filesystem::path histogram;
  std::filesystem::path summary;
};

/// Writes trajectories/seed_<n>.csv, ensemble.csv, click_histogram.csv and summary.txt under `dir`.
OutputFiles emit_outputs(const EnsembleReport& report, const TheoryComparison& comparison,
                         const std::filesystem::path& dir);

}  // namespace evoindex
