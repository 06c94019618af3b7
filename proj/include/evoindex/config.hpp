#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evoindex/engine.hpp"
#include "evoindex/index_store.hpp"
#include "evoindex/user_sim.hpp"

namespace evoindex {

enum class Mode { Abstract, Mechanistic };

std::string_view to_string(Mode m) noexcept;

struct TruthConfig {
  std::size_t terms = 10'000;
  std::size_t objects = 100;
  std::optional<std::size_t> degree;  ///< derived as s0 / objects when absent
};

struct ExperimentConfig {
  Mode mode = Mode::Abstract;
  std::uint64_t s0 = 0;
  std::optional<double> alpha;  ///< abstract mode only
  double lambda = 0.0;          ///< arrivals per day
  double horizon = 0.0;         ///< days
  double sample_interval = 5.0;
  std::vector<std::uint64_t> seeds;

  EngineConfig engine;
  IndexParams index;
  QueryGenerator generator;
  TruthConfig truth;
  double click_noise = 0.0;
  std::size_t init_links = 1;  ///< random minimal-index links per object at start

  std::size_t deconstruct_count = 0;  ///< objects removed during the run
  double deconstruct_at = 0.0;        ///< day of removal

  /// Truth degree: the explicit one or s0 / objects.
  std::size_t truth_degree() const;

  /// Sample grid k * sample_interval, k = 1 .. floor(horizon / interval).
  std::vector<double> sample_times() const;

  /// Throws ConfigError (line 0) on inconsistent settings.
  void validate() const;
};

/// A configuration problem; line is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string message, std::size_t line = 0, std::string key = {});
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

/// Parses "key = value" lines; '#' starts a comment. See configs/ for the
/// documented key set.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "1,2,3" or "1-20" or a mix such as "1-5,9".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// A real, also accepting a fraction such as "1/15".
double parse_real(std::string_view text);

}  // namespace evoindex
