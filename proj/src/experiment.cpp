#include "evoindex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "evoindex/engine.hpp"
#include "evoindex/ground_truth.hpp"
#include "evoindex/index_store.hpp"
#include "evoindex/user_sim.hpp"

namespace evoindex {

namespace {

// Independent stream per (seed, purpose); seed_seq's mixing is fixed by the standard.
Rng make_stream(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose};
  return Rng(seq);
}

enum StreamPurpose : std::uint32_t { kArrivals = 1, kTruth, kQueries, kEngine, kClicks, kExposure, kRemoval };

TrialResult run_abstract(const ExperimentConfig& config, std::uint64_t seed) {
  Rng exposure_rng = make_stream(seed, kExposure);
  Rng arrival_rng = make_stream(seed, kArrivals);
  const double alpha = *config.alpha;

  std::vector<double> exposure(config.s0);
  for (auto& e : exposure) e = exponential(exposure_rng, alpha);
  std::sort(exposure.begin(), exposure.end());

  TrialResult result;
  result.seed = seed;
  result.trajectory.s0 = config.s0;
  const auto times = config.sample_times();
  std::size_t next_sample = 0;
  std::size_t exposed = 0;
  double t = 0.0;
  while (true) {
    t += next_interarrival(arrival_rng, config.lambda);
    while (next_sample < times.size() && times[next_sample] < t) {
      result.trajectory.add(times[next_sample], config.s0 - exposed, exposed);
      ++next_sample;
    }
    if (t > config.horizon) break;
    ++result.arrivals;
    // The arrival registers every clock that has fired since the previous one.
    while (exposed < exposure.size() && exposure[exposed] <= t) ++exposed;
  }
  if (exposed > 0) result.click_histogram[1] = exposed;
  result.explored_indexes = exposed;
  return result;
}

TrialResult run_mechanistic(const ExperimentConfig& config, std::uint64_t seed) {
  Rng truth_rng = make_stream(seed, kTruth);
  Rng arrival_rng = make_stream(seed, kArrivals);
  Rng query_rng = make_stream(seed, kQueries);
  Rng engine_rng = make_stream(seed, kEngine);
  Rng click_rng = make_stream(seed, kClicks);
  Rng removal_rng = make_stream(seed, kRemoval);

  const GroundTruth truth =
      GroundTruth::random_bipartite(config.truth.terms, config.truth.objects, config.truth_degree(), truth_rng);
  const auto vocabulary_terms = truth.terms();

  IndexStore store(config.index);
  for (ObjectId object : truth.objects()) {
    std::vector<TermId> links;
    while (links.size() < config.init_links) {
      const TermId t = vocabulary_terms[uniform_index(truth_rng, vocabulary_terms.size())];
      if (std::find(links.begin(), links.end(), t) == links.end()) links.push_back(t);
    }
    store.init_minimal_index(object, links);
  }

  VocabularyState vocabulary(vocabulary_terms);
  QueryGenerator generator = config.generator;
  generator.warn_on_fallback = false;

  TrialResult result;
  result.seed = seed;
  result.trajectory.s0 = config.s0;
  std::unordered_map<std::uint64_t, std::uint64_t> clicks_per_index;
  std::unordered_set<ObjectId> removed;
  bool removal_done = config.deconstruct_count == 0;
  std::uint64_t clicks = 0;

  const auto times = config.sample_times();
  std::size_t next_sample = 0;
  double t = 0.0;
  while (true) {
    t += next_interarrival(arrival_rng, config.lambda);
    while (next_sample < times.size() && times[next_sample] < t) {
      result.trajectory.add(times[next_sample], store.count_unexplored(truth), clicks);
      ++next_sample;
    }
    if (t > config.horizon) break;

    if (!removal_done && t >= config.deconstruct_at) {
      const auto victims = sample_ob(removal_rng, store.object_list(), config.deconstruct_count);
      for (ObjectId o : victims) {
        store.deconstruct(o);
        removed.insert(o);
        result.deconstructed.push_back(o);
      }
      removal_done = true;
    }

    ++result.arrivals;
    const auto generated = generate_query(query_rng, generator, vocabulary);
    if (generated.query_case != generated.requested) ++result.case_fallbacks;
    const MQList presented = select_action(store, generated.query, config.engine, engine_rng);
    if (!removed.empty()) {
      for (const auto& e : presented.entries) {
        if (removed.contains(e.object)) ++result.deconstructed_presentations;
      }
    }
    const Feedback fb = simulate_click(presented, truth, generated.query, config.click_noise, click_rng);
    const RewardSignal reward = apply_feedback(store, generated.query, presented, fb, config.engine);
    clicks += fb.clicked.size();
    for (const auto& d : reward.deltas) {
      if (d.delta > 0.0) ++clicks_per_index[IndexKey{d.term, d.object}.packed()];
    }
  }

  for (const auto& tuple : store.tuples()) {
    if (store.classify(tuple.term, tuple.object) != IndexClass::Explored) continue;
    const auto it = clicks_per_index.find(IndexKey{tuple.term, tuple.object}.packed());
    ++result.click_histogram[it == clicks_per_index.end() ? 0 : it->second];
    ++result.explored_indexes;
  }
  return result;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  return config.mode == Mode::Abstract ? run_abstract(config, seed) : run_mechanistic(config, seed);
}

std::optional<double> detect_convergence(const Trajectory& trajectory, double proportion) {
  for (const auto& s : trajectory.samples) {
    if (s.p > proportion) return s.t;
  }
  return std::nullopt;
}

EnsembleReport aggregate(std::vector<TrialResult> trials, std::optional<double> theory_alpha, Mode mode) {
  if (trials.size() < 2) throw std::invalid_argument("an ensemble needs at least two trials");
  const Trajectory& first = trials.front().trajectory;
  for (const auto& trial : trials) {
    const Trajectory& tr = trial.trajectory;
    if (tr.s0 != first.s0 || tr.samples.size() != first.samples.size()) {
      throw std::invalid_argument("trajectories differ in length or s0; configurations do not match");
    }
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      if (tr.samples[i].t != first.samples[i].t) throw std::invalid_argument("trajectories use different sample grids");
    }
  }

  EnsembleReport report;
  report.mode = mode;
  report.s0 = first.s0;
  const double n = static_cast<double>(trials.size());
  std::vector<double> times, means;
  for (std::size_t i = 0; i < first.samples.size(); ++i) {
    double sum = 0.0;
    for (const auto& trial : trials) sum += static_cast<double>(trial.trajectory.samples[i].remaining);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& trial : trials) {
      const double d = static_cast<double>(trial.trajectory.samples[i].remaining) - mean;
      ss += d * d;
    }
    EnsembleRow row;
    row.t = first.samples[i].t;
    row.mean = mean;
    row.variance = ss / (n - 1.0);
    report.rows.push_back(row);
    times.push_back(row.t);
    means.push_back(mean);
  }

  try {
    report.alpha_hat = estimate_alpha(times, means, static_cast<double>(report.s0));
  } catch (const std::invalid_argument&) {
    report.alpha_hat = {std::nan(""), std::nan(""), 0};
  }
  report.theory_alpha = theory_alpha.value_or(report.alpha_hat.alpha);

  if (report.theory_alpha > 0.0) {
    const DeathModel model{report.s0, report.theory_alpha};
    for (auto& row : report.rows) {
      row.theory_mean = expected_remaining(model, row.t);
      row.theory_variance = variance_remaining(model, row.t);
      if (row.theory_variance > 0.0) row.z = (row.mean - row.theory_mean) / std::sqrt(row.theory_variance / n);
    }
  }

  for (const auto& trial : trials) {
    report.seeds.push_back(trial.seed);
    report.convergence_times.push_back(detect_convergence(trial.trajectory));
  }
  report.trials = std::move(trials);
  return report;
}

EnsembleReport run_monte_carlo(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  if (config.seeds.size() < 2) throw std::invalid_argument("a Monte Carlo run needs at least two seeds");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(config.seeds.size()));

  std::vector<TrialResult> trials(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      try {
        trials[i] = run_trial(config, config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::optional<double> theory_alpha =
      config.mode == Mode::Abstract ? config.alpha : std::optional<double>{};
  EnsembleReport report = aggregate(std::move(trials), theory_alpha, config.mode);
  report.gamma = config.engine.gamma;
  return report;
}

TheoryComparison compare_with_theory(const EnsembleReport& report) {
  if (report.rows.empty() || report.trials.empty()) throw std::invalid_argument("empty ensemble report");
  TheoryComparison cmp;
  std::size_t within = 0;
  std::ostringstream table;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%10s %14s %14s %16s %16s %9s\n", "t_days", "sim_mean", "theory_mean", "sim_var",
                "theory_var", "z");
  table << buf;
  for (const auto& row : report.rows) {
    if (row.z) {
      ++cmp.defined;
      if (std::abs(*row.z) <= 3.0) ++within;
      std::snprintf(buf, sizeof(buf), "%10.2f %14.2f %14.2f %16.2f %16.2f %9.3f\n", row.t, row.mean, row.theory_mean,
                    row.variance, row.theory_variance, *row.z);
    } else {
      std::snprintf(buf, sizeof(buf), "%10.2f %14.2f %14.2f %16.2f %16.2f %9s\n", row.t, row.mean, row.theory_mean,
                    row.variance, row.theory_variance, "-");
    }
    table << buf;
  }
  cmp.table = table.str();
  cmp.fraction_within = cmp.defined ? static_cast<double>(within) / static_cast<double>(cmp.defined) : 0.0;

  if (report.mode == Mode::Abstract) {
    cmp.pass = cmp.defined > 0 && cmp.fraction_within >= 0.99;
  } else {
    const bool all_converged = std::all_of(report.convergence_times.begin(), report.convergence_times.end(),
                                           [](const auto& t) { return t.has_value(); });
    const bool removal_clean = std::all_of(report.trials.begin(), report.trials.end(),
                                           [](const TrialResult& t) { return t.deconstructed_presentations == 0; });
    cmp.pass = all_converged && removal_clean && report.alpha_hat.alpha > 0.0;
  }
  return cmp;
}

OutputFiles emit_outputs(const EnsembleReport& report, const TheoryComparison& comparison,
                         const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  OutputFiles files;
  std::error_code ec;
  fs::create_directories(dir / "trajectories", ec);
  if (ec) throw std::runtime_error("cannot create " + (dir / "trajectories").string() + ": " + ec.message());

  auto open = [](const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
  };
  auto check = [](std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
  };

  for (const auto& trial : report.trials) {
    const fs::path path = dir / "trajectories" / ("seed_" + std::to_string(trial.seed) + ".csv");
    trial.trajectory.write_csv(path);
    files.trajectories.push_back(path);
  }

  char buf[256];
  files.ensemble = dir / "ensemble.csv";
  {
    auto out = open(files.ensemble);
    out << "t_days,mean,variance,theory_mean,theory_variance,z\n";
    for (const auto& row : report.rows) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,", row.t, row.mean, row.variance, row.theory_mean,
                    row.theory_variance);
      out << buf;
      if (row.z) {
        std::snprintf(buf, sizeof(buf), "%.6f", *row.z);
        out << buf;
      }
      out << '\n';
    }
    check(out, files.ensemble);
  }

  files.histogram = dir / "click_histogram.csv";
  {
    std::map<std::uint64_t, std::uint64_t> merged;
    for (const auto& trial : report.trials) {
      for (const auto& [clicks, count] : trial.click_histogram) merged[clicks] += count;
    }
    auto out = open(files.histogram);
    out << "clicks,indexes\n";
    for (const auto& [clicks, count] : merged) out << clicks << ',' << count << '\n';
    check(out, files.histogram);
  }

  files.summary = dir / "summary.txt";
  {
    auto out = open(files.summary);
    out << "mode: " << to_string(report.mode) << '\n';
    out << "s0: " << report.s0 << '\n';
    out << "seeds: " << report.seeds.size() << '\n';
    out << "gamma: " << report.gamma << '\n';
    std::snprintf(buf, sizeof(buf), "theory_alpha: %.6f\n", report.theory_alpha);
    out << buf;
    std::snprintf(buf, sizeof(buf), "alpha_hat: %.6f (se %.6f, %zu points)\n", report.alpha_hat.alpha,
                  report.alpha_hat.standard_error, report.alpha_hat.points);
    out << buf;
    std::snprintf(buf, sizeof(buf), "t90_theory: %.2f\n",
                  report.theory_alpha > 0.0 ? time_to_proportion(report.theory_alpha, 0.9) : std::nan(""));
    out << buf;
    out << "convergence (first sample with p > 0.9):\n";
    for (std::size_t i = 0; i < report.seeds.size(); ++i) {
      out << "  seed " << report.seeds[i] << ": ";
      if (report.convergence_times[i]) {
        std::snprintf(buf, sizeof(buf), "%.2f days", *report.convergence_times[i]);
        out << buf;
      } else {
        out << "not reached";
      }
      const auto& trial = report.trials[i];
      out << ", arrivals " << trial.arrivals << ", explored " << trial.explored_indexes;
      if (!trial.deconstructed.empty()) {
        out << ", deconstructed " << trial.deconstructed.size() << " (later presentations "
            << trial.deconstructed_presentations << ")";
      }
      out << '\n';
    }
    std::snprintf(buf, sizeof(buf), "z within 3: %zu of %zu (%.1f%%)\n",
                  static_cast<std::size_t>(std::lround(comparison.fraction_within * comparison.defined)),
                  comparison.defined, 100.0 * comparison.fraction_within);
    out << buf;
    out << "result: " << (comparison.pass ? "PASS" : "FAIL") << "\n\n";
    out << comparison.table;
    check(out, files.summary);
  }
  return files;
}

}  // namespace evoindex
