// evoindex: experiment runner, closed-form oracle table and live gateway.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "evoindex/config.hpp"
#include "evoindex/death_model.hpp"
#include "evoindex/experiment.hpp"
#include "evoindex/gateway.hpp"

namespace fs = std::filesystem;
using namespace evoindex;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int cmd_simulate(const std::string& config_path, const std::string& seeds, const std::string& out_dir,
                 unsigned threads) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (!seeds.empty()) config.seeds = parse_seed_list(seeds);
    config.validate();
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "--seeds: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const EnsembleReport report = run_monte_carlo(config, threads);
    const TheoryComparison cmp = compare_with_theory(report);
    const OutputFiles files = emit_outputs(report, cmp, out_dir);
    std::cout << cmp.table;
    std::printf("alpha_hat %.6f (se %.6f); theory alpha %.6f\n", report.alpha_hat.alpha,
                report.alpha_hat.standard_error, report.theory_alpha);
    std::printf("z within 3 sigma: %.1f%% of %zu sample times\n", 100.0 * cmp.fraction_within, cmp.defined);
    std::cout << "outputs: " << files.summary.parent_path().string() << '\n';
    std::cout << (cmp.pass ? "PASS" : "FAIL") << '\n';
    return cmp.pass ? 0 : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kExitFail;
  }
}

int cmd_oracle(const std::string& alpha_text, long long s0, double horizon) {
  double alpha = 0.0;
  try {
    alpha = parse_real(alpha_text);
  } catch (const std::invalid_argument& e) {
    std::cerr << "--alpha: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!(alpha > 0.0) || s0 <= 0 || !(horizon > 0.0)) {
    std::cerr << "oracle: --alpha, --s0 and --horizon must all be positive\n";
    return kExitUsage;
  }
  const DeathModel model{static_cast<std::uint64_t>(s0), alpha};
  std::printf("%8s %16s %16s %10s\n", "t_days", "E[S_t]", "V(S_t)", "p");
  for (long day = 0; day <= static_cast<long>(horizon); ++day) {
    const double t = static_cast<double>(day);
    std::printf("%8ld %16.3f %16.3f %10.6f\n", day, expected_remaining(model, t), variance_remaining(model, t),
                exposure_proportion(alpha, t));
  }
  std::printf("t90 %.2f\n", time_to_proportion(alpha, 0.9));
  return 0;
}

HttpFrontend* g_frontend = nullptr;

void on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& snapshot, std::size_t objects,
              const std::string& truth_path, std::uint64_t seed, std::size_t m, const std::string& beta,
              const std::string& ordering) {
  GatewayOptions options;
  options.seed = seed;
  try {
    options.engine.m = m;
    options.engine.beta_policy = BetaPolicy::parse(beta);
    options.engine.ordering = parse_ordering(ordering);
    options.engine.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "serve: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    IndexStore store;
    TermDictionary dictionary;
    if (!snapshot.empty() && fs::exists(snapshot)) {
      store = IndexStore::load(fs::path(snapshot));
      if (fs::exists(snapshot + ".terms")) dictionary = TermDictionary::load(snapshot + ".terms");
      std::cerr << "loaded " << store.tuple_count() << " tuples from " << snapshot << '\n';
    } else {
      // Each object starts searchable through one label term of its own.
      for (std::size_t i = 0; i < objects; ++i) {
        const TermId label = dictionary.intern("object-" + std::to_string(i));
        store.init_minimal_index(ObjectId{static_cast<std::uint32_t>(i)}, std::span(&label, 1));
      }
    }
    if (!snapshot.empty()) options.snapshot_path = snapshot;
    std::optional<GroundTruth> truth;
    if (!truth_path.empty()) truth = GroundTruth::load(fs::path(truth_path));

    Gateway gateway(std::move(store), options, std::move(dictionary), std::move(truth));
    HttpFrontend frontend(gateway);
    const int bound = frontend.bind(host, port);
    if (bound < 0) {
      std::cerr << "serve: cannot bind " << host << ':' << port << '\n';
      return kExitFail;
    }
    std::cerr << "listening on http://" << host << ':' << bound << '\n';
    g_frontend = &frontend;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    frontend.listen();
    g_frontend = nullptr;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "serve: " << e.what() << '\n';
    return kExitFail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-learning dynamic index: simulation, closed-form oracle and live gateway"};
  app.require_subcommand(1);

  std::string config_path, seeds, out_dir = "evoindex_out";
  unsigned threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a seeded Monte Carlo experiment from a config file");
  simulate->add_option("config", config_path, "Experiment config file")->required();
  simulate->add_option("--seeds", seeds, "Seed list overriding the config, e.g. 1,2,3 or 1-20");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string alpha;
  long long s0 = 0;
  double horizon = 0.0;
  auto* oracle = app.add_subcommand("oracle", "Print the closed-form mean/variance/exposure table");
  oracle->add_option("--alpha", alpha, "Index discovery rate per day, e.g. 0.05 or 1/20")->required();
  oracle->add_option("--s0", s0, "Initial unexplored indexes")->required();
  oracle->add_option("--horizon", horizon, "Days to tabulate")->required();

  std::string host = "127.0.0.1", snapshot, truth_path, beta = "0.8", ordering = "non_random";
  int port = 8080;
  std::size_t objects = 50, m = 10;
  std::uint64_t seed = 1;
  auto* serve = app.add_subcommand("serve", "Serve the JSON gateway");
  serve->add_option("--port", port, "TCP port (0 = any free port)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--snapshot", snapshot, "Snapshot file to load at start and write on /snapshot");
  serve->add_option("--objects", objects, "Objects in a fresh index");
  serve->add_option("--truth", truth_path, "Truth graph (term_id,object_id lines) for the p estimate");
  serve->add_option("--seed", seed, "Seed of the engine's random stream");
  serve->add_option("--m", m, "List length M");
  serve->add_option("--beta", beta, "Exploit fraction or \"uniform\"");
  serve->add_option("--ordering", ordering, "completely_random | sectionally_random | partially_random | non_random");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*simulate) return cmd_simulate(config_path, seeds, out_dir, threads);
  if (*oracle) return cmd_oracle(alpha, s0, horizon);
  return cmd_serve(host, port, snapshot, objects, truth_path, seed, m, beta, ordering);
}
