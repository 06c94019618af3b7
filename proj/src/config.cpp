#include "evoindex/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <utility>

namespace evoindex {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::uint64_t parse_count(std::string_view text) {
  auto v = parse_number<std::uint64_t>(text);
  if (!v) throw std::invalid_argument("expected a non-negative integer, got '" + std::string(text) + "'");
  return *v;
}

}  // namespace

std::string_view to_string(Mode m) noexcept { return m == Mode::Abstract ? "abstract" : "mechanistic"; }

ConfigError::ConfigError(std::string message, std::size_t line, std::string key)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line),
      key_(std::move(key)) {}

double parse_real(std::string_view text) {
  text = trim(text);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = parse_number<double>(text.substr(0, slash));
    auto den = parse_number<double>(text.substr(slash + 1));
    if (num && den && *den != 0.0) return *num / *den;
  } else if (auto v = parse_number<double>(text)) {
    return *v;
  }
  throw std::invalid_argument("expected a real number, got '" + std::string(text) + "'");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (auto part : split(text, ',')) {
    if (part.empty()) throw std::invalid_argument("empty entry in seed list");
    if (auto dash = part.find('-'); dash != std::string_view::npos) {
      const auto lo = parse_count(part.substr(0, dash));
      const auto hi = parse_count(part.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("descending seed range '" + std::string(part) + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_count(part));
    }
  }
  return seeds;
}

std::size_t ExperimentConfig::truth_degree() const {
  if (truth.degree) return *truth.degree;
  return truth.objects == 0 ? 0 : static_cast<std::size_t>(s0 / truth.objects);
}

std::vector<double> ExperimentConfig::sample_times() const {
  std::vector<double> times;
  const auto count = static_cast<std::size_t>(std::floor(horizon / sample_interval + 1e-9));
  for (std::size_t k = 1; k <= count; ++k) times.push_back(static_cast<double>(k) * sample_interval);
  return times;
}

void ExperimentConfig::validate() const {
  if (s0 < 1) throw ConfigError("s0 must be at least 1", 0, "s0");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive", 0, "lambda");
  if (!(sample_interval > 0.0)) throw ConfigError("sample_interval must be positive", 0, "sample_interval");
  if (!(horizon >= sample_interval)) throw ConfigError("horizon must be at least sample_interval", 0, "horizon");
  if (seeds.empty()) throw ConfigError("at least one seed is required", 0, "seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct", 0, "seeds");
  }
  if (mode == Mode::Abstract) {
    if (!alpha) throw ConfigError("abstract mode requires alpha", 0, "alpha");
    if (!(*alpha > 0.0)) throw ConfigError("alpha must be positive", 0, "alpha");
    return;
  }
  if (alpha) throw ConfigError("mechanistic mode measures alpha; remove the alpha key", 0, "alpha");
  try {
    engine.validate();
    index.validate();
    generator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(click_noise >= 0.0 && click_noise <= 1.0)) throw ConfigError("click_noise must lie in [0,1]", 0, "click_noise");
  if (truth.terms == 0 || truth.objects == 0) throw ConfigError("truth graph needs terms and objects", 0, "truth.objects");
  const std::size_t degree = truth_degree();
  if (degree == 0 || degree > truth.terms) throw ConfigError("truth degree must lie in [1, truth.terms]", 0, "truth.degree");
  if (truth.objects * degree != s0) {
    throw ConfigError("s0 must equal truth.objects * truth.degree (" + std::to_string(truth.objects) + " * " +
                          std::to_string(degree) + ")",
                      0, "s0");
  }
  if (init_links < 1 || init_links > truth.terms) throw ConfigError("init_links must lie in [1, truth.terms]", 0, "init_links");
  if (deconstruct_count >= truth.objects) {
    throw ConfigError("deconstruct.count must be below truth.objects", 0, "deconstruct.count");
  }
  if (deconstruct_count > 0 && !(deconstruct_at >= 0.0 && deconstruct_at < horizon)) {
    throw ConfigError("deconstruct.at must lie inside the horizon", 0, "deconstruct.at");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  using Setter = std::function<void(std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"mode",
       [&](std::string_view v) {
         if (v == "abstract") cfg.mode = Mode::Abstract;
         else if (v == "mechanistic") cfg.mode = Mode::Mechanistic;
         else throw std::invalid_argument("mode must be abstract or mechanistic");
       }},
      {"s0", [&](std::string_view v) { cfg.s0 = parse_count(v); }},
      {"alpha", [&](std::string_view v) { cfg.alpha = parse_real(v); }},
      {"lambda", [&](std::string_view v) { cfg.lambda = parse_real(v); }},
      {"horizon", [&](std::string_view v) { cfg.horizon = parse_real(v); }},
      {"sample_interval", [&](std::string_view v) { cfg.sample_interval = parse_real(v); }},
      {"seeds", [&](std::string_view v) { cfg.seeds = parse_seed_list(v); }},
      {"m", [&](std::string_view v) { cfg.engine.m = parse_count(v); }},
      {"beta", [&](std::string_view v) { cfg.engine.beta_policy = BetaPolicy::parse(v); }},
      {"ordering", [&](std::string_view v) { cfg.engine.ordering = parse_ordering(v); }},
      {"weight", [&](std::string_view v) { cfg.engine.weight = parse_real(v); }},
      {"penalty_scale", [&](std::string_view v) { cfg.engine.penalty_scale = parse_real(v); }},
      {"gamma", [&](std::string_view v) { cfg.engine.gamma = parse_real(v); }},
      {"threshold", [&](std::string_view v) { cfg.index.threshold = parse_real(v); }},
      {"relevance_base", [&](std::string_view v) { cfg.index.relevance_base = parse_real(v); }},
      {"r_init", [&](std::string_view v) { cfg.index.r_init = parse_real(v); }},
      {"case_mix",
       [&](std::string_view v) {
         auto parts = split(v, ',');
         if (parts.size() != 3) throw std::invalid_argument("case_mix needs three probabilities: new,existing,hybrid");
         for (std::size_t i = 0; i < 3; ++i) cfg.generator.case_mix[i] = parse_real(parts[i]);
       }},
      {"terms_per_query",
       [&](std::string_view v) {
         auto parts = split(v, '-');
         if (parts.size() == 1) parts.push_back(parts[0]);
         if (parts.size() != 2) throw std::invalid_argument("terms_per_query must be N or A-B");
         cfg.generator.min_terms = parse_count(parts[0]);
         cfg.generator.max_terms = parse_count(parts[1]);
       }},
      {"truth.terms", [&](std::string_view v) { cfg.truth.terms = parse_count(v); }},
      {"truth.objects", [&](std::string_view v) { cfg.truth.objects = parse_count(v); }},
      {"truth.degree", [&](std::string_view v) { cfg.truth.degree = parse_count(v); }},
      {"click_noise", [&](std::string_view v) { cfg.click_noise = parse_real(v); }},
      {"init_links", [&](std::string_view v) { cfg.init_links = parse_count(v); }},
      {"deconstruct.count", [&](std::string_view v) { cfg.deconstruct_count = parse_count(v); }},
      {"deconstruct.at", [&](std::string_view v) { cfg.deconstruct_at = parse_real(v); }},
  };

  std::map<std::string, std::size_t, std::less<>> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    auto setter = setters.find(key);
    if (setter == setters.end()) throw ConfigError("unknown key '" + key + "'", line_no, key);
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")", line_no,
                        key);
    }
    if (value.empty()) throw ConfigError("key '" + key + "' has no value", line_no, key);
    try {
      setter->second(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what(), line_no, key);
    }
  }

  for (const char* key : {"mode", "s0", "lambda", "horizon", "seeds"}) {
    if (!seen.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'", 0, key);
  }
  if (cfg.mode == Mode::Abstract && !seen.contains("alpha")) {
    throw ConfigError("missing required key 'alpha' (abstract mode)", 0, "alpha");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

}  // namespace evoindex
