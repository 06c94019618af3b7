#include "evoindex/death_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace evoindex {

namespace {

void check_time(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
}

}  // namespace

void DeathModel::validate() const {
  if (s0 < 1) throw std::invalid_argument("s0 must be at least 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

double expected_remaining(const DeathModel& model, double t) {
  model.validate();
  check_time(t);
  return static_cast<double>(model.s0) * std::exp(-model.alpha * t);
}

double variance_remaining(const DeathModel& model, double t) {
  model.validate();
  check_time(t);
  const double survive = std::exp(-model.alpha * t);
  // 1 - e^{-x} via expm1 keeps precision near t = 0
  return static_cast<double>(model.s0) * survive * -std::expm1(-model.alpha * t);
}

double exposure_proportion(double alpha, double ts) {
  check_time(ts);
  return -std::expm1(-alpha * ts);
}

double time_to_proportion(double alpha, double p) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("proportion must lie in [0, 1)");
  return -std::log1p(-p) / alpha;
}

void Trajectory::add(double t, std::uint64_t remaining, std::uint64_t clicks) {
  if (!samples.empty() && !(t > samples.back().t)) throw std::invalid_argument("trajectory times must increase");
  const double p = s0 == 0 ? 0.0 : static_cast<double>(s0 - std::min(remaining, s0)) / static_cast<double>(s0);
  samples.push_back({t, remaining, p, clicks});
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "t_days,remaining,p,clicks\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.6f,%llu,%.6f,%llu\n", s.t, static_cast<unsigned long long>(s.remaining), s.p,
                  static_cast<unsigned long long>(s.clicks));
    out << buf;
  }
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Trajectory pure_death_oracle(const DeathModel& model, double horizon, std::span<const double> sample_times, Rng& rng) {
  model.validate();
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0 || sample_times[i] > horizon) throw std::invalid_argument("sample time outside horizon");
    if (i > 0 && !(sample_times[i] > sample_times[i - 1])) throw std::invalid_argument("sample times must increase");
  }
  std::vector<double> exposure(model.s0);
  for (auto& e : exposure) e = exponential(rng, model.alpha);
  std::sort(exposure.begin(), exposure.end());

  Trajectory traj;
  traj.s0 = model.s0;
  for (double t : sample_times) {
    const auto exposed = static_cast<std::uint64_t>(std::upper_bound(exposure.begin(), exposure.end(), t) -
                                                    exposure.begin());
    traj.add(t, model.s0 - exposed, exposed);
  }
  return traj;
}

AlphaEstimate estimate_alpha(std::span<const double> t, std::span<const double> remaining, double s0) {
  if (t.size() != remaining.size()) throw std::invalid_argument("time and count series differ in length");
  if (!(s0 > 0.0)) throw std::invalid_argument("s0 must be positive");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (remaining[i] <= 0.0) continue;
    x.push_back(t[i]);
    y.push_back(std::log(remaining[i] / s0));
  }
  if (x.size() < 2) throw std::invalid_argument("need at least two samples with remaining > 0");

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("sample times must not all coincide");
  const double slope = sxy / sxx;

  AlphaEstimate est;
  est.alpha = -slope;
  est.points = x.size();
  if (x.size() > 2) {
    const double intercept = my - slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (intercept + slope * x[i]);
      ss += r * r;
    }
    est.standard_error = std::sqrt(ss / (n - 2.0) / sxx);
  } else {
    est.standard_error = std::numeric_limits<double>::quiet_NaN();
  }
  return est;
}

AlphaEstimate estimate_alpha(const Trajectory& trajectory) {
  std::vector<double> t, r;
  for (const auto& s : trajectory.samples) {
    t.push_back(s.t);
    r.push_back(static_cast<double>(s.remaining));
  }
  return estimate_alpha(t, r, static_cast<double>(trajectory.s0));
}

}  // namespace evoindex
