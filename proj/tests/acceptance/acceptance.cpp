// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qtunnel/analysis.hpp"
#include "qtunnel/eigensolver.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/evolve.hpp"
#include "qtunnel/oracle.hpp"

using namespace qtunnel;

namespace {

constexpr double kX = 10.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimulationConfig config(double xi, InitialState kind = InitialState::Ground) {
  SimulationConfig c;
  c.so = SOCoupling{xi};
  c.initial = kind;
  return validate(c);
}

// Sign change bisection on k cos(k a1) + kappa sin(k a1).
double bisect_level(double U0, double lo, double hi) {
  const auto f = [&](double k) { return k * std::cos(k) + std::sqrt(2.0 * U0 - k * k) * std::sin(k); };
  const bool neg = f(lo) < 0.0;
  while (hi - lo > 1e-15 * hi) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == neg) lo = mid;
    else hi = mid;
    if (mid == lo && mid == hi) break;
  }
  return 0.5 * (lo + hi);
}

Outcome bound_states() {
  Outcome o;
  const auto states = solve_bound_states(pre_quench(1.0, 16.0));
  o.require(states.size() == 2, fmt("%zu states", states.size()));
  if (states.size() == 2) {
    const double k0 = bisect_level(16.0, std::numbers::pi / 2.0, std::numbers::pi);
    const double k1 = bisect_level(16.0, 1.5 * std::numbers::pi, std::sqrt(32.0));
    o.require(std::abs(states[0].k - k0) < 1e-10 && std::abs(states[1].k - k1) < 1e-10,
              fmt("k0 = %.12f, k1 = %.12f vs bisection %.1e, %.1e", states[0].k, states[1].k,
                  std::abs(states[0].k - k0), std::abs(states[1].k - k1)));
  }
  const double deep = solve_bound_states(pre_quench(1.0, 1e6)).front().k;
  o.require(std::abs(deep - std::numbers::pi) < 1e-2, fmt("U0 = 1e6 k0 - pi = %.2e", deep - std::numbers::pi));
  return o;
}

Outcome parseval() {
  Outcome o;
  for (auto kind : {InitialState::Ground, InitialState::EqualMix}) {
    const Simulation sim(config(0.5, kind));
    const double p = sim.amplitudes().parseval();
    o.require(std::abs(p - 1.0) < 1e-6, fmt("%s |P - 1| = %.2e", kind == InitialState::Ground ? "ground" : "mix", std::abs(p - 1.0)));
  }
  return o;
}

Outcome conservation() {
  Outcome o;
  const Simulation sim(config(0.5));
  double lo = 0.0, hi = 0.0;
  for (double t : {0.0, 2.0, 5.0, 10.0, 20.0}) {
    const double s = integrated_spin_x(sim, t);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  o.require(hi - lo < 1e-6, fmt("int sigma_x drift %.2e", hi - lo));

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> xd(0.0, 40.0);
  std::vector<double> xs(100);
  std::vector<double> ts;
  for (int i = 0; i < 10; ++i) ts.push_back(0.5 + 2.0 * i);
  for (auto& x : xs) x = xd(rng);
  double worst = 0.0;
  int checked = 0;
  for (const auto& r : field_snapshot(sim, xs, ts)) {
    if (r.rho == 0.0) continue;
    worst = std::max(worst, std::abs(r.sx * r.sx + r.sy * r.sy + r.sz * r.sz - r.rho * r.rho) / (r.rho * r.rho));
    ++checked;
  }
  o.require(checked == 1000 && worst < 1e-10, fmt("pure-state identity max rel %.2e over %d samples", worst, checked));
  return o;
}

Outcome oracle(const PeakReport& peak, const Simulation& sim) {
  Outcome o;
  const OracleOptions options;
  std::vector<double> ts;
  for (int i = -5; i <= 5; ++i) ts.push_back(options.dt * std::round((peak.t_main + 0.4 * i) / options.dt));
  const OracleComparison c = compare_with_oracle(sim, kX, ts, options);
  o.require(c.fine_error < 1e-2, fmt("refined grid vs spectral max rel %.2e (coarse %.2e, extrapolated %.2e, order %.2f)",
                                     c.fine_error, c.coarse_error, c.max_relative_error, c.observed_order()));
  o.require(c.sign_mismatches == 0, fmt("%d sigma_y sign mismatches", c.sign_mismatches));
  return o;
}

Outcome diffraction(const PeakReport& r, double k0) {
  Outcome o;
  const double ballistic = kX / k0;
  o.require(std::abs(r.t_main - ballistic) <= 0.2 * ballistic,
            fmt("t_main = %.4f vs X/k0 = %.4f (%+.1f%%)", r.t_main, ballistic, 100.0 * (r.t_main / ballistic - 1.0)));
  o.require(r.post_peak_extrema >= 3, fmt("%d post-peak maxima", r.post_peak_extrema));
  return o;
}

Outcome precursor(const PeakReport& half, const PeakReport& one) {
  Outcome o;
  o.require(half.precursor_sign_opposite, "xi = 0.5 precursor sigma_y opposite to the peak");
  o.require(half.pre_peak_extrema > one.pre_peak_extrema,
            fmt("pre-peak maxima %d (xi = 0.5) vs %d (xi = 1)", half.pre_peak_extrema, one.pre_peak_extrema));
  return o;
}

Outcome tunneling() {
  Outcome o;
  const SimulationConfig base = config(0.5);
  const auto moment = tunneling_length(base, {}, LengthMethod::moment_limit());
  const auto ten = tunneling_length(base, {}, LengthMethod::finite_xi(10.0));
  const auto twenty = tunneling_length(base, {}, LengthMethod::finite_xi(20.0));
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  o.require(rel(ten.delta_x, moment.delta_x) < 0.02,
            fmt("moment %.5f vs xi=10 %.5f", moment.delta_x, ten.delta_x));
  o.require(rel(ten.delta_x, twenty.delta_x) < 0.01, fmt("xi=10 vs xi=20 %.5f", twenty.delta_x));
  o.require(moment.relative_spread() < 0.02, fmt("probe spread %.1f%%", 100.0 * moment.relative_spread()));

  const std::vector<double> widths{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  auto rows = transparency_scan(base, width_family(1.0, 16.0, widths));
  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) { return a.d < b.d; });
  bool up = true, down = true;
  std::string values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values += fmt(i ? " %.3f" : "%.3f", rows[i].delta_x);
    if (i == 0) continue;
    up = up && rows[i].delta_x >= rows[i - 1].delta_x;
    down = down && rows[i].delta_x <= rows[i - 1].delta_x;
  }
  o.require(up || down, "d-scan monotone {" + values + "}");
  const double tail = rel(rows.back().delta_x, rows[rows.size() - 2].delta_x);
  o.require(tail < 0.05, fmt("last two widths differ by %.1f%%", 100.0 * tail));
  return o;
}

Outcome weak_coupling() {
  Outcome o;
  std::vector<double> errors;
  for (double xi : {5.0, 10.0, 20.0}) {
    const Simulation sim(config(xi));
    double worst = 0.0;
    for (const auto& p : far_field_probes(sim.bound_states()[0].k)) {
      const auto exact = sim.observe(p.x, p.t);
      if (!exact.py) continue;
      worst = std::max(worst, std::abs(py_weak(sim, p.x, p.t).py - *exact.py));
    }
    errors.push_back(worst);
  }
  o.require(errors[1] < 1e-2, fmt("xi = 10 max error %.2e", errors[1]));
  o.require(errors[0] > errors[1] && errors[1] > errors[2],
            fmt("errors %.2e, %.2e, %.2e for xi = 5, 10, 20", errors[0], errors[1], errors[2]));
  return o;
}

Outcome short_time() {
  Outcome o;
  double lifetimes[2] = {};
  for (auto kind : {InitialState::Ground, InitialState::Excited, InitialState::EqualMix}) {
    const Simulation sim(config(0.5, kind));
    const double a2 = sim.config().derived.a2;
    // deepest sigma_y(a2) over the first two time units, required to be an interior minimum
    std::vector<double> sy;
    for (int i = 0; i <= 200; ++i) sy.push_back(sim.observe(a2, 0.01 * i).sy);
    const auto it = std::min_element(sy.begin(), sy.end());
    const double s_min = *it;
    const double t_min = 0.01 * static_cast<double>(it - sy.begin());
    const bool interior = it != sy.begin() && it + 1 != sy.end();
    const char* name = kind == InitialState::Ground ? "ground" : kind == InitialState::Excited ? "excited" : "mix";
    o.require(interior && s_min < 0.0, fmt("%s sigma_y(a2) minimum %.3g at t = %.2f", name, s_min, t_min));
    if (kind != InitialState::EqualMix) lifetimes[kind == InitialState::Excited] = lifetime(sim);
  }
  o.require(lifetimes[1] < lifetimes[0], fmt("lifetime excited %.3f < ground %.3f", lifetimes[1], lifetimes[0]));
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](const char* name, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), s);
    std::fflush(stdout);
  };

  report("bound-states", bound_states);
  report("parseval", parseval);
  report("conservation", conservation);

  const Simulation half(config(0.5));
  const Simulation one(config(1.0));
  PeakReport peak_half, peak_one;
  report("diffraction-in-time", [&] {
    peak_half = peak_report(half, kX);
    return diffraction(peak_half, half.bound_states()[0].k);
  });
  report("oracle-equivalence", [&] { return oracle(peak_half, half); });
  report("precursor", [&] {
    peak_one = peak_report(one, kX);
    return precursor(peak_half, peak_one);
  });
  report("tunneling-length", tunneling);
  report("weak-coupling", weak_coupling);
  report("short-time", short_time);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
