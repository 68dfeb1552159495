#include "qtunnel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "qtunnel/csv.hpp"
#include "qtunnel/eigensolver.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/parallel.hpp"

namespace qtunnel {

namespace {

using cplx = std::complex<double>;

constexpr double kNoPeakFloor = 1e-10;

double arrival_velocity(const Simulation& sim) { return sim.profile().dominant_wavenumber(); }

TunnelingLengthResult summarize(std::vector<ProbePoint> probes, std::vector<double> samples, LengthMethod method) {
  TunnelingLengthResult r;
  r.delta_x = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  r.spread = *hi - *lo;
  r.probes = std::move(probes);
  r.samples = std::move(samples);
  r.method = method;
  if (!(r.relative_spread() <= kSpreadLimit)) r.flags |= kUnreliable;
  return r;
}

}  // namespace

PrecessionBaseline classical_precession(double X, const SOCoupling& so) {
  if (so.is_uncoupled()) return {};
  const double angle = X / so.xi;
  return {angle, 0.0, -std::sin(angle), std::cos(angle)};
}

WeakCouplingEstimate py_weak(const SpinorSample& gauged, const SOCoupling& so) {
  if (gauged.frame != Frame::Gauged) throw Error(ErrorCode::InvalidValue, "py_weak expects a gauged sample");
  const double angle = 2.0 * so.half_angle(gauged.x);
  WeakCouplingEstimate out;
  if (gauged.down == 0.0) {
    out.py = -std::sin(angle);
    return out;
  }
  const cplx ratio = gauged.down / gauged.up;
  out.ratio = std::abs(ratio);
  out.py = -std::sin(angle) + 2.0 * std::cos(angle) * ratio.imag();
  if (!(out.ratio <= kWeakRatioLimit)) out.flags |= kRatioTooLarge;
  return out;
}

WeakCouplingEstimate py_weak(const Simulation& sim, double x, double t) {
  return py_weak(sim.gauged(x, t), sim.config().so);
}

std::vector<ProbePoint> far_field_probes(double velocity) {
  std::vector<ProbePoint> probes;
  for (double n : {8.0, 10.0, 12.0}) {
    const double x = n * std::numbers::pi;
    for (double f : {1.5, 2.0, 2.5}) probes.push_back({x, f * x / velocity});
  }
  return probes;
}

std::string to_string(const LengthMethod& method) {
  if (method.kind == LengthMethod::Kind::MomentLimit) return "moment_limit";
  return "finite_xi(" + format_double(method.xi) + ")";
}

TunnelingLengthResult tunneling_length(const Simulation& sim, std::span<const ProbePoint> probes) {
  const SOCoupling& so = sim.config().so;
  const LengthMethod method = so.is_uncoupled() ? LengthMethod::moment_limit() : LengthMethod::finite_xi(so.xi);
  std::vector<ProbePoint> points(probes.begin(), probes.end());
  if (points.empty()) points = far_field_probes(arrival_velocity(sim));

  std::vector<double> samples(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const double x = points[i].x;
    if (method.kind == LengthMethod::Kind::MomentLimit) {
      const auto v = sim.propagator().integrals(std::span(&x, 1), points[i].t, kChannelUpper | kChannelMoment);
      samples[i] = -2.0 * (v[0].moment / v[0].upper).real();
    } else {
      const SpinorSample g = sim.gauged(x, points[i].t);
      samples[i] = -2.0 * so.xi * (g.down / g.up).imag();
    }
  });
  return summarize(std::move(points), std::move(samples), method);
}

TunnelingLengthResult tunneling_length(const SimulationConfig& config, std::span<const ProbePoint> probes,
                                       LengthMethod method) {
  SimulationConfig c = config;
  c.so = method.kind == LengthMethod::Kind::MomentLimit ? SOCoupling::uncoupled() : SOCoupling{method.xi};
  c.validated = false;
  return tunneling_length(Simulation(c), probes);
}

double scan_transparency(const PotentialSpec& post) {
  const auto states = solve_bound_states(pre_quench(post.a1, post.U0));
  if (states.empty()) throw Error(ErrorCode::InvalidValue, "step potential has no bound state");
  return transmission(post, states.front().energy).transparency;
}

std::vector<PotentialSpec> width_family(double a1, double U0, std::span<const double> widths) {
  std::vector<PotentialSpec> out;
  for (double d : widths) out.push_back(post_quench(a1, d, U0));
  return out;
}

std::vector<PotentialSpec> height_family(double a1, double d, std::span<const double> heights) {
  std::vector<PotentialSpec> out;
  for (double U0 : heights) out.push_back(post_quench(a1, d, U0));
  return out;
}

std::vector<ScanRow> transparency_scan(const SimulationConfig& base, std::span<const PotentialSpec> barriers) {
  std::vector<ScanRow> rows(barriers.size());
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const PotentialSpec& b = barriers[i];
    SimulationConfig c = base;
    c.a1 = b.a1;
    c.d = b.width();
    c.U0 = b.U0;
    c.initial = InitialState::Ground;
    c.k_grid.k_max = std::max(c.k_grid.k_max, 3.0 * b.edge_wavenumber());
    const auto r = tunneling_length(c, {}, LengthMethod::moment_limit());
    rows[i] = {b.U0, b.width(), scan_transparency(b), r.delta_x, r.spread, r.flags};
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ScanRow& a, const ScanRow& b) { return a.transparency > b.transparency; });
  return rows;
}

FarFieldSeries far_field_series(const Simulation& sim, double X, std::span<const double> ts) {
  FarFieldSeries s;
  s.t.assign(ts.begin(), ts.end());
  s.rho.resize(ts.size());
  s.sy.resize(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    const ObservableRecord r = sim.observe(X, ts[i]);
    s.rho[i] = r.rho;
    s.sy[i] = r.sy;
  });
  return s;
}

PeakReport summarize_series(const FarFieldSeries& s, double X, const PeakOptions& options) {
  const std::size_t n = s.rho.size();
  if (n == 0 || s.t.size() != n || s.sy.size() != n)
    throw Error(ErrorCode::InvalidValue, "far-field series is empty or ragged");
  const std::size_t imax = static_cast<std::size_t>(std::max_element(s.rho.begin(), s.rho.end()) - s.rho.begin());
  if (s.rho[imax] < kNoPeakFloor) throw Error(ErrorCode::NoPeak, "density stays below 1e-10 at X = " + format_double(X));

  PeakReport r;
  r.X = X;
  r.t_main = s.t[imax];
  r.rho_main = s.rho[imax];
  r.window_lo = options.window_lo * r.t_main;
  r.window_hi = options.window_hi * r.t_main;
  const double floor = options.relative_threshold * r.rho_main;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(s.rho[i] > s.rho[i - 1] && s.rho[i] >= s.rho[i + 1]) || s.rho[i] <= floor) continue;
    if (i > imax) ++r.post_peak_extrema;
    if (s.t[i] >= r.window_lo && s.t[i] <= r.window_hi) ++r.pre_peak_extrema;
  }

  // Trapezoid average of sigma_y over the window.
  double area = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double lo = std::max(s.t[i - 1], r.window_lo), hi = std::min(s.t[i], r.window_hi);
    if (hi > lo) area += 0.5 * (s.sy[i - 1] + s.sy[i]) * (hi - lo);
  }
  const double main_sy = s.sy[imax];
  r.precursor_sign_opposite = area != 0.0 && main_sy != 0.0 && (area > 0.0) != (main_sy > 0.0);
  return r;
}

std::vector<double> peak_time_grid(const Simulation& sim, double X, const PeakOptions& options) {
  const double t_end = options.span * X / arrival_velocity(sim);
  const int n = static_cast<int>(std::floor(t_end / options.dt + 1e-9));
  std::vector<double> ts(n);
  for (int i = 0; i < n; ++i) ts[i] = (i + 1) * options.dt;
  return ts;
}

PeakReport peak_report(const Simulation& sim, double X, const FarFieldSeries& series, const PeakOptions& options) {
  PeakReport r = summarize_series(series, X, options);
  const auto it = std::find(series.t.begin(), series.t.end(), r.t_main);
  const std::size_t i = static_cast<std::size_t>(it - series.t.begin());
  double a = i > 0 ? series.t[i - 1] : 0.5 * series.t[i];
  double b = i + 1 < series.t.size() ? series.t[i + 1] : series.t[i];

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto rho = [&](double t) { return sim.observe(X, t).rho; };
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = rho(c), fd = rho(d);
  while (b - a > options.refine_tolerance) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = rho(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = rho(d);
    }
  }
  const double t_star = 0.5 * (a + b);
  const double f_star = rho(t_star);
  if (f_star > r.rho_main) {
    r.t_main = t_star;
    r.rho_main = f_star;
  }
  return r;
}

PeakReport peak_report(const Simulation& sim, double X, const PeakOptions& options) {
  const auto ts = peak_time_grid(sim, X, options);
  return peak_report(sim, X, far_field_series(sim, X, ts), options);
}

double delta_t(const TunnelingLengthResult& result, double velocity) {
  if (!(velocity > 0.0)) throw Error(ErrorCode::InvalidValue, "velocity must be positive");
  return result.delta_x / velocity;
}

DelayComparison compare_delays(const Simulation& sim, const TunnelingLengthResult& result) {
  const BoundState& ground = sim.bound_states().front();
  return {delta_t(result, ground.k), group_delay(sim.config().post(), ground.energy), ground.energy};
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows) {
  out << "U0,d,transparency,delta_x,spread,flags\n";
  for (const auto& r : rows) {
    out << format_double(r.U0) << ',' << format_double(r.d) << ',' << format_double(r.transparency) << ','
        << format_double(r.delta_x) << ',' << format_double(r.spread) << ',' << flag_tokens(r.flags) << '\n';
  }
}

void write_peaks_csv(std::ostream& out, std::span<const PeakReport> reports) {
  out << "X,t_main,n_post,precursor_opposite\n";
  for (const auto& r : reports) {
    out << format_double(r.X) << ',' << format_double(r.t_main) << ',' << r.post_peak_extrema << ','
        << (r.precursor_sign_opposite ? "true" : "false") << '\n';
  }
}

}  // namespace qtunnel
