#include "qtunnel/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/parallel.hpp"
#include "quadrature.hpp"

namespace qtunnel {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// Composite Gauss grid on [lo, hi] with `panels` 16-point panels.
void append_gauss(std::vector<double>& xs, std::vector<double>& ws, double lo, double hi, int panels) {
  const auto& rule = detail::gauss_rule<16>();
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    for (std::size_t n = 0; n < 16; ++n) {
      xs.push_back(mid + 0.5 * width * rule.x[n]);
      ws.push_back(0.5 * width * rule.w[n]);
    }
  }
}

}  // namespace

SpectralPropagator::SpectralPropagator(std::shared_ptr<const SpectralAmplitudes> amplitudes,
                                       EvolveOptions options)
    : amplitudes_(std::move(amplitudes)), options_(options) {}

double SpectralPropagator::cutoff(double x_far, double t) const {
  const double k_max = std::min(options_.k_limit, amplitudes_->k_end());
  if (t <= 0.0) return k_max;
  for (const auto& p : amplitudes_->panels()) {
    if (p.lo >= k_max) break;
    const double lever = p.lo * t - x_far - 1.0;
    if (lever <= 0.0) continue;
    const double bound = 2.0 * amplitudes_->envelope_beyond(p.lo) / lever;
    if (bound <= options_.tail_tolerance) return p.lo;
  }
  return k_max;
}

std::vector<SpectralPropagator::Node> SpectralPropagator::build_nodes(double x_far, double t) const {
  const auto& g8 = detail::gauss_rule<8>();
  const auto& g16 = detail::gauss_rule<16>();
  const double k_cut = cutoff(x_far, t);
  const auto panels = amplitudes_->panels();
  const double mult = options_.node_multiplier;

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double lo = panels[i].lo;
    if (lo >= k_cut) break;
    const double hi = std::min(panels[i].hi, k_cut);
    const double phase = (hi * hi - lo * lo) * t / 2.0 + x_far * (hi - lo);
    const double wanted = mult * std::max(8.0, phase * options_.nodes_per_2pi / (2.0 * std::numbers::pi));
    if (wanted <= 8.0) {
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t n = 0; n < 8; ++n) nodes.push_back({mid + half * g8.x[n], half * g8.w[n], i});
      continue;
    }
    const int m = static_cast<int>(std::ceil(wanted / 16.0));
    const double width = (hi - lo) / m;
    for (int s = 0; s < m; ++s) {
      const double mid = lo + (s + 0.5) * width;
      for (std::size_t n = 0; n < 16; ++n)
        nodes.push_back({mid + 0.5 * width * g16.x[n], 0.5 * width * g16.w[n], i});
    }
    if (nodes.size() > options_.node_cap) {
      throw Error(ErrorCode::PhaseUnresolved,
                  "node budget exceeded at t = " + format_double(t) + ", x = " + format_double(x_far));
    }
  }
  return nodes;
}

std::size_t SpectralPropagator::node_count(double x_far, double t) const {
  return build_nodes(x_far, t).size();
}

std::vector<SpectralPropagator::Integrals> SpectralPropagator::integrals(std::span<const double> xs,
                                                                         double t,
                                                                         unsigned channels) const {
  if (t < 0.0) throw Error(ErrorCode::InvalidValue, "evolution time must be non-negative");
  double x_far = 0.0;
  for (double x : xs) x_far = std::max(x_far, x);
  const auto nodes = build_nodes(x_far, t);
  const PotentialSpec& post = amplitudes_->potential();
  const bool want_upper = channels & kChannelUpper;
  const bool want_lower = channels & kChannelLower;
  const bool want_moment = channels & kChannelMoment;

  std::vector<Integrals> acc(xs.size());
  for (const Node& node : nodes) {
    const ContinuumState state = solve_continuum(post, node.k);
    const Coefficients c = amplitudes_->interpolate(node.panel, node.k);
    const cplx phase = node.weight * std::polar(1.0, -0.5 * node.k * node.k * t);
    const cplx a_up = want_upper ? phase * c.g1 : 0.0;
    const cplx a_lo = want_lower ? phase * c.gm1_over_i : 0.0;
    const cplx a_m = want_moment ? phase * c.moment : 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double phi = state(xs[j]);
      acc[j].upper += a_up * phi;
      acc[j].lower += a_lo * phi;
      acc[j].moment += a_m * phi;
    }
  }
  return acc;
}

std::vector<SpinorSample> SpectralPropagator::evolve_gauged(std::span<const double> xs, double t) const {
  const auto values = integrals(xs, t);
  std::vector<SpinorSample> out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j)
    out[j] = {xs[j], t, Frame::Gauged, values[j].upper, kI * values[j].lower};
  return out;
}

SpinorSample SpectralPropagator::evolve_gauged(double x, double t) const {
  return evolve_gauged(std::span<const double>(&x, 1), t).front();
}

SpinorSample to_lab(const SpinorSample& g, const SOCoupling& so) {
  if (g.frame != Frame::Gauged) throw Error(ErrorCode::InvalidValue, "to_lab expects a gauged sample");
  const double half = so.half_angle(g.x);
  const double c = std::cos(half), s = std::sin(half);
  return {g.x, g.t, Frame::Lab, c * g.up - kI * s * g.down, -kI * s * g.up + c * g.down};
}

ObservableRecord observables(const SpinorSample& lab) {
  if (lab.frame != Frame::Lab) throw Error(ErrorCode::InvalidValue, "observables expect a lab-frame sample");
  ObservableRecord r;
  r.x = lab.x;
  r.t = lab.t;
  const double up2 = std::norm(lab.up), down2 = std::norm(lab.down);
  const cplx cross = std::conj(lab.up) * lab.down;
  r.rho = up2 + down2;
  r.sx = 2.0 * cross.real();
  r.sy = 2.0 * cross.imag();
  r.sz = up2 - down2;
  if (r.rho < kDensityFloor) {
    r.flags |= kDensityUnderflow;
  } else {
    r.py = r.sy / r.rho;
  }
  return r;
}

Simulation::Simulation(const SimulationConfig& config, EvolveOptions options)
    : config_(config.validated ? config : validate(config)),
      bound_(solve_bound_states(config_.pre())),
      profile_(InitialProfile::select(config_.initial, bound_)),
      amplitudes_(std::make_shared<const SpectralAmplitudes>(compute_coefficients(
          profile_, config_.so, config_.post(), KGridPolicy::from(config_.k_grid)))),
      propagator_(amplitudes_, options) {}

SpinorSample Simulation::gauged(double x, double t) const { return propagator_.evolve_gauged(x, t); }

std::vector<SpinorSample> Simulation::gauged(std::span<const double> xs, double t) const {
  return propagator_.evolve_gauged(xs, t);
}

ObservableRecord Simulation::observe(double x, double t) const {
  return observables(to_lab(gauged(x, t), config_.so));
}

std::vector<ObservableRecord> Simulation::observe(std::span<const double> xs, double t) const {
  const auto samples = gauged(xs, t);
  std::vector<ObservableRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(observables(to_lab(s, config_.so)));
  return out;
}

WellQuadrature well_quadrature(double a1) {
  WellQuadrature q;
  append_gauss(q.x, q.w, 0.0, a1, 4);
  return q;
}

WellPolarization well_polarization(std::span<const ObservableRecord> records, const WellQuadrature& q) {
  if (records.size() != q.x.size()) throw Error(ErrorCode::InvalidValue, "records do not match the well quadrature");
  WellPolarization out;
  for (std::size_t j = 0; j < records.size(); ++j) {
    out.survival += q.w[j] * records[j].rho;
    out.spin_y += q.w[j] * records[j].sy;
  }
  if (out.survival < kDensityFloor) {
    out.flags |= kDensityUnderflow;
  } else {
    out.py = out.spin_y / out.survival;
  }
  return out;
}

WellPolarization well_polarization(const Simulation& sim, double t) {
  const WellQuadrature q = well_quadrature(sim.config().a1);
  return well_polarization(sim.observe(q.x, t), q);
}

double survival(const Simulation& sim, double t) { return well_polarization(sim, t).survival; }

double lifetime(const Simulation& sim, double t_limit) {
  const double target = survival(sim, 0.0) / std::numbers::e;
  const double step = 0.5;
  double lo = 0.0;
  double hi = -1.0;
  for (double t = step; t <= t_limit; t += step) {
    if (survival(sim, t) <= target) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) throw Error(ErrorCode::InvalidValue, "survival stays above 1/e up to t_limit");
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (survival(sim, mid) <= target ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<ObservableRecord> field_snapshot(const Simulation& sim, std::span<const double> xs,
                                             std::span<const double> ts) {
  std::vector<std::vector<ObservableRecord>> rows(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) { rows[i] = sim.observe(xs, ts[i]); });
  std::vector<ObservableRecord> out;
  out.reserve(ts.size() * xs.size());
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

double integrated_spin_x(const Simulation& sim, double t) {
  const double k_cut = sim.config().k_grid.k_max;
  EvolveOptions options = sim.propagator().options();
  options.k_limit = k_cut;
  const SpectralPropagator propagator = sim.propagator().with_options(options);

  // The sharp spectral cut leaves an algebraic tail ahead of x = k_cut t.
  const double a1 = sim.config().a1, a2 = a1 + sim.config().d;
  const double x_end = a2 + 1.25 * k_cut * t + 20.0;
  std::vector<double> xs, ws;
  append_gauss(xs, ws, 0.0, a1, 4);
  append_gauss(xs, ws, a1, a2, 2);
  const double width = 4.0 * std::numbers::pi / k_cut;
  append_gauss(xs, ws, a2, x_end, static_cast<int>(std::ceil((x_end - a2) / width)));

  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (xs.size() + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t b = c * kChunk, e = std::min(xs.size(), b + kChunk);
    const auto values = propagator.integrals(std::span(xs).subspan(b, e - b), t);
    double s = 0.0;
    for (std::size_t j = b; j < e; ++j) {
      const cplx up = values[j - b].upper, down = kI * values[j - b].lower;
      s += ws[j] * 2.0 * std::real(std::conj(up) * down);
    }
    partial[c] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void write_observables_csv(std::ostream& out, std::span<const ObservableRecord> records) {
  out << "x,t,rho,sx,sy,sz,py,flags\n";
  for (const auto& r : records) {
    out << format_double(r.x) << ',' << format_double(r.t) << ',' << format_double(r.rho) << ','
        << format_double(r.sx) << ',' << format_double(r.sy) << ',' << format_double(r.sz) << ','
        << format_optional(r.py) << ',' << flag_tokens(r.flags) << '\n';
  }
}

}  // namespace qtunnel
