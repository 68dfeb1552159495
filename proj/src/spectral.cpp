#include "qtunnel/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include "overlap.hpp"
#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"
#include "quadrature.hpp"

namespace qtunnel {

InitialProfile InitialProfile::select(InitialState kind, std::span<const BoundState> states) {
  InitialProfile p;
  p.kind_ = kind;
  if (states.empty()) throw Error(ErrorCode::InvalidValue, "no bound state to start from");
  switch (kind) {
    case InitialState::Ground:
      p.components_ = {{1.0, states[0]}};
      break;
    case InitialState::Excited:
    case InitialState::EqualMix:
      if (states.size() < 2)
        throw Error(ErrorCode::MissingExcited, "initial state needs the first excited bound state");
      if (kind == InitialState::Excited) {
        p.components_ = {{1.0, states[1]}};
      } else {
        const double w = 1.0 / std::sqrt(2.0);
        p.components_ = {{w, states[0]}, {w, states[1]}};
      }
      break;
  }
  return p;
}

InitialProfile InitialProfile::single(const BoundState& state) {
  InitialProfile p;
  p.kind_ = state.index == 0 ? InitialState::Ground : InitialState::Excited;
  p.components_ = {{1.0, state}};
  return p;
}

double InitialProfile::operator()(double x) const {
  double v = 0.0;
  for (const auto& [w, s] : components_) v += w * s(x);
  return v;
}

double InitialProfile::dominant_wavenumber() const { return components_.front().state.k; }

double InitialProfile::well_probability() const {
  // Cross terms of sin(k0 x) sin(k1 x) on (0, a1) in closed form.
  double p = 0.0;
  for (const auto& [wi, si] : components_) {
    for (const auto& [wj, sj] : components_) {
      const double a = si.a1;
      double overlap;
      if (si.index == sj.index) {
        overlap = a / 2.0 - std::sin(2.0 * si.k * a) / (4.0 * si.k);
      } else {
        const double dm = si.k - sj.k, sm = si.k + sj.k;
        overlap = 0.5 * (std::sin(dm * a) / dm - std::sin(sm * a) / sm);
      }
      p += wi * wj * si.norm * sj.norm * overlap;
    }
  }
  return p;
}

GaugedPair gauged_initial(const InitialProfile& profile, const SOCoupling& so, double x) {
  const double f = profile(x);
  const double half = so.half_angle(x);
  return {f * std::cos(half), f * std::sin(half)};
}

Coefficients overlap_coefficients(const InitialProfile& profile, const SOCoupling& so,
                                  const ContinuumState& state) {
  return detail::OverlapKernel(profile, so, PotentialSpec{state.a1, state.a2, 0.0, Stage::PostQuench})(state);
}

KGridPolicy KGridPolicy::from(const KGridSpec& spec) {
  KGridPolicy p;
  p.k_min_extent = spec.k_max;
  p.base_dk = spec.dk;
  p.tolerance = spec.tolerance;
  return p;
}

namespace {

double magnitude(const Coefficients& c) {
  return std::max(std::abs(c.g1) + std::abs(c.gm1_over_i), std::abs(c.moment));
}

// Lagrange basis through the four Chebyshev nodes, local coordinate u in [-1, 1].
std::array<double, 4> lagrange_weights(double u) {
  static const auto nodes = detail::chebyshev_nodes<4>();
  std::array<double, 4> l{};
  for (int i = 0; i < 4; ++i) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) v *= (u - nodes[j]) / (nodes[i] - nodes[j]);
    l[i] = v;
  }
  return l;
}

Coefficients combine(const std::array<Coefficients, 4>& c, const std::array<double, 4>& l) {
  Coefficients out;
  for (int i = 0; i < 4; ++i) {
    out.g1 += l[i] * c[i].g1;
    out.gm1_over_i += l[i] * c[i].gm1_over_i;
    out.moment += l[i] * c[i].moment;
  }
  return out;
}

}  // namespace

SpectralAmplitudes::SpectralAmplitudes(std::vector<Panel> panels, SOCoupling so, InitialState source,
                                       PotentialSpec post)
    : panels_(std::move(panels)), so_(so), source_(source), post_(post) {
  suffix_envelope_.assign(panels_.size() + 1, 0.0);
  for (std::size_t i = panels_.size(); i-- > 0;) {
    double m = 0.0;
    for (const auto& c : panels_[i].c) m = std::max(m, magnitude(c));
    suffix_envelope_[i] = std::max(m, suffix_envelope_[i + 1]);
  }
}

std::vector<double> SpectralAmplitudes::samples() const {
  std::vector<double> ks;
  ks.reserve(panels_.size() * 4);
  for (const auto& p : panels_) ks.insert(ks.end(), p.k.begin(), p.k.end());
  return ks;
}

std::size_t SpectralAmplitudes::panel_index(double k) const {
  auto it = std::upper_bound(panels_.begin(), panels_.end(), k,
                             [](double v, const Panel& p) { return v < p.lo; });
  if (it == panels_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(panels_.begin(), it) - 1);
}

Coefficients SpectralAmplitudes::interpolate(std::size_t i, double k) const {
  const Panel& p = panels_[i];
  const double u = (2.0 * k - p.lo - p.hi) / (p.hi - p.lo);
  return combine(p.c, lagrange_weights(u));
}

Coefficients SpectralAmplitudes::operator()(double k) const {
  if (k < 0.0 || k > k_end()) return {};
  return interpolate(panel_index(k), k);
}

double SpectralAmplitudes::parseval() const {
  const auto& rule = detail::gauss_rule<4>();
  double sum = 0.0;
  for (std::size_t i = 0; i < panels_.size(); ++i) {
    const Panel& p = panels_[i];
    const double mid = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
    for (std::size_t n = 0; n < 4; ++n) {
      const Coefficients c = interpolate(i, mid + half * rule.x[n]);
      sum += half * rule.w[n] * (c.g1 * c.g1 + c.gm1_over_i * c.gm1_over_i);
    }
  }
  return sum;
}

double SpectralAmplitudes::spin_x_integral() const {
  const auto& rule = detail::gauss_rule<4>();
  double sum = 0.0;
  for (std::size_t i = 0; i < panels_.size(); ++i) {
    const Panel& p = panels_[i];
    const double mid = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
    for (std::size_t n = 0; n < 4; ++n) {
      const Coefficients c = interpolate(i, mid + half * rule.x[n]);
      const std::complex<double> g1(c.g1, 0.0), gm1(0.0, c.gm1_over_i);
      sum += half * rule.w[n] * 2.0 * std::real(std::conj(g1) * gm1);
    }
  }
  return sum;
}

double SpectralAmplitudes::envelope_beyond(double k) const {
  if (k > k_end()) return 0.0;
  return suffix_envelope_[panel_index(k)];
}

SpectralAmplitudes compute_coefficients(const InitialProfile& profile, const SOCoupling& so,
                                        const PotentialSpec& post, const KGridPolicy& policy) {
  const detail::OverlapKernel kernel(profile, so, post);
  auto exact = [&](double k) { return kernel(solve_continuum(post, k)); };
  static const auto nodes = detail::chebyshev_nodes<4>();
  static const double checks[] = {-0.98, -0.65, 0.0, 0.65, 0.98};

  std::vector<SpectralAmplitudes::Panel> accepted;
  // Refines [lo, hi] until the cubic through its Chebyshev nodes meets the tolerance.
  auto refine = [&](double lo, double hi) {
    std::vector<std::pair<double, double>> stack{{lo, hi}};
    std::vector<SpectralAmplitudes::Panel> out;
    while (!stack.empty()) {
      const auto [a, b] = stack.back();
      stack.pop_back();
      SpectralAmplitudes::Panel p;
      p.lo = a;
      p.hi = b;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int i = 0; i < 4; ++i) {
        p.k[i] = mid + half * nodes[i];
        p.c[i] = exact(p.k[i]);
      }
      double err = 0.0;
      if (b - a > policy.min_width) {
        for (double u : checks) {
          const Coefficients want = exact(mid + half * u);
          const Coefficients got = combine(p.c, lagrange_weights(u));
          err = std::max({err, std::abs(want.g1 - got.g1), std::abs(want.gm1_over_i - got.gm1_over_i),
                          std::abs(want.moment - got.moment)});
        }
      }
      if (err > policy.tolerance) {
        stack.push_back({mid, b});
        stack.push_back({a, mid});
      } else {
        out.push_back(p);
      }
    }
    return out;
  };
  auto add_uniform = [&](double lo, double hi, double width) {
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / width - 1e-9)));
    for (int i = 0; i < n; ++i) {
      const double a = lo + (hi - lo) * i / n;
      const double b = (i + 1 == n) ? hi : lo + (hi - lo) * (i + 1) / n;
      auto panels = refine(a, b);
      accepted.insert(accepted.end(), panels.begin(), panels.end());
    }
  };

  const double k_edge = post.edge_wavenumber();
  const double extent = std::max(policy.k_min_extent, 3.0 * k_edge);
  add_uniform(0.0, k_edge, policy.base_dk);
  add_uniform(k_edge, extent, policy.base_dk);

  // Extend until the coefficients stay below the tail tolerance for a full oscillation window.
  const double window = 2.0 * std::numbers::pi / post.a1;
  double k = extent;
  double quiet_since = extent;
  bool quiet = false;
  while (k < policy.k_cap) {
    const double next = std::min(k + policy.tail_dk, policy.k_cap);
    auto panels = refine(k, next);
    double peak_g = 0.0, peak_m = 0.0;
    for (const auto& p : panels)
      for (const auto& c : p.c) {
        peak_g = std::max(peak_g, std::abs(c.g1) + std::abs(c.gm1_over_i));
        peak_m = std::max(peak_m, std::abs(c.moment));
      }
    accepted.insert(accepted.end(), panels.begin(), panels.end());
    const bool small = peak_g < policy.tail_tolerance && peak_m < policy.tail_tolerance;
    if (small && !quiet) quiet_since = k;
    quiet = small;
    k = next;
    if (quiet && k - quiet_since >= window) break;
  }

  std::sort(accepted.begin(), accepted.end(),
            [](const auto& a, const auto& b) { return a.lo < b.lo; });
  return SpectralAmplitudes(std::move(accepted), so, profile.kind(), post);
}

GaugedPair reconstruct_t0(const SpectralAmplitudes& amplitudes, double x) {
  if (x <= 0.0) return {};
  const auto& rule = detail::gauss_rule<8>();
  const PotentialSpec& post = amplitudes.potential();
  GaugedPair out;
  const auto panels = amplitudes.panels();
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& p = panels[i];
    const int m = std::max(1, static_cast<int>(std::ceil((p.hi - p.lo) * x / std::numbers::pi)));
    const double width = (p.hi - p.lo) / m;
    for (int s = 0; s < m; ++s) {
      const double mid = p.lo + (s + 0.5) * width;
      for (std::size_t n = 0; n < 8; ++n) {
        const double k = mid + 0.5 * width * rule.x[n];
        const double phi = solve_continuum(post, k)(x);
        const Coefficients c = amplitudes.interpolate(i, k);
        const double w = 0.5 * width * rule.w[n];
        out.upper += w * c.g1 * phi;
        out.lower_over_i += w * c.gm1_over_i * phi;
      }
    }
  }
  return out;
}

void write_amplitudes_csv(std::ostream& out, const SpectralAmplitudes& amplitudes) {
  out << "k,G1,Im_Gm1,M\n";
  for (const auto& p : amplitudes.panels())
    for (int i = 0; i < 4; ++i)
      out << format_double(p.k[i]) << ',' << format_double(p.c[i].g1) << ','
          << format_double(p.c[i].gm1_over_i) << ',' << format_double(p.c[i].moment) << '\n';
}

}  // namespace qtunnel
