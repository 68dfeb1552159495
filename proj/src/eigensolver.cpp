#include "qtunnel/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"

namespace qtunnel {

namespace {

const double kOutsideAmplitude = std::sqrt(2.0 / std::numbers::pi);

// cosh(kappa d) and sinh(kappa d) / kappa as functions of kappa^2, continued
// analytically through kappa^2 = 0 into the propagating side.
struct BarrierCS {
  double c;
  double s;
};

BarrierCS barrier_cs(double kappa_sq, double d) {
  const double z = kappa_sq * d * d;
  if (std::abs(z) < 1e-4) {
    return {1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0,
            d * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0)};
  }
  if (kappa_sq > 0.0) {
    const double kappa = std::sqrt(kappa_sq);
    return {std::cosh(kappa * d), std::sinh(kappa * d) / kappa};
  }
  const double q = std::sqrt(-kappa_sq);
  return {std::cos(q * d), std::sin(q * d) / q};
}

}  // namespace

double BoundState::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  if (x <= a1) return norm * std::sin(k * x);
  return norm * std::sin(k * a1) * std::exp(-kappa * (x - a1));
}

double BoundState::derivative(double x) const {
  if (x < 0.0) return 0.0;
  if (x <= a1) return norm * k * std::cos(k * x);
  return -kappa * norm * std::sin(k * a1) * std::exp(-kappa * (x - a1));
}

double BoundState::well_probability() const {
  return norm * norm * (a1 / 2.0 - std::sin(2.0 * k * a1) / (4.0 * k));
}

std::vector<BoundState> solve_bound_states(const PotentialSpec& pre) {
  const double a1 = pre.a1;
  const double k_edge = pre.edge_wavenumber();
  const double two_u0 = 2.0 * pre.U0;
  // k cot(k a1) + kappa = 0 multiplied through by sin(k a1): no poles, same roots.
  auto matching = [&](double k) {
    const double kappa = std::sqrt(std::max(0.0, two_u0 - k * k));
    return k * std::cos(k * a1) + kappa * std::sin(k * a1);
  };

  std::vector<BoundState> states;
  const double step = std::numbers::pi / (4.0 * a1);
  double lo = 0.0;
  double f_lo = 1.0;  // matching(k) ~ k (1 + kappa a1) > 0 as k -> 0+
  while (lo < k_edge) {
    const double hi = std::min(lo + step, k_edge);
    const double f_hi = matching(hi);
    if ((f_lo > 0.0) != (f_hi > 0.0) && f_hi != 0.0) {
      double a = lo, b = hi, fa = f_lo;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fm = matching(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double k = 0.5 * (a + b);
      if (k_edge - k > 1e-12 * k_edge) {
        BoundState s;
        s.index = static_cast<int>(states.size());
        s.k = k;
        s.energy = 0.5 * k * k;
        s.kappa = std::sqrt(two_u0 - k * k);
        s.a1 = a1;
        const double sin_ka = std::sin(k * a1);
        const double inside = a1 / 2.0 - std::sin(2.0 * k * a1) / (4.0 * k);
        const double tail = sin_ka * sin_ka / (2.0 * s.kappa);
        s.norm = 1.0 / std::sqrt(inside + tail);
        states.push_back(s);
      }
    }
    lo = hi;
    f_lo = f_hi;
  }
  return states;
}

double ContinuumState::value_in(Region region, double x) const {
  switch (region) {
    case Region::Well: return C * std::sin(k * x);
    case Region::Barrier: {
      const double s = x - a1;
      if (regime == Regime::Tunneling) return D * std::exp(-rate * s) + F * std::exp(rate * s);
      return D * std::cos(rate * s) + F * std::sin(rate * s);
    }
    case Region::Outside: return kOutsideAmplitude * std::sin(k * x + theta);
  }
  return 0.0;
}

double ContinuumState::slope_in(Region region, double x) const {
  switch (region) {
    case Region::Well: return C * k * std::cos(k * x);
    case Region::Barrier: {
      const double s = x - a1;
      if (regime == Regime::Tunneling)
        return rate * (F * std::exp(rate * s) - D * std::exp(-rate * s));
      return rate * (F * std::cos(rate * s) - D * std::sin(rate * s));
    }
    case Region::Outside: return kOutsideAmplitude * k * std::cos(k * x + theta);
  }
  return 0.0;
}

double ContinuumState::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  if (x <= a1) return value_in(Region::Well, x);
  if (x <= a2) return value_in(Region::Barrier, x);
  return value_in(Region::Outside, x);
}

ContinuumState solve_continuum(const PotentialSpec& post, double k) {
  const double two_u0 = 2.0 * post.U0;
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidValue, "continuum wavenumber must be positive");
  if (std::abs(k * k - two_u0) < kBandEdgeGuard)
    throw Error(ErrorCode::BandEdge, "k too close to sqrt(2 U0); split the panel there");

  ContinuumState s;
  s.k = k;
  s.a1 = post.a1;
  s.a2 = post.a2;
  const double d = post.width();

  // Wall-regular solution sin(k x) carried across the barrier.
  const double u1 = std::sin(k * post.a1);
  const double du1 = k * std::cos(k * post.a1);
  double u2 = 0.0, du2 = 0.0;
  if (k * k < two_u0) {
    s.regime = Regime::Tunneling;
    s.rate = std::sqrt(two_u0 - k * k);
    s.D = 0.5 * (u1 - du1 / s.rate);
    s.F = 0.5 * (u1 + du1 / s.rate);
    const double grow = std::exp(s.rate * d);
    const double decay = std::exp(-s.rate * d);
    u2 = s.D * decay + s.F * grow;
    du2 = s.rate * (s.F * grow - s.D * decay);
  } else {
    s.regime = Regime::Propagating;
    s.rate = std::sqrt(k * k - two_u0);
    s.D = u1;
    s.F = du1 / s.rate;
    const double c = std::cos(s.rate * d), sn = std::sin(s.rate * d);
    u2 = s.D * c + s.F * sn;
    du2 = s.rate * (s.F * c - s.D * sn);
  }

  const double amplitude = std::hypot(u2, du2 / k);
  double theta = std::atan2(u2, du2 / k) - k * post.a2;
  theta = std::remainder(theta, 2.0 * std::numbers::pi);
  if (theta <= -std::numbers::pi) theta += 2.0 * std::numbers::pi;
  s.theta = theta;

  const double scale = kOutsideAmplitude / amplitude;
  s.C = scale;
  s.D *= scale;
  s.F *= scale;
  return s;
}

double matching_residual(const ContinuumState& s) {
  const double vscale = std::max({std::abs(s.C), std::abs(s.D) + std::abs(s.F), kOutsideAmplitude});
  const double sscale = vscale * std::max(s.k, s.rate);
  const double r[] = {
      std::abs(s.value_in(Region::Well, s.a1) - s.value_in(Region::Barrier, s.a1)) / vscale,
      std::abs(s.slope_in(Region::Well, s.a1) - s.slope_in(Region::Barrier, s.a1)) / sscale,
      std::abs(s.value_in(Region::Barrier, s.a2) - s.value_in(Region::Outside, s.a2)) / vscale,
      std::abs(s.slope_in(Region::Barrier, s.a2) - s.slope_in(Region::Outside, s.a2)) / sscale,
  };
  return *std::max_element(std::begin(r), std::end(r));
}

Transmission transmission(const PotentialSpec& post, double E) {
  if (!(E > 0.0)) throw Error(ErrorCode::InvalidValue, "transmission needs E > 0");
  const double k = std::sqrt(2.0 * E);
  const double kappa_sq = 2.0 * (post.U0 - E);
  const auto [c, s] = barrier_cs(kappa_sq, post.width());
  const std::complex<double> denom(c, (kappa_sq - k * k) / (2.0 * k) * s);
  const std::complex<double> t = 1.0 / denom;
  return {t, std::norm(t)};
}

double group_delay(const PotentialSpec& post, double E) {
  if (!(E > 0.0)) throw Error(ErrorCode::InvalidValue, "group delay needs E > 0");
  auto estimate = [&](double h) {
    const auto plus = transmission(post, E + h).amplitude;
    const auto minus = transmission(post, E - h).amplitude;
    return std::arg(plus * std::conj(minus)) / (2.0 * h);
  };
  double h = 1e-2 * E;
  double prev = estimate(h);
  for (int it = 0; it < 40; ++it) {
    h *= 0.5;
    const double next = estimate(h);
    if (std::abs(next - prev) <= 1e-6 * std::max(std::abs(next), 1e-300)) return next;
    prev = next;
  }
  return prev;
}

void write_continuum_csv(std::ostream& out, std::span<const ContinuumState> states) {
  out << "k,C,D,F,theta,regime\n";
  for (const auto& s : states) {
    out << format_double(s.k) << ',' << format_double(s.C) << ',' << format_double(s.D) << ','
        << format_double(s.F) << ',' << format_double(s.theta) << ','
        << (s.regime == Regime::Tunneling ? "tunneling" : "propagating") << '\n';
  }
}

}  // namespace qtunnel
