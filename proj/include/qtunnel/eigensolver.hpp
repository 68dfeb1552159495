#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "qtunnel/model.hpp"

namespace qtunnel {

/// Bound level of the pre-quench step:
///   norm * sin(k x)                                   0 <= x <= a1
///   norm * sin(k a1) * exp(-kappa (x - a1))           x > a1
struct BoundState {
  int index = 0;
  double k = 0.0;
  double energy = 0.0;
  double kappa = 0.0;
  double norm = 0.0;
  double a1 = 1.0;

  double operator()(double x) const;
  double derivative(double x) const;
  /// Probability of finding the particle in (0, a1).
  double well_probability() const;
};

/// All roots of k cot(k a1) = -sqrt(2 U0 - k^2) on (0, sqrt(2 U0)), ordered by energy.
/// Empty when the step is too shallow to bind.
std::vector<BoundState> solve_bound_states(const PotentialSpec& pre);

inline double bound_eval(const BoundState& state, double x) { return state(x); }

enum class Regime { Tunneling, Propagating };
enum class Region { Well, Barrier, Outside };

/// Delta-normalized eigenstate of the post-quench barrier, <phi_k'|phi_k> = delta(k - k').
///   Well     (0, a1):   C sin(k x)
///   Barrier  (a1, a2):  D exp(-kappa (x - a1)) + F exp(kappa (x - a1))     Tunneling
///                       D cos(q (x - a1)) + F sin(q (x - a1))              Propagating
///   Outside  (a2, inf): sqrt(2/pi) sin(k x + theta),  theta in (-pi, pi]
/// `rate` holds kappa or q. Barrier exponentials are anchored at a1 so opaque
/// barriers stay finite.
struct ContinuumState {
  double k = 0.0;
  Regime regime = Regime::Tunneling;
  double C = 0.0;
  double D = 0.0;
  double F = 0.0;
  double theta = 0.0;
  double rate = 0.0;
  double a1 = 1.0;
  double a2 = 1.4;

  double operator()(double x) const;
  double value_in(Region region, double x) const;
  double slope_in(Region region, double x) const;
};

/// Guard on |k^2 - 2 U0| below which solve_continuum refuses to build a state.
inline constexpr double kBandEdgeGuard = 1e-9;

/// Throws Error(BandEdge) when k sits on the band edge.
ContinuumState solve_continuum(const PotentialSpec& post, double k);

/// Largest relative mismatch of value and slope across a1 and a2.
double matching_residual(const ContinuumState& state);

/// Free rectangular barrier (wall ignored). `amplitude` multiplies the transmitted
/// wave exp(i k (x - d)) for unit incidence exp(i k x), so d = 0 gives exactly 1.
struct Transmission {
  std::complex<double> amplitude;
  double transparency = 0.0;
};

Transmission transmission(const PotentialSpec& post, double E);

/// Phase time d arg(t) / dE by centered differences, step halved until the
/// estimate changes by less than 1e-6 relative.
double group_delay(const PotentialSpec& post, double E);

/// Debug dump: k,C,D,F,theta,regime.
void write_continuum_csv(std::ostream& out, std::span<const ContinuumState> states);

}  // namespace qtunnel
