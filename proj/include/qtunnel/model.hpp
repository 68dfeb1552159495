#pragma once

// Units: hbar = m = 1, lengths in units of the well width a1 (a1 = 1 by default),
// energies in units of hbar^2 / (m a1^2).

#include <cmath>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

namespace qtunnel {

enum class Stage { PreQuench, PostQuench };

/// Quench geometry. U = inf for x <= 0 in both stages.
///   PreQuench:  U = 0 on (0, a1), U0 on (a1, inf)
///   PostQuench: U = 0 on (0, a1), U0 on (a1, a2), 0 on (a2, inf)
struct PotentialSpec {
  double a1 = 1.0;
  double a2 = 1.4;
  double U0 = 16.0;
  Stage stage = Stage::PostQuench;

  double width() const { return a2 - a1; }
  /// Wavenumber sqrt(2 U0) separating tunneling from propagating states.
  double edge_wavenumber() const { return std::sqrt(2.0 * U0); }
  double operator()(double x) const;

  bool operator==(const PotentialSpec&) const = default;
};

PotentialSpec pre_quench(double a1, double U0);
PotentialSpec post_quench(double a1, double d, double U0);

/// Dresselhaus coupling through the precession half-length xi; p_so = 1 / (2 xi).
/// xi = +inf is the uncoupled limit.
struct SOCoupling {
  double xi = 0.5;

  static SOCoupling uncoupled() { return {std::numeric_limits<double>::infinity()}; }
  bool is_uncoupled() const { return std::isinf(xi); }
  double momentum() const { return is_uncoupled() ? 0.0 : 0.5 / xi; }
  /// Half rotation angle x / (2 xi) of the gauge transform at position x.
  double half_angle(double x) const { return is_uncoupled() ? 0.0 : x / (2.0 * xi); }

  bool operator==(const SOCoupling&) const = default;
};

enum class InitialState { Ground, Excited, EqualMix };

std::string_view to_string(InitialState s);
InitialState parse_initial_state(std::string_view text);

struct KGridSpec {
  double k_max = 20.0;       // lower bound on the spectral extent
  double dk = 0.05;          // base panel width before refinement
  double tolerance = 1e-10;  // cubic interpolation error target per coefficient

  bool operator==(const KGridSpec&) const = default;
};

struct AxisSpec {
  double max = 0.0;
  double step = 0.0;

  int count() const { return static_cast<int>(std::floor(max / step + 1e-9)) + 1; }
  double at(int i) const { return i * step; }
  bool operator==(const AxisSpec&) const = default;
};

/// Quantities filled in by validate().
struct Derived {
  double d = 0.0;
  double a2 = 0.0;
  double p_so = 0.0;
  double k_edge = 0.0;
  int bound_states = 0;

  bool operator==(const Derived&) const = default;
};

struct SimulationConfig {
  double a1 = 1.0;
  double d = 0.4;
  double U0 = 16.0;
  SOCoupling so{0.5};
  InitialState initial = InitialState::Ground;
  KGridSpec k_grid;
  AxisSpec x_grid{1.4, 0.02};
  AxisSpec t_grid{36.0, 0.02};
  double X_obs = 10.0 * std::numbers::pi;

  bool validated = false;
  Derived derived;

  PotentialSpec pre() const { return pre_quench(a1, U0); }
  PotentialSpec post() const { return post_quench(a1, d, U0); }

  bool operator==(const SimulationConfig&) const = default;
};

/// Checks every invariant and fills `derived`. Throws ValidationError listing all failures.
SimulationConfig validate(SimulationConfig config);

/// Flat `key = value` text with `#` comments. Unknown keys are an error.
SimulationConfig parse_config(std::istream& in);
SimulationConfig load_config(const std::string& path);

/// Canonical text form (fixed key order, 17 significant digits); parse_config round-trips it.
std::string to_text(const SimulationConfig& config);

}  // namespace qtunnel
