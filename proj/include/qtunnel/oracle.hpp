#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "qtunnel/evolve.hpp"
#include "qtunnel/model.hpp"

namespace qtunnel {

struct GridSpec {
  double length = 0.0;  // hard walls at 0 and length
  double h = 0.005;
  double dt = 0.01;

  int intervals() const;
};

/// Lab-frame spinor on x_j = j h, j = 0..intervals.
struct GridState {
  GridSpec grid;
  double t = 0.0;
  std::vector<std::complex<double>> up;
  std::vector<std::complex<double>> down;

  double x(std::size_t j) const { return static_cast<double>(j) * grid.h; }
};

double norm(const GridState& state);
/// h sum 2 Re(up^* down).
double spin_x_integral(const GridState& state);

/// Node values of a piecewise-constant potential; nodes on a step take the mean of both sides.
std::vector<double> potential_on_grid(const PotentialSpec& potential, const GridSpec& grid);

/// Crank-Nicolson propagation of H = k^2/2 + p_so sigma_x k + U - p_so^2/2 with
/// centred differences. sigma_x commutes with the discrete operator, so each
/// sigma_x eigencomponent is advanced with its own tridiagonal factorization.
class GridSolver {
 public:
  GridSolver(GridSpec grid, std::vector<double> potential, SOCoupling so);
  GridSolver(GridSpec grid, const PotentialSpec& potential, SOCoupling so);

  const GridSpec& grid() const { return grid_; }

  /// Samples the given components on the grid (wall nodes forced to zero), unnormalized.
  GridState sample(const std::function<std::complex<double>(double)>& up,
                   const std::function<std::complex<double>(double)>& down) const;

  void step(GridState& state) const;
  void advance(GridState& state, int steps) const;

 private:
  struct Factorization {
    std::complex<double> lower;              // A_{j,j-1}
    std::complex<double> upper;              // A_{j,j+1}
    std::vector<std::complex<double>> diag;  // A_{jj}
    std::vector<std::complex<double>> sweep; // modified upper coefficients
    std::vector<std::complex<double>> pivot; // inverse pivots
  };
  Factorization factor(double sign) const;
  static void solve(const Factorization& f, std::vector<std::complex<double>>& psi,
                    std::vector<std::complex<double>>& scratch);

  GridSpec grid_;
  std::vector<double> potential_;
  SOCoupling so_;
  Factorization plus_;
  Factorization minus_;
};

/// chi phi_j on the grid with discrete norm 1. Throws Error(GridTooCoarse) when h > a1 / 200.
GridState init_from_bound(const SimulationConfig& config, const GridSpec& grid);

/// Lab-frame observables at x by 4-point Lagrange interpolation of the nodal spinor.
ObservableRecord probe(const GridState& state, double x);

struct OracleOptions {
  double h = 0.005;
  double dt = 0.01;
  double margin = 5.0;
};

/// Length that keeps wall reflections away from x_probe until t_end.
double oracle_length(const SimulationConfig& config, double x_probe, double t_end, double margin);

/// Probe records at each t in ts (rounded to whole steps), ordered by (t, x).
std::vector<ObservableRecord> run_oracle(const SimulationConfig& config, std::span<const double> xs,
                                         std::span<const double> ts, const OracleOptions& options);

/// (4 fine - coarse) / 3.
double richardson(double coarse, double fine);

struct OracleComparison {
  std::vector<double> t;
  std::vector<double> rho_spectral;
  std::vector<double> rho_coarse;
  std::vector<double> rho_fine;
  std::vector<double> rho_extrapolated;
  std::vector<double> sy_spectral;
  std::vector<double> sy_fine;
  double max_relative_error = 0.0;     // extrapolated vs spectral
  double coarse_error = 0.0;           // max |coarse - spectral| / spectral
  double fine_error = 0.0;
  int sign_mismatches = 0;             // where |sigma_y| > sign_floor in both
  double observed_order() const;
};

/// Grid oracle at (h, dt) and (h/2, dt/2) against the spectral result at one point x.
OracleComparison compare_with_oracle(const Simulation& sim, double x, std::span<const double> ts,
                                     const OracleOptions& coarse, double sign_floor = 1e-6);

}  // namespace qtunnel
