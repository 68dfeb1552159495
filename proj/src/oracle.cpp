#include "qtunnel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtunnel/eigensolver.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/spectral.hpp"

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace qtunnel {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// Far from the packet the amplitudes underflow into subnormals, which are
// orders of magnitude slower on x86. Flush them while stepping.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | _MM_FLUSH_ZERO_ON | _MM_DENORMALS_ZERO_ON); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

}  // namespace

int GridSpec::intervals() const { return static_cast<int>(std::ceil(length / h - 1e-9)); }

double norm(const GridState& s) {
  double sum = 0.0;
  for (std::size_t j = 0; j < s.up.size(); ++j) sum += std::norm(s.up[j]) + std::norm(s.down[j]);
  return sum * s.grid.h;
}

double spin_x_integral(const GridState& s) {
  double sum = 0.0;
  for (std::size_t j = 0; j < s.up.size(); ++j) sum += 2.0 * std::real(std::conj(s.up[j]) * s.down[j]);
  return sum * s.grid.h;
}

std::vector<double> potential_on_grid(const PotentialSpec& potential, const GridSpec& grid) {
  const int n = grid.intervals();
  std::vector<double> u(n + 1);
  const double eps = 1e-9 * grid.h;
  for (int j = 0; j <= n; ++j) {
    const double x = j * grid.h;
    u[j] = 0.5 * (potential(x - eps) + potential(x + eps));
  }
  u[0] = potential(eps);
  return u;
}

GridSolver::GridSolver(GridSpec grid, std::vector<double> potential, SOCoupling so)
    : grid_(grid), potential_(std::move(potential)), so_(so) {
  if (!(grid_.h > 0.0) || !(grid_.dt > 0.0) || grid_.intervals() < 4)
    throw Error(ErrorCode::InvalidGrid, "oracle grid needs h > 0, dt > 0 and at least 4 intervals");
  if (potential_.size() != static_cast<std::size_t>(grid_.intervals() + 1))
    throw Error(ErrorCode::InvalidGrid, "potential does not match the grid");
  plus_ = factor(1.0);
  minus_ = factor(-1.0);
}

GridSolver::GridSolver(GridSpec grid, const PotentialSpec& potential, SOCoupling so)
    : GridSolver(grid, potential_on_grid(potential, grid), so) {}

GridSolver::Factorization GridSolver::factor(double sign) const {
  const double h = grid_.h, p = so_.momentum();
  const cplx half_step = kI * (0.5 * grid_.dt);
  Factorization f;
  f.upper = half_step * (-0.5 / (h * h) - kI * sign * p / (2.0 * h));
  f.lower = half_step * (-0.5 / (h * h) + kI * sign * p / (2.0 * h));
  const std::size_t n = potential_.size();
  f.diag.assign(n, 0.0);
  f.sweep.assign(n, 0.0);
  f.pivot.assign(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j)
    f.diag[j] = 1.0 + half_step * (1.0 / (h * h) + potential_[j] - 0.5 * p * p);
  cplx prev = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const cplx denom = f.diag[j] - f.lower * prev;
    f.pivot[j] = 1.0 / denom;
    f.sweep[j] = f.upper * f.pivot[j];
    prev = f.sweep[j];
  }
  return f;
}

void GridSolver::solve(const Factorization& f, std::vector<cplx>& psi, std::vector<cplx>& rhs) {
  const std::size_t n = psi.size();
  // B = 2 - A on the interior, so B psi = 2 psi - A psi.
  for (std::size_t j = 1; j + 1 < n; ++j)
    rhs[j] = 2.0 * psi[j] - (f.lower * psi[j - 1] + f.diag[j] * psi[j] + f.upper * psi[j + 1]);
  cplx prev = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    prev = (rhs[j] - f.lower * prev) * f.pivot[j];
    rhs[j] = prev;
  }
  psi[n - 1] = 0.0;
  for (std::size_t j = n - 1; j-- > 1;) psi[j] = rhs[j] - f.sweep[j] * psi[j + 1];
  psi[0] = 0.0;
}

GridState GridSolver::sample(const std::function<cplx(double)>& up, const std::function<cplx(double)>& down) const {
  GridState s;
  s.grid = grid_;
  const std::size_t n = potential_.size();
  s.up.assign(n, 0.0);
  s.down.assign(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    s.up[j] = up(s.x(j));
    s.down[j] = down(s.x(j));
  }
  return s;
}

void GridSolver::advance(GridState& state, int steps) const {
  const std::size_t n = potential_.size();
  if (state.up.size() != n || state.down.size() != n)
    throw Error(ErrorCode::InvalidGrid, "state does not live on this solver's grid");
  const FlushDenormals flush;
  const double r = std::numbers::sqrt2 / 2.0;
  std::vector<cplx> plus(n), minus(n), scratch(n);
  for (std::size_t j = 0; j < n; ++j) {
    plus[j] = r * (state.up[j] + state.down[j]);
    minus[j] = r * (state.up[j] - state.down[j]);
  }
  for (int s = 0; s < steps; ++s) {
    solve(plus_, plus, scratch);
    solve(minus_, minus, scratch);
  }
  for (std::size_t j = 0; j < n; ++j) {
    state.up[j] = r * (plus[j] + minus[j]);
    state.down[j] = r * (plus[j] - minus[j]);
  }
  state.t += steps * grid_.dt;
}

void GridSolver::step(GridState& state) const { advance(state, 1); }

GridState init_from_bound(const SimulationConfig& config, const GridSpec& grid) {
  if (grid.h > config.a1 / 200.0)
    throw Error(ErrorCode::GridTooCoarse, "grid step " + std::to_string(grid.h) + " exceeds a1 / 200");
  const SimulationConfig c = config.validated ? config : validate(config);
  const auto states = solve_bound_states(c.pre());
  const InitialProfile profile = InitialProfile::select(c.initial, states);
  GridState s;
  s.grid = grid;
  const std::size_t n = static_cast<std::size_t>(grid.intervals()) + 1;
  s.up.assign(n, 0.0);
  s.down.assign(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) s.up[j] = profile(s.x(j));
  const double scale = 1.0 / std::sqrt(norm(s));
  for (auto& v : s.up) v *= scale;
  return s;
}

ObservableRecord probe(const GridState& s, double x) {
  const int n = static_cast<int>(s.up.size()) - 1;
  const double u = x / s.grid.h;
  const int base = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, n - 3);
  cplx up = 0.0, down = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) w *= (u - (base + b)) / static_cast<double>(a - b);
    up += w * s.up[base + a];
    down += w * s.down[base + a];
  }
  return observables({x, s.t, Frame::Lab, up, down});
}

double oracle_length(const SimulationConfig& config, double x_probe, double t_end, double margin) {
  return x_probe + config.k_grid.k_max * t_end + margin;
}

std::vector<ObservableRecord> run_oracle(const SimulationConfig& config, std::span<const double> xs,
                                         std::span<const double> ts, const OracleOptions& options) {
  double x_far = 0.0, t_end = 0.0;
  for (double x : xs) x_far = std::max(x_far, x);
  for (double t : ts) t_end = std::max(t_end, t);
  const SimulationConfig c = config.validated ? config : validate(config);
  const GridSpec grid{oracle_length(c, x_far, t_end, options.margin), options.h, options.dt};
  GridState state = init_from_bound(c, grid);
  const GridSolver solver(grid, c.post(), c.so);

  std::vector<ObservableRecord> out;
  out.reserve(xs.size() * ts.size());
  long done = 0;
  for (double t : ts) {
    const long target = std::lround(t / grid.dt);
    if (target < done) throw Error(ErrorCode::InvalidValue, "oracle sample times must be ascending");
    solver.advance(state, static_cast<int>(target - done));
    done = target;
    for (double x : xs) out.push_back(probe(state, x));
  }
  return out;
}

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

double OracleComparison::observed_order() const { return std::log2(coarse_error / fine_error); }

OracleComparison compare_with_oracle(const Simulation& sim, double x, std::span<const double> ts,
                                     const OracleOptions& coarse, double sign_floor) {
  OracleOptions fine = coarse;
  fine.h *= 0.5;
  fine.dt *= 0.5;
  const double xs[] = {x};
  const auto rc = run_oracle(sim.config(), xs, ts, coarse);
  const auto rf = run_oracle(sim.config(), xs, ts, fine);

  OracleComparison cmp;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const ObservableRecord s = sim.observe(x, ts[i]);
    cmp.t.push_back(ts[i]);
    cmp.rho_spectral.push_back(s.rho);
    cmp.rho_coarse.push_back(rc[i].rho);
    cmp.rho_fine.push_back(rf[i].rho);
    cmp.rho_extrapolated.push_back(richardson(rc[i].rho, rf[i].rho));
    cmp.sy_spectral.push_back(s.sy);
    cmp.sy_fine.push_back(rf[i].sy);
    cmp.max_relative_error = std::max(cmp.max_relative_error, std::abs(cmp.rho_extrapolated[i] - s.rho) / s.rho);
    cmp.coarse_error = std::max(cmp.coarse_error, std::abs(rc[i].rho - s.rho) / s.rho);
    cmp.fine_error = std::max(cmp.fine_error, std::abs(rf[i].rho - s.rho) / s.rho);
    if (std::abs(s.sy) > sign_floor && (s.sy > 0.0) != (rf[i].sy > 0.0)) ++cmp.sign_mismatches;
  }
  return cmp;
}

}  // namespace qtunnel
