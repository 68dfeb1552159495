#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qtunnel/error.hpp"
#include "qtunnel/oracle.hpp"

using namespace qtunnel;
using cplx = std::complex<double>;

namespace {

constexpr cplx I(0.0, 1.0);

// Free Gaussian of width sigma centred at x0 with mean wavenumber k0.
cplx free_gaussian(double x, double t, double x0, double sigma, double k0) {
  const cplx spread = 1.0 + I * t / (2.0 * sigma * sigma);
  const double y = x - x0 - k0 * t;
  return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) / std::sqrt(spread) *
         std::exp(-y * y / (4.0 * sigma * sigma * spread) + I * k0 * (x - x0) - I * k0 * k0 * t / 2.0);
}

// Spin-up Gaussian under k^2/2 + p sigma_x k - p^2/2 in free space: the sigma_x = s
// component is exp(-i s p x) times a free packet boosted by s p, times exp(i p^2 t).
std::array<cplx, 2> coupled_gaussian(double x, double t, double x0, double sigma, double p) {
  std::array<cplx, 2> comp;
  for (int i = 0; i < 2; ++i) {
    const double s = i == 0 ? 1.0 : -1.0;
    comp[i] = std::exp(-I * s * p * (x - x0)) * free_gaussian(x, t, x0, sigma, s * p) * std::exp(I * p * p * t) /
              std::sqrt(2.0);
  }
  return {(comp[0] + comp[1]) / std::sqrt(2.0), (comp[0] - comp[1]) / std::sqrt(2.0)};
}

}  // namespace

TEST_CASE("free gaussian matches the analytic solution") {
  const GridSpec grid{60.0, 0.0025, 0.0025};
  const GridSolver solver(grid, std::vector<double>(grid.intervals() + 1, 0.0), SOCoupling::uncoupled());
  GridState s = solver.sample([](double x) { return free_gaussian(x, 0.0, 30.0, 1.0, 1.5); }, [](double) { return cplx{}; });
  const double n0 = norm(s);
  solver.advance(s, 800);
  CHECK(s.t == doctest::Approx(2.0));
  double err = 0.0;
  for (std::size_t j = 0; j < s.up.size(); ++j) {
    err = std::max(err, std::abs(s.up[j] - free_gaussian(s.x(j), 2.0, 30.0, 1.0, 1.5)));
    CHECK(s.down[j] == cplx{});
  }
  CHECK(err < 1e-4);
  CHECK(std::abs(norm(s) - n0) < 1e-12);
}

TEST_CASE("coupled free gaussian splits by sigma_x") {
  const GridSpec grid{60.0, 0.0025, 0.0025};
  const SOCoupling so{0.5};
  const GridSolver solver(grid, std::vector<double>(grid.intervals() + 1, 0.0), so);
  GridState s = solver.sample([](double x) { return free_gaussian(x, 0.0, 30.0, 1.0, 0.0); }, [](double) { return cplx{}; });
  solver.advance(s, 800);
  double err = 0.0;
  for (std::size_t j = 0; j < s.up.size(); ++j) {
    const auto want = coupled_gaussian(s.x(j), 2.0, 30.0, 1.0, so.momentum());
    err = std::max({err, std::abs(s.up[j] - want[0]), std::abs(s.down[j] - want[1])});
  }
  CHECK(err < 1e-4);
  CHECK(std::abs(spin_x_integral(s)) < 1e-12);
}

TEST_CASE("crank-nicolson conserves the norm and the sigma_x balance") {
  SimulationConfig c;
  const SimulationConfig v = validate(c);
  const GridSpec grid{20.0, 0.005, 0.01};
  const GridSolver solver(grid, v.post(), v.so);
  GridState s = init_from_bound(v, grid);
  CHECK(norm(s) == doctest::Approx(1.0).epsilon(1e-14));
  const double sx0 = spin_x_integral(s);
  CHECK(std::abs(sx0) < 1e-14);
  solver.advance(s, 200);
  CHECK(std::abs(norm(s) - 1.0) < 1e-11);
  CHECK(std::abs(spin_x_integral(s) - sx0) < 1e-11);
}

TEST_CASE("potential sampling") {
  const GridSpec grid{3.0, 0.1, 0.01};
  const auto u = potential_on_grid(post_quench(1.0, 0.4, 16.0), grid);
  REQUIRE(u.size() == 31);
  CHECK(u[5] == 0.0);
  CHECK(u[10] == 8.0);
  CHECK(u[12] == 16.0);
  CHECK(u[14] == 8.0);
  CHECK(u[20] == 0.0);
}

TEST_CASE("initial grid state") {
  const SimulationConfig v = validate(SimulationConfig{});
  CHECK_THROWS_AS(init_from_bound(v, GridSpec{20.0, 0.01, 0.01}), Error);
  try {
    init_from_bound(v, GridSpec{20.0, 0.01, 0.01});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  const GridState s = init_from_bound(v, GridSpec{20.0, 0.005, 0.01});
  CHECK(s.up.front() == cplx{});
  CHECK(s.up.back() == cplx{});
  const auto phi = solve_bound_states(v.pre()).front();
  // discrete renormalization only moves the amplitude by O(h^2)
  CHECK(std::abs(s.up[100]) == doctest::Approx(std::abs(phi(0.5))).epsilon(1e-4));
  CHECK(s.down[100] == cplx{});

  const ObservableRecord r = probe(s, 0.5);
  CHECK(r.sz == doctest::Approx(r.rho).epsilon(1e-14));
  CHECK(r.rho == doctest::Approx(phi(0.5) * phi(0.5)).epsilon(1e-4));
  CHECK(oracle_length(v, 30.0, 10.0, 5.0) == doctest::Approx(30.0 + 20.0 * 10.0 + 5.0));
}

TEST_CASE("richardson extrapolation removes a quadratic error") {
  const auto f = [](double h) { return 2.0 + 3.0 * h * h; };
  CHECK(richardson(f(0.1), f(0.05)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("sample times must ascend") {
  const SimulationConfig v = validate(SimulationConfig{});
  const std::vector<double> xs{1.0};
  const std::vector<double> ts{0.2, 0.1};
  CHECK_THROWS_AS(run_oracle(v, xs, ts, OracleOptions{}), Error);
}

TEST_CASE("short-time oracle agrees with the spectral solution") {
  const Simulation sim(validate(SimulationConfig{}));
  // before t ~ 0.5 the h = 0.005 grid does not yet resolve the quench front at x = 2
  const std::vector<double> ts{0.8, 1.6};
  const OracleComparison c = compare_with_oracle(sim, 2.0, ts, OracleOptions{});
  REQUIRE(c.t.size() == 2);
  CHECK(c.max_relative_error < 1e-3);
  CHECK(c.fine_error < c.coarse_error);
  CHECK(c.sign_mismatches == 0);
}
