#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qtunnel/eigensolver.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/spectral.hpp"

using namespace qtunnel;

namespace {

struct Fixture {
  std::vector<BoundState> states = solve_bound_states(pre_quench(1.0, 16.0));
  PotentialSpec post = post_quench(1.0, 0.4, 16.0);

  InitialProfile profile(InitialState kind) const { return InitialProfile::select(kind, states); }
  SpectralAmplitudes amplitudes(InitialState kind, SOCoupling so, KGridPolicy policy = {}) const {
    return compute_coefficients(profile(kind), so, post, policy);
  }
};

double integrate(const auto& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

// Brute-force quadrature of the three overlaps over the support of the profile.
Coefficients quadrature_overlap(const InitialProfile& profile, const SOCoupling& so, const ContinuumState& s) {
  const double kappa = profile.components().front().state.kappa;
  const double end = s.a2 + 50.0 / kappa;
  const auto both = [&](auto f) { return integrate(f, 0.0, s.a1) + integrate(f, s.a1, s.a2) + integrate(f, s.a2, end); };
  const double h = so.half_angle(1.0);
  Coefficients c;
  c.g1 = both([&](double x) { return std::cos(h * x) * profile(x) * s(x); });
  c.gm1_over_i = both([&](double x) { return std::sin(h * x) * profile(x) * s(x); });
  c.moment = both([&](double x) { return 0.5 * x * profile(x) * s(x); });
  return c;
}

}  // namespace

TEST_CASE("closed-form overlaps agree with direct quadrature") {
  const Fixture f;
  const SOCoupling so{0.5};
  for (auto kind : {InitialState::Ground, InitialState::Excited, InitialState::EqualMix}) {
    const InitialProfile p = f.profile(kind);
    for (double k : {0.3, 2.0, 2.65, 5.0, 6.2, 11.0, 19.5}) {
      const ContinuumState s = solve_continuum(f.post, k);
      const Coefficients a = overlap_coefficients(p, so, s);
      const Coefficients b = quadrature_overlap(p, so, s);
      CHECK(std::abs(a.g1 - b.g1) < 1e-10);
      CHECK(std::abs(a.gm1_over_i - b.gm1_over_i) < 1e-10);
      CHECK(std::abs(a.moment - b.moment) < 1e-10);
    }
  }
}

TEST_CASE("parseval: the expansion carries the full norm") {
  const Fixture f;
  for (auto kind : {InitialState::Ground, InitialState::EqualMix}) {
    const SpectralAmplitudes a = f.amplitudes(kind, SOCoupling{0.5});
    CHECK(std::abs(a.parseval() - 1.0) < 1e-6);
  }
  const SpectralAmplitudes free = f.amplitudes(InitialState::Ground, SOCoupling::uncoupled());
  CHECK(std::abs(free.parseval() - 1.0) < 1e-6);
}

TEST_CASE("expansion reproduces the initial spinor") {
  const Fixture f;
  const SOCoupling so{0.5};
  const InitialProfile p = f.profile(InitialState::Ground);
  const SpectralAmplitudes a = f.amplitudes(InitialState::Ground, so);
  for (double x : {0.1, 0.5, 0.9, 1.2, 1.4, 2.0}) {
    const GaugedPair want = gauged_initial(p, so, x);
    const GaugedPair got = reconstruct_t0(a, x);
    CHECK(std::abs(got.upper - want.upper) < 1e-4);
    CHECK(std::abs(got.lower_over_i - want.lower_over_i) < 1e-4);
  }
}

TEST_CASE("gauged initial spinor") {
  const Fixture f;
  const InitialProfile p = f.profile(InitialState::Ground);
  const GaugedPair g = gauged_initial(p, SOCoupling{0.5}, 0.7);
  CHECK(g.upper == doctest::Approx(std::cos(0.7) * p(0.7)));
  CHECK(g.lower_over_i == doctest::Approx(std::sin(0.7) * p(0.7)));
  const GaugedPair u = gauged_initial(p, SOCoupling::uncoupled(), 0.7);
  CHECK(u.upper == p(0.7));
  CHECK(u.lower_over_i == 0.0);
}

TEST_CASE("profile selection") {
  const Fixture f;
  const InitialProfile mix = f.profile(InitialState::EqualMix);
  REQUIRE(mix.components().size() == 2);
  for (double x : {0.2, 0.8, 1.3}) {
    CHECK(mix(x) == doctest::Approx((f.states[0](x) + f.states[1](x)) / std::sqrt(2.0)).epsilon(1e-14));
  }
  CHECK(f.profile(InitialState::Excited).dominant_wavenumber() == f.states[1].k);
  CHECK(mix.dominant_wavenumber() == f.states[0].k);
  const std::vector<BoundState> only_ground{f.states[0]};
  CHECK_THROWS_AS(InitialProfile::select(InitialState::EqualMix, only_ground), Error);
  CHECK_THROWS_AS(InitialProfile::select(InitialState::Excited, only_ground), Error);
}

TEST_CASE("mix coefficients are the normalized sum of the pure ones") {
  const Fixture f;
  const SOCoupling so{0.5};
  const InitialProfile g = f.profile(InitialState::Ground);
  const InitialProfile e = f.profile(InitialState::Excited);
  const InitialProfile m = f.profile(InitialState::EqualMix);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> kd(0.01, 30.0);
  for (int i = 0; i < 100; ++i) {
    const ContinuumState s = solve_continuum(f.post, kd(rng));
    const Coefficients cg = overlap_coefficients(g, so, s);
    const Coefficients ce = overlap_coefficients(e, so, s);
    const Coefficients cm = overlap_coefficients(m, so, s);
    CHECK(std::abs(cm.g1 - (cg.g1 + ce.g1) / std::sqrt(2.0)) < 1e-13);
    CHECK(std::abs(cm.gm1_over_i - (cg.gm1_over_i + ce.gm1_over_i) / std::sqrt(2.0)) < 1e-13);
    CHECK(std::abs(cm.moment - (cg.moment + ce.moment) / std::sqrt(2.0)) < 1e-13);
  }
}

TEST_CASE("weak coupling: lower channel fades and the moment is xi-independent") {
  const Fixture f;
  const InitialProfile p = f.profile(InitialState::Ground);
  const ContinuumState s = solve_continuum(f.post, 2.6);
  const Coefficients none = overlap_coefficients(p, SOCoupling::uncoupled(), s);
  CHECK(none.gm1_over_i == 0.0);
  const Coefficients weak = overlap_coefficients(p, SOCoupling{1e6}, s);
  CHECK(std::abs(weak.gm1_over_i) < 1e-5);
  CHECK(weak.g1 == doctest::Approx(none.g1).epsilon(1e-10));
  // sin(x / 2 xi) ~ x / 2 xi, so G_-1 / i -> M / xi
  CHECK(weak.gm1_over_i * 1e6 == doctest::Approx(none.moment).epsilon(1e-8));
  CHECK(overlap_coefficients(p, SOCoupling{0.5}, s).moment == doctest::Approx(none.moment).epsilon(1e-14));
}

TEST_CASE("interpolated coefficients are stable under grid refinement") {
  const Fixture f;
  const SOCoupling so{0.5};
  const SpectralAmplitudes coarse = f.amplitudes(InitialState::Ground, so);
  KGridPolicy fine_policy;
  fine_policy.base_dk /= 2.0;
  const SpectralAmplitudes fine = f.amplitudes(InitialState::Ground, so, fine_policy);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> kd(0.01, 19.9);
  for (int i = 0; i < 500; ++i) {
    const double k = kd(rng);
    const Coefficients a = coarse(k);
    const Coefficients b = fine(k);
    CHECK(std::abs(a.g1 - b.g1) < 1e-6);
    CHECK(std::abs(a.gm1_over_i - b.gm1_over_i) < 1e-6);
    CHECK(std::abs(a.moment - b.moment) < 1e-6);
  }
}

TEST_CASE("interpolant matches direct evaluation") {
  const Fixture f;
  const SOCoupling so{0.5};
  const InitialProfile p = f.profile(InitialState::Ground);
  const SpectralAmplitudes a = f.amplitudes(InitialState::Ground, so);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> kd(0.01, 25.0);
  for (int i = 0; i < 200; ++i) {
    const double k = kd(rng);
    if (std::abs(k - std::sqrt(32.0)) < 1e-6) continue;
    const Coefficients direct = overlap_coefficients(p, so, solve_continuum(f.post, k));
    const Coefficients interp = a(k);
    CHECK(std::abs(direct.g1 - interp.g1) < 1e-9);
    CHECK(std::abs(direct.gm1_over_i - interp.gm1_over_i) < 1e-9);
  }
  CHECK(a(-1.0).g1 == 0.0);
  CHECK(a(a.k_end() + 1.0).g1 == 0.0);
}

TEST_CASE("grid layout") {
  const Fixture f;
  const SpectralAmplitudes a = f.amplitudes(InitialState::Ground, SOCoupling{0.5});
  const auto ks = a.samples();
  REQUIRE(ks.size() > 4);
  CHECK(ks.front() > 0.0);
  for (std::size_t i = 1; i < ks.size(); ++i) CHECK(ks[i] > ks[i - 1]);
  CHECK(a.k_end() >= 20.0);
  bool edge_is_boundary = false;
  for (const auto& p : a.panels()) {
    CHECK(p.lo < p.hi);
    for (double k : p.k) CHECK(k != doctest::Approx(std::sqrt(32.0)).epsilon(1e-12));
    edge_is_boundary = edge_is_boundary || p.hi == std::sqrt(32.0);
  }
  CHECK(edge_is_boundary);
  CHECK(a.envelope_beyond(a.k_end()) <= a.envelope_beyond(1.0));
}

TEST_CASE("spectral weight peaks at the resonance") {
  const Fixture f;
  const SpectralAmplitudes a = f.amplitudes(InitialState::Ground, SOCoupling::uncoupled());
  double best_k = 0.0, best = 0.0;
  for (double k = 0.01; k < 20.0; k += 0.001) {
    const double g = std::abs(a(k).g1);
    if (g > best) {
      best = g;
      best_k = k;
    }
  }
  CHECK(std::abs(best_k - f.states[0].k) < 0.05);
}

TEST_CASE("sigma_x integral vanishes identically") {
  const Fixture f;
  CHECK(std::abs(f.amplitudes(InitialState::Ground, SOCoupling{0.5}).spin_x_integral()) < 1e-14);
  CHECK(std::abs(f.amplitudes(InitialState::EqualMix, SOCoupling{0.5}).spin_x_integral()) < 1e-14);
}

TEST_CASE("amplitude csv") {
  const Fixture f;
  const SpectralAmplitudes a = f.amplitudes(InitialState::Ground, SOCoupling{0.5});
  std::ostringstream out;
  write_amplitudes_csv(out, a);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,G1,Im_Gm1,M");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    ++rows;
  }
  CHECK(rows == a.samples().size());
}
