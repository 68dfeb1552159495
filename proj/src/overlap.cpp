#include "overlap.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qtunnel::detail {

namespace {

constexpr cplx kI{0.0, 1.0};

// (e^z - 1) / z
cplx expm1_over(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx term = 1.0, sum = 1.0;
    for (int n = 1; n < 20; ++n) {
      term *= z / static_cast<double>(n + 1);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

// int_0^1 s e^{z s} ds = (e^z (z - 1) + 1) / z^2
cplx first_moment(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx fact = 1.0, zn = 1.0, sum = 0.5;
    for (int n = 1; n < 20; ++n) {
      zn *= z;
      fact *= static_cast<double>(n);
      sum += zn / (fact * static_cast<double>(n + 2));
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

std::vector<ExpTerm> trig_weight(double omega, double lo, bool sine) {
  // cos(omega x) or sin(omega x) rewritten around lo.
  const cplx shift = std::exp(kI * omega * lo);
  if (sine) {
    return {{shift / (2.0 * kI), kI * omega, 0}, {-std::conj(shift) / (2.0 * kI), -kI * omega, 0}};
  }
  return {{shift / 2.0, kI * omega, 0}, {std::conj(shift) / 2.0, -kI * omega, 0}};
}

}  // namespace

cplx integrate_term(const ExpTerm& t, double length) {
  if (std::isinf(length)) {
    if (t.power == 0) return -t.coef / t.rate;
    return t.coef / (t.rate * t.rate);
  }
  const cplx z = t.rate * length;
  if (t.power == 0) return t.coef * length * expm1_over(z);
  return t.coef * length * length * first_moment(z);
}

OverlapKernel::OverlapKernel(const InitialProfile& profile, const SOCoupling& so, const PotentialSpec& post)
    : uncoupled_(so.is_uncoupled()) {
  const double a1 = post.a1, a2 = post.a2;
  const double inf = std::numeric_limits<double>::infinity();
  Segment well{0.0, a1, {}, {}, {}};
  Segment barrier{a1, a2 - a1, {}, {}, {}};
  Segment outside{a2, inf, {}, {}, {}};
  for (const auto& [weight, s] : profile.components()) {
    const double amp = weight * s.norm;
    well.profile.push_back({amp / (2.0 * kI), kI * s.k, 0});
    well.profile.push_back({-amp / (2.0 * kI), -kI * s.k, 0});
    const double edge = amp * std::sin(s.k * a1);
    barrier.profile.push_back({edge, -s.kappa, 0});
    outside.profile.push_back({edge * std::exp(-s.kappa * (a2 - a1)), -s.kappa, 0});
  }
  const double omega = uncoupled_ ? 0.0 : 0.5 / so.xi;
  for (Segment* seg : {&well, &barrier, &outside}) {
    seg->cos_weight = trig_weight(omega, seg->lo, false);
    seg->sin_weight = trig_weight(omega, seg->lo, true);
    if (seg->length > 0.0) segments_.push_back(*seg);
  }
}

Coefficients OverlapKernel::operator()(const ContinuumState& st) const {
  const double k = st.k;
  const double out_amp = std::sqrt(2.0 / std::numbers::pi);
  cplx g1 = 0.0, gm1 = 0.0, moment = 0.0;
  std::vector<ExpTerm> basis, product;
  basis.reserve(2);
  product.reserve(8);

  for (std::size_t si = 0; si < segments_.size(); ++si) {
    const Segment& seg = segments_[si];
    basis.clear();
    if (seg.lo == 0.0) {
      basis.push_back({st.C / (2.0 * kI), kI * k, 0});
      basis.push_back({-st.C / (2.0 * kI), -kI * k, 0});
    } else if (std::isfinite(seg.length)) {
      if (st.regime == Regime::Tunneling) {
        basis.push_back({st.D, -st.rate, 0});
        basis.push_back({st.F, st.rate, 0});
      } else {
        basis.push_back({st.D / 2.0 + st.F / (2.0 * kI), kI * st.rate, 0});
        basis.push_back({st.D / 2.0 - st.F / (2.0 * kI), -kI * st.rate, 0});
      }
    } else {
      const cplx phase = std::exp(kI * (k * seg.lo + st.theta));
      basis.push_back({out_amp * phase / (2.0 * kI), kI * k, 0});
      basis.push_back({-out_amp * std::conj(phase) / (2.0 * kI), -kI * k, 0});
    }

    product.clear();
    for (const auto& p : seg.profile)
      for (const auto& b : basis) product.push_back({p.coef * b.coef, p.rate + b.rate, 0});

    for (const auto& p : product) {
      // x/2 = lo/2 + s/2
      moment += 0.5 * seg.lo * integrate_term(p, seg.length) +
                0.5 * integrate_term({p.coef, p.rate, 1}, seg.length);
      if (uncoupled_) {
        g1 += integrate_term(p, seg.length);
        continue;
      }
      for (const auto& w : seg.cos_weight)
        g1 += integrate_term({p.coef * w.coef, p.rate + w.rate, 0}, seg.length);
      for (const auto& w : seg.sin_weight)
        gm1 += integrate_term({p.coef * w.coef, p.rate + w.rate, 0}, seg.length);
    }
  }
  return {g1.real(), gm1.real(), moment.real()};
}

}  // namespace qtunnel::detail
