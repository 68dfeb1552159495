#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace qtunnel::detail {

/// Full Gauss-Legendre rule on [-1, 1], nodes ascending.
template <std::size_t N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    // boost stores the non-negative half, zero first when N is odd.
    const std::size_t half = a.size();
    std::size_t i = 0;
    for (std::size_t j = half; j-- > 0;) {
      if (N % 2 == 1 && j == 0) continue;
      x[i] = -a[j];
      w[i] = wt[j];
      ++i;
    }
    for (std::size_t j = 0; j < half; ++j) {
      x[i] = a[j];
      w[i] = wt[j];
      ++i;
    }
  }
};

template <std::size_t N>
const GaussRule<N>& gauss_rule() {
  static const GaussRule<N> rule;
  return rule;
}

/// First-kind Chebyshev nodes on [-1, 1], ascending.
template <std::size_t N>
inline std::array<double, N> chebyshev_nodes() {
  std::array<double, N> x{};
  for (std::size_t i = 0; i < N; ++i)
    x[i] = -std::cos((2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi / (2.0 * N));
  return x;
}

}  // namespace qtunnel::detail
