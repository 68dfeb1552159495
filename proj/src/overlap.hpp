#pragma once

// Closed-form overlap integrals. Every factor on each interval of the
// post-quench geometry is a short sum of c * s^p * exp(r s) with s = x - lo,
// so the products integrate exactly.

#include <complex>
#include <vector>

#include "qtunnel/spectral.hpp"

namespace qtunnel::detail {

using cplx = std::complex<double>;

struct ExpTerm {
  cplx coef;
  cplx rate;
  int power = 0;
};

/// int_0^length s^p exp(r s) ds for p in {0, 1}; length = inf needs Re r < 0.
cplx integrate_term(const ExpTerm& term, double length);

class OverlapKernel {
 public:
  OverlapKernel(const InitialProfile& profile, const SOCoupling& so, const PotentialSpec& post);
  Coefficients operator()(const ContinuumState& state) const;

 private:
  struct Segment {
    double lo;
    double length;  // inf for the outside interval
    std::vector<ExpTerm> profile;
    std::vector<ExpTerm> cos_weight;
    std::vector<ExpTerm> sin_weight;
  };
  std::vector<Segment> segments_;
  bool uncoupled_;
};

}  // namespace qtunnel::detail
