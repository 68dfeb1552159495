#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "qtunnel/eigensolver.hpp"
#include "qtunnel/model.hpp"

namespace qtunnel {

/// Orbital part of the initial spinor: a fixed real combination of pre-quench bound states.
class InitialProfile {
 public:
  struct Component {
    double weight;
    BoundState state;
  };

  /// Ground -> phi0, Excited -> phi1, EqualMix -> (phi0 + phi1) / sqrt(2).
  /// Throws Error(MissingExcited) when phi1 is required but absent.
  static InitialProfile select(InitialState kind, std::span<const BoundState> states);
  static InitialProfile single(const BoundState& state);

  double operator()(double x) const;
  std::span<const Component> components() const { return components_; }
  InitialState kind() const { return kind_; }
  /// Wavenumber used for ballistic arrival estimates (ground level unless only phi1 is present).
  double dominant_wavenumber() const;
  double well_probability() const;
  double a1() const { return components_.front().state.a1; }

 private:
  InitialState kind_ = InitialState::Ground;
  std::vector<Component> components_;
};

/// Gauged initial spinor  profile(x) * [cos(x/2xi), i sin(x/2xi)];  the lower
/// component is returned divided by i, so both numbers are real.
struct GaugedPair {
  double upper = 0.0;
  double lower_over_i = 0.0;
};

GaugedPair gauged_initial(const InitialProfile& profile, const SOCoupling& so, double x);

/// Expansion coefficients at one wavenumber. G_1 and M are real; G_-1 = i * gm1_over_i.
struct Coefficients {
  double g1 = 0.0;
  double gm1_over_i = 0.0;
  double moment = 0.0;  // M(k) = int (x/2) profile(x) phi_k(x) dx, xi-independent
};

/// Closed-form overlaps <cos(x/2xi) profile | phi_k>, <sin(x/2xi) profile | phi_k>, <(x/2) profile | phi_k>.
Coefficients overlap_coefficients(const InitialProfile& profile, const SOCoupling& so,
                                  const ContinuumState& state);

struct KGridPolicy {
  double k_min_extent = 20.0;   // grid reaches at least max(this, 3 sqrt(2 U0))
  double base_dk = 0.05;
  double tolerance = 1e-10;     // absolute cubic-interpolation error per coefficient
  double tail_tolerance = 1e-8; // stop once |G_1| + |G_-1| and |M| stay below this
  double tail_dk = 0.5;         // initial panel width beyond the mandatory extent
  double k_cap = 5000.0;
  double min_width = 1e-7;

  static KGridPolicy from(const KGridSpec& spec);
};

/// Coefficients sampled on an adaptively refined, panelled k-grid.
/// Each panel holds the four Chebyshev nodes of its cubic interpolant, so no
/// sample ever sits on k = 0 or on the band edge sqrt(2 U0) (always a panel boundary).
class SpectralAmplitudes {
 public:
  struct Panel {
    double lo = 0.0;
    double hi = 0.0;
    std::array<double, 4> k{};
    std::array<Coefficients, 4> c{};
  };

  SpectralAmplitudes(std::vector<Panel> panels, SOCoupling so, InitialState source, PotentialSpec post);

  std::span<const Panel> panels() const { return panels_; }
  /// All sample wavenumbers, strictly increasing.
  std::vector<double> samples() const;
  /// Cubic interpolant; zero outside [0, k_end()].
  Coefficients operator()(double k) const;
  Coefficients interpolate(std::size_t panel, double k) const;
  std::size_t panel_index(double k) const;

  double k_end() const { return panels_.back().hi; }
  const SOCoupling& coupling() const { return so_; }
  InitialState source() const { return source_; }
  const PotentialSpec& potential() const { return post_; }

  /// int (G_1^2 + |G_-1|^2) dk.
  double parseval() const;
  /// 2 int Re[G_1^* G_-1] dk, the conserved spatial integral of sigma_x.
  double spin_x_integral() const;
  /// Largest |G_1| + |G_-1| + |M| over panels starting at or after k.
  double envelope_beyond(double k) const;

 private:
  std::vector<Panel> panels_;
  std::vector<double> suffix_envelope_;
  SOCoupling so_;
  InitialState source_;
  PotentialSpec post_;
};

SpectralAmplitudes compute_coefficients(const InitialProfile& profile, const SOCoupling& so,
                                        const PotentialSpec& post, const KGridPolicy& policy);

/// int G_sigma(k) phi_k(x) dk at t = 0 (upper, lower / i). Should reproduce gauged_initial.
GaugedPair reconstruct_t0(const SpectralAmplitudes& amplitudes, double x);

/// k,G1,Im_Gm1,M at every sample.
void write_amplitudes_csv(std::ostream& out, const SpectralAmplitudes& amplitudes);

}  // namespace qtunnel
