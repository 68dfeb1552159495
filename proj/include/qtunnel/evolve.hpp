#pragma once

#include <complex>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qtunnel/error.hpp"
#include "qtunnel/model.hpp"
#include "qtunnel/spectral.hpp"

namespace qtunnel {

enum class Frame { Gauged, Lab };

struct SpinorSample {
  double x = 0.0;
  double t = 0.0;
  Frame frame = Frame::Gauged;
  std::complex<double> up;
  std::complex<double> down;
};

struct ObservableRecord {
  double x = 0.0;
  double t = 0.0;
  double rho = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  std::optional<double> py;  // absent when rho < kDensityFloor
  unsigned flags = kNoFlags;
};

/// Below this density the polarization is not reported.
inline constexpr double kDensityFloor = 1e-12;

struct EvolveOptions {
  double nodes_per_2pi = 8.0;     // Gauss nodes per 2 pi of the phase k^2 t / 2 + k x
  double tail_tolerance = 1e-8;   // integration-by-parts bound on the truncated k tail
  std::size_t node_cap = 20'000'000;
  double node_multiplier = 1.0;   // > 1 to run convergence checks
  double k_limit = std::numeric_limits<double>::infinity();  // hard upper end of the k integral
};

enum Channel : unsigned {
  kChannelUpper = 1u << 0,
  kChannelLower = 1u << 1,
  kChannelMoment = 1u << 2,
};

/// Oscillatory k-quadrature of  int c(k) phi_k(x) exp(-i k^2 t / 2) dk  for the
/// coefficient channels of a SpectralAmplitudes set.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(std::shared_ptr<const SpectralAmplitudes> amplitudes,
                              EvolveOptions options = {});

  struct Integrals {
    std::complex<double> upper;   // from G_1
    std::complex<double> lower;   // from G_-1 / i
    std::complex<double> moment;  // from M
  };

  /// Throws Error(PhaseUnresolved) if the node cap is exceeded.
  std::vector<Integrals> integrals(std::span<const double> xs, double t,
                                   unsigned channels = kChannelUpper | kChannelLower) const;

  /// Truncation wavenumber used for points up to x_far at time t.
  double cutoff(double x_far, double t) const;
  std::size_t node_count(double x_far, double t) const;

  /// Gauged spinor (psi~_1, psi~_-1) at (x, t).
  SpinorSample evolve_gauged(double x, double t) const;
  std::vector<SpinorSample> evolve_gauged(std::span<const double> xs, double t) const;

  const SpectralAmplitudes& amplitudes() const { return *amplitudes_; }
  const EvolveOptions& options() const { return options_; }
  SpectralPropagator with_options(EvolveOptions options) const { return SpectralPropagator(amplitudes_, options); }

 private:
  struct Node {
    double k;
    double weight;
    std::size_t panel;
  };
  std::vector<Node> build_nodes(double x_far, double t) const;

  std::shared_ptr<const SpectralAmplitudes> amplitudes_;
  EvolveOptions options_;
};

/// psi_lab = exp(-i sigma_x x / 2xi) psi_gauged.
SpinorSample to_lab(const SpinorSample& gauged, const SOCoupling& so);

/// rho, sigma_i = psi^dag sigma_i psi, p_y = sigma_y / rho. Expects a lab-frame sample.
ObservableRecord observables(const SpinorSample& lab);

/// Bound states, amplitudes and propagator for one validated configuration.
class Simulation {
 public:
  explicit Simulation(const SimulationConfig& config, EvolveOptions options = {});

  const SimulationConfig& config() const { return config_; }
  std::span<const BoundState> bound_states() const { return bound_; }
  const InitialProfile& profile() const { return profile_; }
  const SpectralAmplitudes& amplitudes() const { return *amplitudes_; }
  std::shared_ptr<const SpectralAmplitudes> shared_amplitudes() const { return amplitudes_; }
  const SpectralPropagator& propagator() const { return propagator_; }

  SpinorSample gauged(double x, double t) const;
  std::vector<SpinorSample> gauged(std::span<const double> xs, double t) const;
  ObservableRecord observe(double x, double t) const;
  std::vector<ObservableRecord> observe(std::span<const double> xs, double t) const;

 private:
  SimulationConfig config_;
  std::vector<BoundState> bound_;
  InitialProfile profile_;
  std::shared_ptr<const SpectralAmplitudes> amplitudes_;
  SpectralPropagator propagator_;
};

/// Survival probability int_0^a1 rho dx on a fixed Gauss grid.
double survival(const Simulation& sim, double t);

struct WellPolarization {
  std::optional<double> py;  // absent with kDensityUnderflow
  double survival = 0.0;
  double spin_y = 0.0;
  unsigned flags = kNoFlags;
};

/// p_y^[w](t): int_0^a1 sigma_y dx / int_0^a1 rho dx.
WellPolarization well_polarization(const Simulation& sim, double t);

/// Fixed composite Gauss grid on (0, a1) used by survival and well_polarization.
struct WellQuadrature {
  std::vector<double> x;
  std::vector<double> w;
};
WellQuadrature well_quadrature(double a1);
/// Same ratio from records already evaluated at the quadrature nodes.
WellPolarization well_polarization(std::span<const ObservableRecord> records, const WellQuadrature& quadrature);

/// First time at which survival(t) / survival(0) drops to 1/e. Searches up to t_limit.
double lifetime(const Simulation& sim, double t_limit = 400.0);

/// Records ordered by (t, x).
std::vector<ObservableRecord> field_snapshot(const Simulation& sim, std::span<const double> xs,
                                             std::span<const double> ts);

/// int_0^inf sigma_x dx evaluated in x-space. The spectrum is cut at the
/// configured k_max and the x-domain covers the packet escaping below that cut.
double integrated_spin_x(const Simulation& sim, double t);

/// Header `x,t,rho,sx,sy,sz,py,flags`.
void write_observables_csv(std::ostream& out, std::span<const ObservableRecord> records);

}  // namespace qtunnel
