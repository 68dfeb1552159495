#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtunnel/evolve.hpp"
#include "qtunnel/model.hpp"

namespace qtunnel {

struct PrecessionBaseline {
  double angle = 0.0;  // X / xi
  double px = 0.0;
  double py = 0.0;
  double pz = 1.0;
};

/// Spin of a classical particle that precessed over a distance X.
PrecessionBaseline classical_precession(double X, const SOCoupling& so);

struct WeakCouplingEstimate {
  double py = 0.0;
  double ratio = 0.0;  // |psi~_-1 / psi~_1|
  unsigned flags = kNoFlags;
};

/// Threshold above which the first-order expansion is flagged.
inline constexpr double kWeakRatioLimit = 0.1;

/// -sin(x/xi) + 2 cos(x/xi) Im(psi~_-1 / psi~_1), from a gauged sample.
WeakCouplingEstimate py_weak(const SpinorSample& gauged, const SOCoupling& so);
WeakCouplingEstimate py_weak(const Simulation& sim, double x, double t);

struct ProbePoint {
  double x = 0.0;
  double t = 0.0;
};

/// x in {8, 10, 12} pi, t in {1.5, 2, 2.5} x / v.
std::vector<ProbePoint> far_field_probes(double velocity);

struct LengthMethod {
  enum class Kind { MomentLimit, FiniteXi };
  Kind kind = Kind::MomentLimit;
  double xi = std::numeric_limits<double>::infinity();

  static LengthMethod moment_limit() { return {}; }
  static LengthMethod finite_xi(double xi) { return {Kind::FiniteXi, xi}; }
};

std::string to_string(const LengthMethod& method);

struct TunnelingLengthResult {
  double delta_x = 0.0;  // mean over probes
  double spread = 0.0;   // max - min over probes
  std::vector<ProbePoint> probes;
  std::vector<double> samples;
  LengthMethod method;
  unsigned flags = kNoFlags;

  double relative_spread() const { return spread / std::abs(delta_x); }
};

/// Relative spread above which a result is flagged unreliable.
inline constexpr double kSpreadLimit = 0.1;

/// Additional displacement delta x sampled at far-field probes.
/// MomentLimit uses -2 Re(N_M / N_1) with the xi-free spectrum of config;
/// FiniteXi(xi) uses -2 xi Im(psi~_-1 / psi~_1). config.so is ignored.
/// Empty probes default to far_field_probes(k0).
TunnelingLengthResult tunneling_length(const SimulationConfig& config, std::span<const ProbePoint> probes,
                                       LengthMethod method);
TunnelingLengthResult tunneling_length(const Simulation& sim, std::span<const ProbePoint> probes);

/// |t|^2 of the bare barrier at E0 of the step potential with the same a1 and U0.
double scan_transparency(const PotentialSpec& post);

struct ScanRow {
  double U0 = 0.0;
  double d = 0.0;
  double transparency = 0.0;
  double delta_x = 0.0;
  double spread = 0.0;
  unsigned flags = kNoFlags;
};

/// Barriers of width d at fixed U0.
std::vector<PotentialSpec> width_family(double a1, double U0, std::span<const double> widths);
/// Barriers of height U0 at fixed width.
std::vector<PotentialSpec> height_family(double a1, double d, std::span<const double> heights);

/// One MomentLimit delta x per barrier, rows sorted by transparency descending.
std::vector<ScanRow> transparency_scan(const SimulationConfig& base, std::span<const PotentialSpec> barriers);

struct PeakReport {
  double X = 0.0;
  double t_main = 0.0;
  double rho_main = 0.0;
  int post_peak_extrema = 0;
  int pre_peak_extrema = 0;  // maxima above the relative threshold inside the precursor window
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool precursor_sign_opposite = false;
};

struct PeakOptions {
  double dt = 0.1;
  double span = 3.0;               // series covers (0, span X / v]
  double relative_threshold = 0.01;
  double window_lo = 0.2;          // precursor window in units of t_main
  double window_hi = 0.8;
  double refine_tolerance = 1e-6;
};

struct FarFieldSeries {
  std::vector<double> t;
  std::vector<double> rho;
  std::vector<double> sy;
};

FarFieldSeries far_field_series(const Simulation& sim, double X, std::span<const double> ts);

/// Peak statistics from a sampled series; t_main is the discrete maximum.
/// Throws Error(NoPeak) when rho < 1e-10 throughout.
PeakReport summarize_series(const FarFieldSeries& series, double X, const PeakOptions& options = {});

/// summarize_series on the default time grid followed by golden-section refinement of t_main.
PeakReport peak_report(const Simulation& sim, double X, const PeakOptions& options = {});
PeakReport peak_report(const Simulation& sim, double X, const FarFieldSeries& series,
                       const PeakOptions& options = {});
std::vector<double> peak_time_grid(const Simulation& sim, double X, const PeakOptions& options = {});

/// delta x / v.
double delta_t(const TunnelingLengthResult& result, double velocity);

struct DelayComparison {
  double delta_t = 0.0;
  double group_delay = 0.0;
  double energy = 0.0;
};

/// delta t next to the single-barrier group delay at E0; no relation is implied.
DelayComparison compare_delays(const Simulation& sim, const TunnelingLengthResult& result);

/// U0,d,transparency,delta_x,spread,flags
void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows);
/// X,t_main,n_post,precursor_opposite
void write_peaks_csv(std::ostream& out, std::span<const PeakReport> reports);

}  // namespace qtunnel
