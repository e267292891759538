// Symbol evaluation and rescaled Hamiltonian dynamics on the
// fiber-radially compactified cotangent bundle, plus the numerical
// source/sink and nontrapping certificates.

#ifndef KAQNF_PHASE_SPACE_HPP_
#define KAQNF_PHASE_SPACE_HPP_

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaqnf/geometry.hpp"

namespace kaqnf {

struct ChartViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point of the compactified cotangent bundle in the |xi_r|-projective
// chart.  rho = |xi_r|^{-1}, rho = 0 encodes fiber infinity.
struct PhasePoint {
  double r;
  double theta;
  double phi;
  double rho;           // >= 0
  double xi_hat_theta;  // xi_theta / |xi_r|
  double xi_hat_phi;    // xi_phi / |xi_r|
  int sigma;            // sign of xi_r, +1 or -1

  static PhasePoint make(double r, double theta, double phi, double rho,
                         double xht, double xhp, int sigma);
};

struct SymbolValue {
  double p;     // real part of the symbol p - iq
  double q;     // imaginary part
  double p1;    // angular kinetic part, >= 0
  double p2;    // radial cross part
  double rho1;  // rho^2 (1 + p1 + p2) in projective scaling
};

// Full symbol at a finite-momentum point, z the (semiclassical) spectral
// parameter.  Momenta are the Boyer-Lindquist-extended (xi_r, xi_theta,
// xi_phi).
SymbolValue symbol_finite(const BlackHoleParams& p, double r, double theta,
                          double xi_r, double xi_theta, double xi_phi,
                          std::complex<double> z,
                          const ExtensionVariant& variant = {});

// Symbol in the projective chart: returns rho^2 (p - iq) evaluated at
// xi = (sigma, xi_hat_theta, xi_hat_phi) / rho.  At rho = 0 this is the
// homogeneous degree-2 limit of the non-semiclassical symbol.
SymbolValue symbol(const BlackHoleParams& p, const PhasePoint& pt,
                   std::complex<double> z, const ExtensionVariant& variant = {});

// Rescaled Hamilton field |xi_r|^{-1} H_p of the homogeneous symbol in
// chart coordinates (r, theta, phi, rho, xi_hat_theta, xi_hat_phi);
// closed-form partials, no finite differences.
struct HamiltonField {
  double dr;
  double dtheta;
  double dphi;
  double drho;
  double dxi_hat_theta;
  double dxi_hat_phi;
};

HamiltonField hamilton_field(const BlackHoleParams& p, const PhasePoint& pt);

// rho1 = rho^2 + p1(hat) + p2(hat); vanishes exactly on L+-.
double rho1_value(const BlackHoleParams& p, const PhasePoint& pt);

// Directional derivative of rho1 along the rescaled Hamilton field,
// assembled from closed-form gradients.
double rho1_derivative(const BlackHoleParams& p, const PhasePoint& pt);

enum class FlowTerminal {
  ConvergedToLplus,
  ConvergedToLminus,
  ExitedDeltaRegion,
  MaxTime,
  ChartExit,
  StepFailure,
};

std::string flow_terminal_name(FlowTerminal t);

struct FlowOutcome {
  FlowTerminal terminal;
  double time;
  std::vector<PhasePoint> trajectory;  // sampled states, start first
};

struct FlowConfig {
  double delta = 0.05;       // artificial-boundary level: exit at Delta_r <= -delta
  double eps_sink = 1e-8;    // rho1 threshold for "converged to L+-"
  double t_max = 1e3;
  double rho_chart_max = 1e6;  // |xi_r| -> 0 guard
  bool record_trajectory = false;
};

// direction: +1 integrates the field forward, -1 backward.
FlowOutcome integrate_flow(const BlackHoleParams& p, const PhasePoint& start,
                           int direction, const FlowConfig& cfg);

// Deterministic RNG for reproducible audits; bit-stable across
// platforms, unlike std::uniform_real_distribution.
class AuditRng {
 public:
  explicit AuditRng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}
  double uniform();                    // [0, 1)
  double uniform(double lo, double hi);
  int sign();

 private:
  std::uint64_t next();
  std::uint64_t state_;
};

struct AuditFailure {
  PhasePoint point;
  double value;        // margin or classification detail
  std::string detail;
};

struct SourceSinkReport {
  std::size_t n_samples = 0;
  double worst_margin = 0.0;   // min over samples of the certified margin
  double fitted_c = 0.0;       // fitted O(rho1^{3/2}) constant
  std::vector<AuditFailure> failures;
  bool passed() const { return failures.empty(); }
};

// Samples points with rho1 below `neighborhood` around L+ and L- and
// checks +-(d rho1 / dt) >= 2 (d_r Delta_r) rho1 - C rho1^{3/2}.
SourceSinkReport source_sink_audit(const BlackHoleParams& p,
                                   std::size_t n_samples, double neighborhood,
                                   std::uint64_t seed, bool parallel = true);

struct NontrappingReport {
  std::size_t n_samples = 0;
  std::size_t n_classified = 0;
  double fraction_classified = 0.0;
  std::vector<AuditFailure> failures;
};

NontrappingReport nontrapping_audit(const BlackHoleParams& p,
                                    std::size_t n_samples,
                                    const FlowConfig& cfg, std::uint64_t seed,
                                    bool parallel = true);

struct CharacteristicBoundReport {
  std::size_t n_samples = 0;
  double min_normalized_p = 0.0;  // over sampled points with Delta_r > a^2
  std::size_t n_violations = 0;
};

CharacteristicBoundReport characteristic_bound_check(const BlackHoleParams& p,
                                                     std::size_t n_samples,
                                                     std::uint64_t seed);

std::string source_sink_report_json(const SourceSinkReport& rep);
std::string nontrapping_report_json(const NontrappingReport& rep);

}  // namespace kaqnf

#endif  // KAQNF_PHASE_SPACE_HPP_
