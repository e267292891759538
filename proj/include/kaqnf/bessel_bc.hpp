// Boundary conditions at the conformal boundary for 0 < nu < 1:
// traces gamma_-/gamma_+, the one-dimensional model problem built from
// x^{1/2} K_nu, the Lopatinskii nondegeneracy audit over the spectral
// sector, and the discrete boundary rows consumed by the pencil.

#ifndef KAQNF_BESSEL_BC_HPP_
#define KAQNF_BESSEL_BC_HPP_

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaqnf/geometry.hpp"

namespace kaqnf {

struct UnsupportedOrder : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EllipticityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditionedFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BcKind { Dirichlet, Neumann, Robin, LambdaRobin };

// T(lambda)u = 0 at the boundary, where
//   Dirichlet:    gamma_- u = 0                     (order mu = 1 - nu)
//   Neumann:      gamma_+ u = 0                     (order mu = 1 + nu)
//   Robin:        gamma_+ u + beta gamma_- u = 0
//   LambdaRobin:  gamma_+ u + (beta0 + beta1 lambda) gamma_- u = 0
struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  std::complex<double> beta{};
  std::complex<double> beta0{}, beta1{};
  double mu = 0.0;

  static BoundaryCondition dirichlet(double nu);
  static BoundaryCondition neumann(double nu);
  static BoundaryCondition robin(std::complex<double> beta, double nu);
  static BoundaryCondition lambda_robin(std::complex<double> beta0,
                                        std::complex<double> beta1, double nu);
  std::string name() const;
};

// Indicial exponents (3/2 - nu, 3/2 + nu) of the conjugated operator.
std::pair<double, double> indicial_pair(double nu);

// One-dimensional model problem -u'' + (nu^2 - 1/4)/x^2 u + A0 u = 0.
// zeta = -i sqrt(A0) with Im zeta < 0 when A0 is off the branch cut.
struct ModelProblem {
  double nu;
  std::complex<double> A0;
  std::complex<double> zeta;
};

// Throws EllipticityFailure if A0 lies on (-inf, 0].
ModelProblem make_model_problem(double nu, std::complex<double> A0);

struct ModelValue {
  std::complex<double> u;
  std::complex<double> du;
};

// Decaying model solution u(x) = x^{1/2} K_nu(sqrt(A0) x) and derivative.
ModelValue model_solution(const ModelProblem& mp, double x);

// Two-sided expansion coefficients: u = a_- x^{1/2-nu}(1 + O(x^2))
//                                     + a_+ x^{1/2+nu}(1 + O(x^2)).
// Closed Gamma-function forms from the K_nu = I_{-nu} - I_nu splitting.
std::pair<std::complex<double>, std::complex<double>> model_coeffs(
    const ModelProblem& mp);

// Least-squares trace extraction from boundary-side samples of a slice
// function u(s) ~ gamma_- s^{3/2-nu}(1+..) + gamma_+/(2 nu) s^{3/2+nu}(1+..).
// gamma_+ is normalized as the product reading s^{1-2nu} d_s(s^{nu-3/2} u).
struct TraceFit {
  std::complex<double> gamma_minus;
  std::complex<double> gamma_plus;
  double cond;  // condition number of the fit basis
};

TraceFit traces(double nu, const std::vector<double>& xs,
                const std::vector<std::complex<double>>& us);

// Boundary symbol A(0, theta; eta; lambda) of the Kerr-AdS pencil:
// A = thth xi_theta^2 + phiphi xi_phi^2 - 2 lambda xi_phi tphi
//     + lambda^2 tt, coefficients frozen at s = 0.
struct BoundarySymbolCoeffs {
  double thth;    // Delta_theta
  double phiphi;  // (1-alpha)^2 / (Delta_theta sin^2 theta)
  double tphi;    // (1-alpha)^2 a / Delta_theta
  double tt;      // (1-alpha)^2 (cf^2 - 2 cf) + (1-alpha)^2 a^2 sin^2/Dth
};

BoundarySymbolCoeffs kerr_ads_boundary_symbol(
    const BlackHoleParams& p, double theta, const ExtensionVariant& variant = {});

std::complex<double> boundary_symbol_value(const BoundarySymbolCoeffs& c,
                                           double xi_theta, double xi_phi,
                                           std::complex<double> lambda);

// Spectral sector: lambda = |lambda| e^{i phase}, phase in
// [angle_min, angle_max], a closed subsector of the upper half-plane
// disjoint from R \ {0}.
struct Sector {
  double angle_min = 0.05;
  double angle_max = M_PI - 0.05;
};

struct LopatinskiiWitness {
  double theta;
  double xi_theta;
  double xi_phi;
  std::complex<double> lambda;
  std::complex<double> A0;
  double margin;
};

struct LopatinskiiReport {
  double nu;
  std::string bc_name;
  std::size_t n_samples = 0;
  double min_margin = 0.0;
  bool passed = false;
  std::optional<LopatinskiiWitness> witness;  // present on failure
};

// Samples (theta, eta, lambda) on the sphere |eta|^2 + |lambda|^2 = 1
// intersected with the sector and checks |T(lambda) u_model| / scale
// stays above 1e-6 for the decaying model solution.
LopatinskiiReport lopatinskii_check(double nu, const BoundaryCondition& bc,
                                    const BlackHoleParams& p,
                                    const Sector& sector,
                                    std::size_t n_samples, std::uint64_t seed,
                                    const ExtensionVariant& variant = {});

std::string lopatinskii_report_json(const LopatinskiiReport& rep);

// A Robin coefficient tuned to annihilate the model solution at one
// sector sample; lopatinskii_check must fail for it and report a witness.
std::complex<double> degenerate_robin_beta(double nu, const BlackHoleParams& p,
                                           const Sector& sector,
                                           std::uint64_t seed);

// Discrete boundary rows for the pencil: the radial collocation row of
// the unknown v (value row e_0 and s-derivative row d0 at the boundary
// node), combined per the boundary condition and split by powers of
// lambda.  Throws UnsupportedOrder when the bc order mu is inconsistent.
struct BoundaryRows {
  std::vector<std::complex<double>> lambda0;
  std::vector<std::complex<double>> lambda1;
};

BoundaryRows boundary_rows(double nu, const BoundaryCondition& bc,
                           const std::vector<double>& deriv_row);

}  // namespace kaqnf

#endif  // KAQNF_BESSEL_BC_HPP_
