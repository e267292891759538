// Quadratic eigenvalue solve of the discretized pencil, convergence
// filtering across resolutions, and the extension-invariance tests.

#ifndef KAQNF_QNF_SOLVER_HPP_
#define KAQNF_QNF_SOLVER_HPP_

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaqnf/pencil.hpp"

namespace kaqnf {

struct LinearizationSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigurationInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Search box inside the meromorphy half-plane Im lambda > -kappa(1/2+k).
struct Window {
  double im_min = 0.0;
  double im_max = 0.0;
  double re_abs_max = 0.0;

  static Window default_for(double kappa, int k_threshold);
  bool contains(std::complex<double> lambda) const {
    return lambda.imag() > im_min && lambda.imag() <= im_max &&
           std::abs(lambda.real()) <= re_abs_max;
  }
};

struct QnfResult {
  std::complex<double> lambda;
  double residual = 0.0;
  bool converged = false;
  bool halfplane_ok = false;
};

// Eigenvalues of A0 + lambda A1 + lambda^2 A2 inside the window.  The
// pencil commutes with the equatorial reflection c -> -c, so the solve
// is done per parity block at half the dimension; residuals are then
// evaluated on the full pencil through inverse iteration at each
// candidate, which independently validates the reduction.
std::vector<QnfResult> solve_qep(const QnfPencil& pen, const Window& win);

// Smallest singular value of P(lambda) (invertibility scans).
double pencil_smallest_singular(const QnfPencil& pen,
                                std::complex<double> lambda);

// Pairs eigenvalues across two resolutions; keeps pairs with
// |dlambda| < tol (1 + |lambda|) and both residuals < 1e-8; the
// returned results carry the coarse-grid lambda with converged = true.
std::vector<QnfResult> convergence_filter(const std::vector<QnfResult>& coarse,
                                          const std::vector<QnfResult>& fine,
                                          double kappa, int k_threshold,
                                          double tol = 1e-6);

// Full pipeline helper: assemble + solve at two resolutions and filter.
std::vector<QnfResult> converged_qnfs(const BlackHoleParams& p,
                                      const ModeSpec& mode, std::size_t Nr1,
                                      std::size_t Nt1, std::size_t Nr2,
                                      std::size_t Nt2, double delta,
                                      const ExtensionVariant& variant = {});

struct InvarianceOutcome {
  // Displacements are max over the base set of the nearest-neighbor
  // distance, normalized by 1 + |lambda|.
  double max_displacement_delta = 0.0;   // under delta1 -> delta2
  double max_displacement_fplus = 0.0;   // under the f_plus variant
  std::size_t n_matched = 0;
};

// Theorem-3 style test: converged QNFs must be unchanged (to filter
// tolerance) under moving the artificial boundary and under a timelike
// rescaled extension.
InvarianceOutcome invariance_test(const BlackHoleParams& p,
                                  const ModeSpec& mode, std::size_t Nr1,
                                  std::size_t Nt1, std::size_t Nr2,
                                  std::size_t Nt2, double delta1, double delta2,
                                  const ExtensionVariant& alt_variant);

// CSV row block in the documented schema.
std::string qnf_table_csv(const BlackHoleParams& p, const ModeSpec& mode,
                          double delta, const ExtensionVariant& variant,
                          std::size_t N_r, std::size_t N_theta,
                          const std::vector<QnfResult>& results);

}  // namespace kaqnf

#endif  // KAQNF_QNF_SOLVER_HPP_
