// Independent 1D oracle at a = 0: Frobenius series at the horizon
// (smooth-extension branch) and at the conformal boundary, bridged by
// adaptive integration, matched through the Wronskian; Newton in lambda.

#ifndef KAQNF_FROBENIUS_HPP_
#define KAQNF_FROBENIUS_HPP_

#include <complex>
#include <stdexcept>
#include <vector>

#include "kaqnf/bessel_bc.hpp"
#include "kaqnf/geometry.hpp"

namespace kaqnf {

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SeriesRadius : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  std::complex<double> lambda;
  double matching_residual = 0.0;  // |normalized Wronskian| at the root
  int iterations = 0;
};

// Normalized Wronskian mismatch W(lambda) between the horizon-regular
// and the boundary-selected solutions of the separated radial ODE
//   -(Delta_r R')' + [l(l+1) + (nu^2 - 9/4) r^2 - lambda^2 r^4 /
//    Delta_r] R = 0.
// bc selects the boundary branch when 0 < nu < 1; pass nullptr for
// nu >= 1 (decaying branch s^{3/2+nu}).
std::complex<double> oracle_wronskian_a0(const BlackHoleParams& p, int ell,
                                         std::complex<double> lambda,
                                         const BoundaryCondition* bc,
                                         int series_order = 60);

OracleResult frobenius_oracle_a0(const BlackHoleParams& p, int ell,
                                 std::complex<double> lambda_init,
                                 const BoundaryCondition* bc = nullptr,
                                 int series_order = 60);

// Coarse |W| landscape scan over a rectangle, local minima refined by
// Newton; duplicates merged.  Used to seed oracle fixtures.
std::vector<OracleResult> oracle_scan_a0(const BlackHoleParams& p, int ell,
                                         const BoundaryCondition* bc,
                                         double re_min, double re_max,
                                         double im_min, double im_max,
                                         int n_re, int n_im,
                                         int series_order = 60);

}  // namespace kaqnf

#endif  // KAQNF_FROBENIUS_HPP_
