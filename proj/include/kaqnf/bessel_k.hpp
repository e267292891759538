// Modified Bessel function K_nu of complex argument (right half-plane)
// for noninteger real order, by ascending series at small |w| and the
// Poincare asymptotic expansion at large |w|.  Accuracy is monitored:
// series cancellation and asymptotic truncation are both estimated, and
// EvaluationLoss is thrown when the estimate exceeds 1e-8.

#ifndef KAQNF_BESSEL_K_HPP_
#define KAQNF_BESSEL_K_HPP_

#include <complex>
#include <stdexcept>

namespace kaqnf {

struct EvaluationLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ascending series for I_nu(w); nu real (may be negative, noninteger).
std::complex<double> bessel_i_series(double nu, std::complex<double> w);

// K_nu(w) for Re w >= 0, 0 < |nu| < 2 noninteger.
std::complex<double> bessel_k(double nu, std::complex<double> w);

// d/dw K_nu(w) = -(K_{nu-1}(w) + K_{nu+1}(w)) / 2.
std::complex<double> bessel_k_deriv(double nu, std::complex<double> w);

}  // namespace kaqnf

#endif  // KAQNF_BESSEL_K_HPP_
