#include "kaqnf/bessel_k.hpp"

#include <cmath>

namespace kaqnf {

namespace {

using cd = std::complex<double>;

constexpr double kLossTol = 1e-8;
constexpr double kSeriesRadius = 9.0;

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-8; }

}  // namespace

cd bessel_i_series(double nu, cd w) {
  // I_nu(w) = (w/2)^nu sum_k (w^2/4)^k / (k! Gamma(nu + k + 1)).
  const cd half = 0.5 * w;
  const cd q = half * half;
  cd term = 1.0 / std::tgamma(nu + 1.0);
  cd sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (nu + static_cast<double>(k)));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return std::pow(half, nu) * sum;
}

cd bessel_k(double nu, cd w) {
  nu = std::abs(nu);  // K_{-nu} = K_nu
  if (near_integer(nu))
    throw EvaluationLoss("bessel_k: integer order requires the log branch");
  if (w.real() < -1e-14)
    throw EvaluationLoss("bessel_k: argument outside the right half-plane");

  const double aw = std::abs(w);
  if (aw <= kSeriesRadius) {
    const cd im = bessel_i_series(-nu, w);
    const cd ip = bessel_i_series(nu, w);
    const cd k = (M_PI / (2.0 * std::sin(nu * M_PI))) * (im - ip);
    // The two I's grow like e^{|Re w|} while K decays; the difference
    // loses that many digits.
    const double big = std::max(std::abs(im), std::abs(ip));
    if (std::abs(k) == 0.0 ||
        big / std::abs(k) * 1e-15 > kLossTol)
      throw EvaluationLoss("bessel_k: series cancellation beyond tolerance");
    return (M_PI / (2.0 * std::sin(nu * M_PI))) * (im - ip);
  }

  // Poincare expansion K_nu(w) ~ sqrt(pi/(2w)) e^{-w} sum_k a_k(nu)/w^k,
  // truncated at the smallest term.  The optimal truncation error is
  // O(e^{-2 Re w}); refuse when that is above tolerance.
  const double mu = 4.0 * nu * nu;
  cd term = 1.0;
  cd sum = term;
  double prev = 1.0;
  double trunc = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double num = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
    term *= num / (8.0 * static_cast<double>(k) * w);
    const double mag = std::abs(term);
    if (mag >= prev) {  // divergence onset: stop before this term
      trunc = mag;
      break;
    }
    sum += term;
    prev = mag;
    trunc = mag;
    if (mag < 1e-18) break;
  }
  const cd pre = std::sqrt(M_PI / (2.0 * w)) * std::exp(-w);
  if (trunc > kLossTol)
    throw EvaluationLoss("bessel_k: asymptotic truncation beyond tolerance");
  return pre * sum;
}

cd bessel_k_deriv(double nu, cd w) {
  return -0.5 * (bessel_k(nu - 1.0, w) + bessel_k(nu + 1.0, w));
}

}  // namespace kaqnf
