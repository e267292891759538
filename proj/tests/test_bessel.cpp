#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "kaqnf/bessel_bc.hpp"
#include "kaqnf/bessel_k.hpp"
#include "kaqnf/geometry.hpp"

using namespace kaqnf;
using cd = std::complex<double>;

TEST_CASE("K_{1/2} closed form in both evaluation regimes") {
  // K_{1/2}(w) = sqrt(pi / (2w)) exp(-w), valid in the whole right
  // half-plane; exercises the ascending series (|w| small) and the
  // asymptotic expansion (|w| large).
  const cd args[] = {{0.5, 0.0}, {2.0, 1.5}, {0.3, -3.0},
                     {14.0, 0.0}, {15.0, 9.0}, {20.0, -6.0}};
  for (const cd w : args) {
    const cd exact = std::sqrt(M_PI / (2.0 * w)) * std::exp(-w);
    const cd got = bessel_k(0.5, w);
    CHECK(std::abs(got - exact) < 1e-10 * std::abs(exact));
  }
}

TEST_CASE("K_nu satisfies the modified Bessel equation") {
  // w^2 K'' + w K' - (w^2 + nu^2) K = 0 with K'' from differencing the
  // analytic first derivative.
  for (double nu : {0.3, 0.5, 0.75, 1.5}) {
    for (const cd w : {cd{1.0, 0.5}, cd{3.0, -2.0}, cd{0.8, 0.0}}) {
      const double h = 1e-5;
      const cd k = bessel_k(nu, w);
      const cd kp = bessel_k_deriv(nu, w);
      const cd kpp =
          (bessel_k_deriv(nu, w + h) - bessel_k_deriv(nu, w - h)) / (2.0 * h);
      const cd res = w * w * kpp + w * kp - (w * w + nu * nu) * k;
      CHECK(std::abs(res) < 1e-5 * std::abs(w * w * k));
    }
  }
}

TEST_CASE("derivative identity and reflection in the order") {
  const cd w{1.3, 0.4};
  CHECK(std::abs(bessel_k(0.4, w) - bessel_k(-0.4, w)) < 1e-12);
  // FD check of the analytic derivative.
  const double h = 1e-6;
  const cd fd = (bessel_k(0.4, w + h) - bessel_k(0.4, w - h)) / (2.0 * h);
  CHECK(std::abs(fd - bessel_k_deriv(0.4, w)) < 1e-8);
}

TEST_CASE("evaluation-loss guards") {
  CHECK_THROWS_AS(bessel_k(1.0, cd{1.0, 0.0}), EvaluationLoss);
  CHECK_THROWS_AS(bessel_k(0.5, cd{-1.0, 0.1}), EvaluationLoss);
}

TEST_CASE("model solution solves the model ODE") {
  // -u'' + (nu^2 - 1/4)/x^2 u + A0 u = 0, second derivative by
  // differencing the analytic first derivative.
  for (double nu : {0.25, 0.5, 0.9}) {
    const auto mp = make_model_problem(nu, cd{1.2, 0.7});
    for (double x : {0.4, 1.0, 2.5}) {
      const double h = 1e-5;
      const auto v = model_solution(mp, x);
      const cd upp =
          (model_solution(mp, x + h).du - model_solution(mp, x - h).du) /
          (2.0 * h);
      const cd res =
          -upp + (nu * nu - 0.25) / (x * x) * v.u + mp.A0 * v.u;
      CHECK(std::abs(res) < 1e-6 * (1.0 + std::abs(v.u)));
    }
  }
  CHECK_THROWS_AS(make_model_problem(0.5, cd{-2.0, 0.0}), EllipticityFailure);
}

TEST_CASE("model coefficients match the Gamma-function closed form") {
  for (double nu : {0.25, 0.5, 0.75}) {
    const cd A0{0.8, 1.1};
    const auto mp = make_model_problem(nu, A0);
    const auto [am, ap] = model_coeffs(mp);
    // a_+ / a_- = -Gamma(1-nu)/Gamma(1+nu) (A0/4)^nu.
    const cd ratio =
        -std::tgamma(1.0 - nu) / std::tgamma(1.0 + nu) * std::pow(A0 / 4.0, nu);
    CHECK(std::abs(ap / am - ratio) < 1e-10 * std::abs(ratio));
  }
}

TEST_CASE("trace fit recovers the model expansion coefficients") {
  // Slice samples u(s) = s * u_model(s); then gamma_- = a_- and
  // gamma_+ = 2 nu a_+ in the product normalization.
  for (double nu : {0.3, 0.5, 0.7}) {
    const auto mp = make_model_problem(nu, cd{1.0, 0.4});
    const auto [am, ap] = model_coeffs(mp);
    std::vector<double> xs;
    std::vector<cd> us;
    for (int i = 0; i < 10; ++i) {
      const double x = 0.004 + 0.001 * i;
      xs.push_back(x);
      us.push_back(x * model_solution(mp, x).u);
    }
    const auto fit = traces(nu, xs, us);
    CHECK(std::abs(fit.gamma_minus - am) < 1e-8 * std::abs(am));
    // gamma_plus rides on the subdominant branch; its extraction loses
    // roughly x^{-2 nu} in accuracy relative to gamma_minus.
    CHECK(std::abs(fit.gamma_plus - 2.0 * nu * ap) < 5e-6 * std::abs(ap));
    CHECK(fit.cond < 1e10);
  }
}

TEST_CASE("trace fit round trip on a synthetic expansion") {
  const double nu = 0.4;
  const cd gm{1.3, -0.2}, gp{0.5, 0.9};
  std::vector<double> xs;
  std::vector<cd> us;
  for (int i = 0; i < 8; ++i) {
    const double x = 0.02 + 0.01 * i;
    xs.push_back(x);
    us.push_back(gm * std::pow(x, 1.5 - nu) +
                 gp / (2.0 * nu) * std::pow(x, 1.5 + nu));
  }
  const auto fit = traces(nu, xs, us);
  CHECK(std::abs(fit.gamma_minus - gm) < 1e-9);
  CHECK(std::abs(fit.gamma_plus - gp) < 1e-7);
}

TEST_CASE("trace fit degenerates as nu -> 0") {
  std::vector<double> xs;
  std::vector<cd> us;
  for (int i = 0; i < 8; ++i) {
    xs.push_back(0.02 + 0.01 * i);
    us.push_back(cd{1.0, 0.0});
  }
  CHECK_THROWS_AS(traces(1e-6, xs, us), IllConditionedFit);
  CHECK_THROWS_AS(traces(1.2, xs, us), IllConditionedFit);
}

TEST_CASE("boundary symbol is elliptic off the real axis") {
  BlackHoleParams p{0.4, 1.0, 0.5};
  const auto c = kerr_ads_boundary_symbol(p, 1.1);
  // A0 must avoid (-inf, 0] for lambda in the open upper half-plane.
  for (double phase : {0.3, 1.2, 2.4}) {
    const cd lam = std::polar(1.0, phase);
    const cd A0 = boundary_symbol_value(c, 0.4, 0.7, lam);
    CHECK_NOTHROW(make_model_problem(0.5, A0));
  }
  CHECK_THROWS_AS(kerr_ads_boundary_symbol(p, 0.0), PoleCoordinatesError);
}

TEST_CASE("Lopatinskii audit: Dirichlet passes, tuned Robin fails") {
  BlackHoleParams p{0.3, 1.0, 0.5};
  const auto rep = lopatinskii_check(0.5, BoundaryCondition::dirichlet(0.5), p,
                                     Sector{}, 300, 3);
  CHECK(rep.passed);
  CHECK(rep.min_margin > 1e-6);

  const cd beta = degenerate_robin_beta(0.5, p, Sector{}, 3);
  const auto bad = lopatinskii_check(0.5, BoundaryCondition::robin(beta, 0.5),
                                     p, Sector{}, 300, 3);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->margin < 1e-6);
}

TEST_CASE("boundary rows") {
  const std::vector<double> deriv{-3.0, 4.0, -1.0};

  const auto dir = boundary_rows(0.5, BoundaryCondition::dirichlet(0.5), deriv);
  CHECK(dir.lambda0[0] == cd{1.0});
  CHECK(dir.lambda0[1] == cd{0.0});
  CHECK(dir.lambda1[2] == cd{0.0});

  const auto neu = boundary_rows(0.5, BoundaryCondition::neumann(0.5), deriv);
  CHECK(neu.lambda0[1] == cd{4.0});

  const cd beta{0.2, -0.1};
  const auto rob =
      boundary_rows(0.5, BoundaryCondition::robin(beta, 0.5), deriv);
  CHECK(rob.lambda0[0] == cd{-3.0} + beta);

  const auto lr = boundary_rows(
      0.5, BoundaryCondition::lambda_robin(cd{0.1, 0.0}, cd{0.0, 2.0}, 0.5),
      deriv);
  CHECK(lr.lambda1[0] == cd{0.0, 2.0});

  // Mismatched order: Dirichlet bc built for a different nu.
  CHECK_THROWS_AS(
      boundary_rows(0.5, BoundaryCondition::dirichlet(0.25), deriv),
      UnsupportedOrder);
}

TEST_CASE("indicial pair") {
  const auto [lo, hi] = indicial_pair(0.5);
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(2.0));
}
