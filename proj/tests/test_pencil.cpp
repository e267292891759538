#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "kaqnf/chebyshev.hpp"
#include "kaqnf/frobenius.hpp"
#include "kaqnf/pencil.hpp"
#include "kaqnf/phase_space.hpp"
#include "kaqnf/qnf_solver.hpp"

using namespace kaqnf;
using cd = std::complex<double>;

namespace {

// Schwarzschild-AdS (M = 1, nu = 3/2) fundamental l = 0 frequency from
// the one-dimensional Frobenius oracle; stable to all printed digits
// under doubling the series order (60 -> 120).
const cd kOracleL0{2.798223242811384, -2.671205825804346};

}  // namespace

TEST_CASE("collocation grid invariants") {
  BlackHoleParams p{0.3, 1.0, 1.5};
  const auto g = make_grid(p, 24, 10, 0.05);

  CHECK(g.s_nodes[0] == 0.0);  // exact boundary node
  CHECK(g.s_max == doctest::Approx(1.0 / g.r_inner));
  CHECK(delta_r(p, g.r_inner) == doctest::Approx(-0.05).epsilon(1e-10));

  // Angular nodes are exactly antisymmetric (the parity reduction in
  // the eigensolver depends on this bitwise).
  const std::size_t nc = g.N_theta + 1;
  for (std::size_t j = 0; j < nc; ++j)
    CHECK(g.c_nodes[j] == -g.c_nodes[nc - 1 - j]);
  CHECK(g.c_nodes[0] == -1.0);
  CHECK(g.c_nodes[nc - 1] == 1.0);

  // Differentiation matrices are exact on low-degree polynomials.
  const std::size_t nr = g.N_r + 1;
  for (std::size_t i = 0; i < nr; ++i) {
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < nr; ++j) {
      const double s = g.s_nodes[j];
      d1 += g.Ds[i * nr + j] * (s * s * s - 2.0 * s);
      d2 += g.Ds2[i * nr + j] * (s * s * s - 2.0 * s);
    }
    const double s = g.s_nodes[i];
    CHECK(std::abs(d1 - (3.0 * s * s - 2.0)) < 1e-10);
    CHECK(std::abs(d2 - 6.0 * s) < 1e-8);
  }
}

TEST_CASE("make_grid rejects bad inputs") {
  CHECK_THROWS_AS(make_grid(BlackHoleParams{0.5, 0.05, 1.5}, 16, 8, 0.05),
                  InvalidRegion);
  // delta beyond the depth of the Delta_r dip.
  CHECK_THROWS_AS(make_grid(BlackHoleParams{0.0, 1.0, 1.5}, 16, 8, 1e6),
                  InvalidRegion);
  CHECK_THROWS_AS(make_grid(BlackHoleParams{0.0, 1.0, 1.5}, 16, 8, -1.0),
                  InvalidRegion);
}

TEST_CASE("mode validation") {
  ModeSpec ok;
  ok.nu = 1.5;
  CHECK_NOTHROW(validate_mode(ok));

  ModeSpec missing_bc;
  missing_bc.nu = 0.5;
  CHECK_THROWS_AS(validate_mode(missing_bc), InvalidRegion);

  ModeSpec extra_bc;
  extra_bc.nu = 1.5;
  extra_bc.bc = BoundaryCondition::dirichlet(1.5);
  CHECK_THROWS_AS(validate_mode(extra_bc), InvalidRegion);

  // Derivative boundary rows only make sense at nu = 1/2; other
  // subunitary orders would need a non-polynomial trace weight.
  BlackHoleParams p{0.0, 1.0, 0.25};
  const auto g = make_grid(p, 16, 8, 0.05);
  ModeSpec neu;
  neu.nu = 0.25;
  neu.bc = BoundaryCondition::neumann(0.25);
  CHECK_THROWS_AS(assemble_pencil(p, neu, g), UnsupportedOrder);
  // Dirichlet is exact at every order.
  ModeSpec dir;
  dir.nu = 0.25;
  dir.bc = BoundaryCondition::dirichlet(0.25);
  CHECK_NOTHROW(assemble_pencil(p, dir, g));
}

TEST_CASE("pencil is exactly quadratic in lambda") {
  BlackHoleParams p{0.3, 1.0, 1.5};
  const auto g = make_grid(p, 16, 8, 0.05);
  ModeSpec mode;
  mode.m = 2;
  mode.nu = 1.5;
  const auto pen = assemble_pencil(p, mode, g);

  // Evaluations at lambda = 0, 1, i pin down a quadratic exactly.
  const auto P0 = evaluate_pencil(pen, cd{0.0});
  const auto P1 = evaluate_pencil(pen, cd{1.0});
  const auto Pi = evaluate_pencil(pen, cd{0.0, 1.0});
  double worst = 0.0;
  for (std::size_t k = 0; k < pen.n * pen.n; ++k) {
    worst = std::max(worst, std::abs(P0[k] - pen.A0[k]));
    worst = std::max(worst,
                     std::abs(P1[k] - (pen.A0[k] + pen.A1[k] + pen.A2[k])));
    worst = std::max(
        worst,
        std::abs(Pi[k] - (pen.A0[k] + cd{0.0, 1.0} * pen.A1[k] - pen.A2[k])));
  }
  CHECK(worst < 1e-12);

  // apply_pencil agrees with the dense evaluation on a random vector.
  AuditRng rng(99);
  std::vector<cd> v(pen.n);
  for (auto& x : v) x = cd{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  const cd lam{0.4, -1.1};
  const auto Pl = evaluate_pencil(pen, lam);
  const auto pv = apply_pencil(pen, lam, v);
  for (std::size_t i = 0; i < pen.n; ++i) {
    cd acc{0.0};
    for (std::size_t j = 0; j < pen.n; ++j) acc += Pl[i * pen.n + j] * v[j];
    CHECK(std::abs(acc - pv[i]) < 1e-10);
  }
}

TEST_CASE("solver reproduces the radial oracle at a = 0") {
  BlackHoleParams p{0.0, 1.0, 1.5};
  ModeSpec mode;
  mode.m = 0;
  mode.nu = 1.5;
  const auto pen = assemble_pencil(p, mode, make_grid(p, 32, 10, 0.05));
  CHECK(pen.kappa == doctest::Approx(2.0).epsilon(1e-12));

  const auto res = solve_qep(pen, Window::default_for(pen.kappa, 2));
  double best = 1e9;
  const QnfResult* hit = nullptr;
  for (const auto& r : res) {
    const double d = std::abs(r.lambda - kOracleL0);
    if (d < best) {
      best = d;
      hit = &r;
    }
  }
  REQUIRE(hit != nullptr);
  CHECK(best < 1e-7);
  CHECK(hit->residual < 1e-8);
  CHECK(hit->halfplane_ok);

  // The m = 0 spectrum in the window is symmetric under
  // lambda -> -conj(lambda).
  for (const auto& r : res) {
    if (r.residual > 1e-8) continue;
    double dmin = 1e9;
    for (const auto& r2 : res)
      dmin = std::min(dmin, std::abs(r2.lambda + std::conj(r.lambda)));
    CHECK(dmin < 1e-6 * (1.0 + std::abs(r.lambda)));
  }
}

TEST_CASE("azimuthal reflection pairs the rotating spectra") {
  BlackHoleParams p{0.3, 1.0, 1.5};
  const auto g = make_grid(p, 24, 8, 0.05);
  ModeSpec mp, mm;
  mp.m = 1;
  mm.m = -1;
  mp.nu = mm.nu = 1.5;
  const auto pp = assemble_pencil(p, mp, g);
  const auto pm = assemble_pencil(p, mm, g);
  const auto rp = solve_qep(pp, Window::default_for(pp.kappa, 2));
  const auto rm = solve_qep(pm, Window::default_for(pm.kappa, 2));
  std::size_t checked = 0;
  for (const auto& r : rp) {
    if (r.residual > 1e-9) continue;
    double dmin = 1e9;
    for (const auto& r2 : rm)
      dmin = std::min(dmin, std::abs(r2.lambda + std::conj(r.lambda)));
    CHECK(dmin < 1e-6 * (1.0 + std::abs(r.lambda)));
    ++checked;
  }
  CHECK(checked > 3);
}

TEST_CASE("smallest singular value dips at an eigenvalue") {
  BlackHoleParams p{0.0, 1.0, 1.5};
  ModeSpec mode;
  mode.nu = 1.5;
  const auto pen = assemble_pencil(p, mode, make_grid(p, 24, 8, 0.05));
  const double at_eig = pencil_smallest_singular(pen, kOracleL0);
  const double off_eig =
      pencil_smallest_singular(pen, kOracleL0 + cd{0.5, 0.3});
  CHECK(at_eig < 1e-5 * off_eig);
}

TEST_CASE("default window sits inside the meromorphy half-plane") {
  const auto w = Window::default_for(2.0, 2);
  CHECK(w.im_min == doctest::Approx(-2.0 * 2.5 + 0.2));
  CHECK(w.contains(cd{1.0, -4.0}));
  CHECK_FALSE(w.contains(cd{1.0, -5.5}));
  CHECK_FALSE(w.contains(cd{25.0, -1.0}));
}

TEST_CASE("convergence filter pairs resolutions") {
  const double kappa = 2.0;
  std::vector<QnfResult> coarse{
      {cd{1.0, -1.0}, 1e-10, false, true},
      {cd{3.0, -2.0}, 1e-10, false, true},   // unmatched
      {cd{0.5, -4.9}, 1e-10, false, false},  // matched, outside half-plane
  };
  std::vector<QnfResult> fine{
      {cd{1.0 + 4e-7, -1.0}, 1e-11, false, true},
      {cd{0.5, -4.9 - 2e-7}, 1e-11, false, false},
      {cd{7.0, -1.0}, 1e-11, false, true},
  };
  const auto kept = convergence_filter(coarse, fine, kappa, 2, 1e-6);
  REQUIRE(kept.size() == 2);
  for (const auto& r : kept) {
    CHECK(r.converged);
    // The fine-grid value is the one reported.
    const bool is_fine = std::abs(r.lambda - fine[0].lambda) < 1e-15 ||
                         std::abs(r.lambda - fine[1].lambda) < 1e-15;
    CHECK(is_fine);
  }
  // Large residuals disqualify a pair even when the lambdas agree.
  std::vector<QnfResult> bad_fine{{cd{1.0, -1.0}, 1e-3, false, true}};
  std::vector<QnfResult> bad_coarse{{cd{1.0, -1.0}, 1e-10, false, true}};
  CHECK(convergence_filter(bad_coarse, bad_fine, kappa, 2, 1e-6).empty());
}

TEST_CASE("oracle Wronskian: root, off-root, and order doubling") {
  BlackHoleParams p{0.0, 1.0, 1.5};
  const cd at_root = oracle_wronskian_a0(p, 0, kOracleL0, nullptr);
  CHECK(std::abs(at_root) < 1e-10);
  const cd off_root =
      oracle_wronskian_a0(p, 0, kOracleL0 + cd{0.1, 0.0}, nullptr);
  CHECK(std::abs(off_root) > 1e-3);

  // Newton from a perturbed start returns to the fixture, and the root
  // is stable under doubling the series order.
  const auto r60 =
      frobenius_oracle_a0(p, 0, kOracleL0 + cd{0.05, -0.05}, nullptr, 60);
  CHECK(std::abs(r60.lambda - kOracleL0) < 1e-10);
  const auto r120 =
      frobenius_oracle_a0(p, 0, kOracleL0 + cd{0.05, -0.05}, nullptr, 120);
  CHECK(std::abs(r120.lambda - r60.lambda) < 1e-11);
}

TEST_CASE("qnf table CSV schema") {
  BlackHoleParams p{0.0, 1.0, 1.5};
  ModeSpec mode;
  mode.nu = 1.5;
  std::vector<QnfResult> rows{{cd{1.0, -2.0}, 1e-10, true, true}};
  const auto csv = qnf_table_csv(p, mode, 0.05, {}, 40, 12, rows);
  CHECK(csv.rfind("a,M,nu,m,bc,delta,fplus_id,N_r,N_theta,re_lambda,"
                  "im_lambda,residual,converged,halfplane_ok\n",
                  0) == 0);
  CHECK(csv.find("fplus_scale_1") != std::string::npos);
}
