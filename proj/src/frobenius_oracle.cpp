#include "kaqnf/frobenius.hpp"

#include <algorithm>
#include <cmath>

#include "kaqnf/pencil.hpp"
#include "kaqnf/rk45.hpp"

namespace kaqnf {

namespace {

using cd = std::complex<double>;
using Poly = std::vector<cd>;  // ascending coefficients

Poly pmul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, cd(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

Poly padd(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), cd(0.0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

Poly pscale(Poly a, cd s) {
  for (auto& x : a) x *= s;
  return a;
}

Poly pderiv(const Poly& a) {
  if (a.size() <= 1) return Poly{cd(0.0)};
  Poly d(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i)
    d[i - 1] = static_cast<double>(i) * a[i];
  return d;
}

// Coefficients of p(x0 + x) in powers of x.
Poly pshift(const Poly& a, double x0) {
  const std::size_t n = a.size();
  Poly out(n, cd(0.0));
  // Binomial expansion term by term; degrees here are tiny.
  std::vector<double> binom(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    binom[0] = 1.0;
    for (std::size_t k = 1; k <= j; ++k)
      binom[k] = binom[k - 1] * static_cast<double>(j - k + 1) /
                 static_cast<double>(k);
    double xp = 1.0;
    for (std::size_t k = 0; k <= j; ++k) {
      out[j - k] += a[j] * binom[k] * xp;  // x^{j-k} x0^k ordering below
      xp *= x0;
    }
  }
  return out;
}

cd pat(const Poly& a, std::size_t j) {
  return j < a.size() ? a[j] : cd(0.0);
}

// Frobenius series u = x^gamma sum c_k x^k for A u'' + B u' + C u = 0
// with A = O(x^2), B = O(x).  Integer resonances with vanishing
// right-hand side take the canonical c_k = 0 branch.
struct Series {
  cd gamma;
  std::vector<cd> c;
};

Series frobenius_series(const Poly& A, const Poly& B, const Poly& C, cd gamma,
                        int order) {
  Series s;
  s.gamma = gamma;
  s.c.assign(static_cast<std::size_t>(order) + 1, cd(0.0));
  s.c[0] = 1.0;
  const double iscale = std::abs(pat(A, 2)) + std::abs(pat(B, 1)) + 1.0;
  for (int k = 1; k <= order; ++k) {
    cd rhs(0.0);
    for (int m = 0; m < k; ++m) {
      const cd g = gamma + static_cast<double>(m);
      rhs -= s.c[static_cast<std::size_t>(m)] *
             (g * (g - 1.0) * pat(A, static_cast<std::size_t>(k - m + 2)) +
              g * pat(B, static_cast<std::size_t>(k - m + 1)) +
              pat(C, static_cast<std::size_t>(k - m)));
    }
    const cd g = gamma + static_cast<double>(k);
    const cd ind = g * (g - 1.0) * pat(A, 2) + g * pat(B, 1) + pat(C, 0);
    if (std::abs(ind) < 1e-7 * iscale * (1.0 + std::abs(g) * std::abs(g))) {
      if (std::abs(rhs) < 1e-8 * iscale) {
        s.c[static_cast<std::size_t>(k)] = 0.0;  // resonance, no log branch
        continue;
      }
      throw SeriesRadius("frobenius_series: logarithmic resonance at k = " +
                         std::to_string(k));
    }
    s.c[static_cast<std::size_t>(k)] = rhs / ind;
  }
  return s;
}

// Value and derivative of the series at x > 0.
std::pair<cd, cd> series_eval(const Series& s, double x) {
  cd u(0.0), du(0.0);
  double xk = 1.0;
  for (std::size_t k = 0; k < s.c.size(); ++k) {
    const cd g = s.gamma + static_cast<double>(k);
    u += s.c[k] * xk;
    du += s.c[k] * g * xk;
    xk *= x;
  }
  const cd head = std::pow(cd(x, 0.0), s.gamma);
  return {head * u, head / x * du};
}

double series_tail_ratio(const Series& s, double x) {
  double total = 0.0, tail = 0.0;
  double xk = 1.0;
  for (std::size_t k = 0; k < s.c.size(); ++k) {
    const double t = std::abs(s.c[k]) * xk;
    total += t;
    if (k + 4 >= s.c.size()) tail += t;
    xk *= x;
  }
  return total > 0.0 ? tail / total : 1.0;
}

struct OracleGeometry {
  double r_plus;
  double kappa;
  double x1;       // horizon-side series evaluation offset
  double s_match;  // boundary-side series evaluation point
};

OracleGeometry oracle_geometry(const BlackHoleParams& p) {
  const auto hd = find_horizons(p);
  if (!hd) throw InvalidRegion("oracle: no horizon");
  OracleGeometry g;
  g.r_plus = hd->r_plus;
  g.kappa = hd->kappa;
  // Horizon series radius: distance to the nearest other root of
  // Delta_r = r(r^3 + r - 2M); the non-horizon cubic roots are
  // (-r_plus +- i sqrt(3 r_plus^2 + 4)) / 2.
  const double re = -0.5 * g.r_plus;
  const double im = 0.5 * std::sqrt(3.0 * g.r_plus * g.r_plus + 4.0);
  const double d_complex = std::hypot(re - g.r_plus, im);
  g.x1 = 0.45 * std::min(g.r_plus, d_complex);
  // Boundary series radius: smallest root modulus of
  // D0(s) = 1 + s^2 - 2 M s^3.  Deflate the real root.
  double sr = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double f = 2.0 * p.M * sr * sr * sr - sr * sr - 1.0;
    const double df = 6.0 * p.M * sr * sr - 2.0 * sr;
    sr -= f / df;
  }
  // 2M s^3 - s^2 - 1 = (s - sr)(2M s^2 + b s + c)
  const double b = 2.0 * p.M * sr - 1.0;
  const double c = 1.0 / sr;  // product of all roots = 1/(2M), pair = c/(2M)
  (void)b;
  const double pair_mod = std::sqrt(c / (2.0 * p.M));
  g.s_match = 0.45 * std::min(sr, pair_mod);
  if (1.0 / g.s_match <= g.r_plus + g.x1)
    throw SeriesRadius("oracle: matching point inside the horizon series");
  return g;
}

struct SideState {
  cd R, S;  // value and d/dr at the matching radius
};

SideState horizon_solution(const BlackHoleParams& p, int ell, double nu, cd lambda,
                           const OracleGeometry& g, int order) {
  const double M = p.M;
  const Poly delta{0.0, -2.0 * M, 1.0, 0.0, 1.0};
  const Poly ddelta = pderiv(delta);
  const Poly r2{0.0, 0.0, 1.0};
  const Poly r4{0.0, 0.0, 0.0, 0.0, 1.0};
  const Poly A = pscale(pmul(delta, delta), -1.0);
  const Poly B = pscale(pmul(delta, ddelta), -1.0);
  Poly C = pscale(delta, static_cast<double>(ell) * (ell + 1));
  C = padd(C, pscale(pmul(r2, delta), nu * nu - 2.25));
  C = padd(C, pscale(r4, -lambda * lambda));

  const cd gamma = -cd(0.0, 1.0) * lambda / (2.0 * g.kappa);
  const Series ser = frobenius_series(pshift(A, g.r_plus), pshift(B, g.r_plus),
                                      pshift(C, g.r_plus), gamma, order);
  double x1 = g.x1;
  for (int tries = 0; tries < 12 && series_tail_ratio(ser, x1) > 1e-12;
       ++tries)
    x1 *= 0.7;
  if (series_tail_ratio(ser, x1) > 1e-12)
    throw SeriesRadius("oracle: horizon series did not converge");

  auto [R0, S0] = series_eval(ser, x1);
  const double scale = std::max(std::abs(R0), std::abs(S0));
  R0 /= scale;
  S0 /= scale;

  // Bridge to the matching radius by integrating the ODE in r.  The
  // RHS needs r, and the integrator only passes time to event
  // functions, so r rides along as a fifth state component.
  const double r_start = g.r_plus + x1;
  const double r_end = 1.0 / g.s_match;
  StateVec<5> y5{R0.real(), R0.imag(), S0.real(), S0.imag(), r_start};
  auto rhs5 = [&](const StateVec<5>& yy, StateVec<5>& dy) {
    const double r = yy[4];
    const cd R(yy[0], yy[1]), S(yy[2], yy[3]);
    const double dr = delta_r(p, r);
    const double ddr = d_delta_r(p, r);
    const cd P0 = (static_cast<double>(ell) * (ell + 1) +
                   (nu * nu - 2.25) * r * r) *
                      dr -
                  lambda * lambda * r * r * r * r;
    const cd R2 = (-dr * ddr * S + P0 * R) / (dr * dr);
    dy[0] = S.real();
    dy[1] = S.imag();
    dy[2] = R2.real();
    dy[3] = R2.imag();
    dy[4] = 1.0;
  };
  Rk45Options<5> opt5;
  opt5.abs_tol = 1e-12;
  opt5.rel_tol = 1e-12;
  opt5.h_max = 0.1;
  opt5.t_max = r_end - r_start;
  const auto res = integrate_rk45<5>(rhs5, y5, opt5, {});
  if (res.status == StepStatus::Failed)
    throw NoConvergence("oracle: bridge integration failed");
  SideState out;
  out.R = cd(res.y_end[0], res.y_end[1]);
  out.S = cd(res.y_end[2], res.y_end[3]);
  return out;
}

SideState boundary_solution(const BlackHoleParams& p, int ell, double nu,
                            cd lambda, const BoundaryCondition* bc,
                            const OracleGeometry& g, int order) {
  const double M = p.M;
  const Poly d0{1.0, 0.0, 1.0, -2.0 * M};
  const Poly d0sq = pmul(d0, d0);
  const Poly d0p = pderiv(d0);
  // -s^2 D0^2 u'' + (2 s D0^2 - s^2 D0 D0') u'
  // + [(l(l+1) s^2 + nu^2 - 9/4) D0 - lambda^2 s^2] u = 0.
  Poly A = pmul(Poly{0.0, 0.0, -1.0}, d0sq);
  Poly B = padd(pmul(Poly{0.0, 2.0}, d0sq),
                pmul(Poly{0.0, 0.0, -1.0}, pmul(d0, d0p)));
  Poly C = pmul(padd(Poly{nu * nu - 2.25},
                     Poly{0.0, 0.0, static_cast<double>(ell) * (ell + 1)}),
                d0);
  C = padd(C, Poly{0.0, 0.0, -lambda * lambda});

  const double s = g.s_match;
  cd u, du;
  const bool dirichlet_like =
      bc == nullptr || bc->kind == BcKind::Dirichlet;
  if (dirichlet_like) {
    const Series sp = frobenius_series(A, B, C, cd(1.5 + nu), order);
    if (series_tail_ratio(sp, s) > 1e-12)
      throw SeriesRadius("oracle: boundary series did not converge");
    std::tie(u, du) = series_eval(sp, s);
  } else {
    const Series sm = frobenius_series(A, B, C, cd(1.5 - nu), order);
    if (series_tail_ratio(sm, s) > 1e-12)
      throw SeriesRadius("oracle: boundary series did not converge");
    auto [um, dum] = series_eval(sm, s);
    if (bc->kind == BcKind::Neumann) {
      u = um;
      du = dum;
    } else {
      const cd beta_eff = bc->kind == BcKind::Robin
                              ? bc->beta
                              : bc->beta0 + bc->beta1 * lambda;
      const Series sp = frobenius_series(A, B, C, cd(1.5 + nu), order);
      auto [up, dup] = series_eval(sp, s);
      // gamma_- = 2 nu, gamma_+ = -2 nu beta_eff solves
      // gamma_+ + beta gamma_- = 0.
      u = 2.0 * nu * um - beta_eff * up;
      du = 2.0 * nu * dum - beta_eff * dup;
    }
  }
  SideState out;
  out.R = u;
  out.S = -s * s * du;  // d/dr = -s^2 d/ds
  return out;
}

}  // namespace

cd oracle_wronskian_a0(const BlackHoleParams& p, int ell, cd lambda,
                       const BoundaryCondition* bc, int series_order) {
  if (p.a != 0.0) throw InvalidRegion("oracle: requires a = 0");
  if (ell < 0) throw InvalidRegion("oracle: ell < 0");
  if (p.nu < 1.0 && bc == nullptr)
    throw InvalidRegion("oracle: 0 < nu < 1 requires a boundary condition");
  const OracleGeometry g = oracle_geometry(p);
  const SideState h = horizon_solution(p, ell, p.nu, lambda, g, series_order);
  const SideState b =
      boundary_solution(p, ell, p.nu, lambda, bc, g, series_order);
  const cd w = h.R * b.S - h.S * b.R;
  const double scale = (std::abs(h.R) + std::abs(h.S)) *
                       (std::abs(b.R) + std::abs(b.S));
  return w / scale;
}

OracleResult frobenius_oracle_a0(const BlackHoleParams& p, int ell,
                                 cd lambda_init, const BoundaryCondition* bc,
                                 int series_order) {
  cd lam = lambda_init;
  OracleResult out;
  for (int it = 0; it < 60; ++it) {
    const cd w = oracle_wronskian_a0(p, ell, lam, bc, series_order);
    const double h = 1e-7 * (1.0 + std::abs(lam));
    const cd wp = oracle_wronskian_a0(p, ell, lam + h, bc, series_order);
    const cd dw = (wp - w) / h;
    if (std::abs(dw) == 0.0) throw NoConvergence("oracle: flat Wronskian");
    const cd step = w / dw;
    lam -= step;
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag()) ||
        std::abs(lam) > 1e3)
      throw NoConvergence("oracle: Newton diverged");
    if (std::abs(step) < 1e-12 * (1.0 + std::abs(lam))) {
      out.lambda = lam;
      out.matching_residual = std::abs(oracle_wronskian_a0(p, ell, lam, bc,
                                                           series_order));
      out.iterations = it + 1;
      return out;
    }
  }
  throw NoConvergence("oracle: Newton did not converge");
}

std::vector<OracleResult> oracle_scan_a0(const BlackHoleParams& p, int ell,
                                         const BoundaryCondition* bc,
                                         double re_min, double re_max,
                                         double im_min, double im_max,
                                         int n_re, int n_im, int series_order) {
  std::vector<double> mag(static_cast<std::size_t>(n_re * n_im));
  auto lam_at = [&](int i, int j) {
    return cd(re_min + (re_max - re_min) * i / (n_re - 1.0),
              im_min + (im_max - im_min) * j / (n_im - 1.0));
  };
  for (int i = 0; i < n_re; ++i)
    for (int j = 0; j < n_im; ++j)
      mag[static_cast<std::size_t>(i * n_im + j)] = std::abs(
          oracle_wronskian_a0(p, ell, lam_at(i, j), bc, series_order));

  std::vector<OracleResult> roots;
  for (int i = 0; i < n_re; ++i)
    for (int j = 0; j < n_im; ++j) {
      const double v = mag[static_cast<std::size_t>(i * n_im + j)];
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= n_re || jj >= n_im) continue;
          if (mag[static_cast<std::size_t>(ii * n_im + jj)] < v)
            is_min = false;
        }
      if (!is_min) continue;
      OracleResult r;
      try {
        r = frobenius_oracle_a0(p, ell, lam_at(i, j), bc, series_order);
      } catch (const NoConvergence&) {
        continue;
      } catch (const SeriesRadius&) {
        continue;
      }
      const double pad_re = 0.1 * (re_max - re_min);
      const double pad_im = 0.1 * (im_max - im_min);
      if (r.lambda.real() < re_min - pad_re ||
          r.lambda.real() > re_max + pad_re ||
          r.lambda.imag() < im_min - pad_im ||
          r.lambda.imag() > im_max + pad_im)
        continue;
      bool dup = false;
      for (const auto& o : roots)
        if (std::abs(o.lambda - r.lambda) < 1e-8 * (1.0 + std::abs(r.lambda)))
          dup = true;
      if (!dup) roots.push_back(r);
    }
  std::sort(roots.begin(), roots.end(),
            [](const OracleResult& x, const OracleResult& y) {
              return std::abs(x.lambda) < std::abs(y.lambda);
            });
  return roots;
}

}  // namespace kaqnf
