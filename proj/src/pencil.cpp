#include "kaqnf/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kaqnf/chebyshev.hpp"

namespace kaqnf {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// Delta_r in the compactified variable: Delta_r = D(s) / s^4 with
// D(s) = (1 + alpha s^2)(1 + s^2) - 2 M s^3, D(0) = 1.
double poly_d(const BlackHoleParams& p, double s) {
  const double alpha = p.a * p.a;
  return (1.0 + alpha * s * s) * (1.0 + s * s) - 2.0 * p.M * s * s * s;
}

double poly_d_prime(const BlackHoleParams& p, double s) {
  const double alpha = p.a * p.a;
  return 2.0 * alpha * s * (1.0 + s * s) + (1.0 + alpha * s * s) * 2.0 * s -
         6.0 * p.M * s * s;
}

// C^{rt} s^3, regular down to s = 0.  cf is the extension scale.
double crt_s3(const BlackHoleParams& p, double cf, double s) {
  const double alpha = p.a * p.a;
  return (1.0 - alpha) * ((1.0 - cf) * (1.0 + alpha * s * s) * s +
                          2.0 * cf * p.M * s * s * s * s / (1.0 + s * s));
}

// (d C^{rt} / dr) s^2.
double dcrt_s2(const BlackHoleParams& p, double cf, double s) {
  const double alpha = p.a * p.a;
  const double s2 = s * s;
  return (1.0 - alpha) *
         (2.0 * (1.0 - cf) * s +
          2.0 * cf * p.M * s2 * s2 * (s2 - 1.0) / ((1.0 + s2) * (1.0 + s2)));
}

// C^{tt} s^2 (the lambda^2 coefficient after row scaling).
double tt_s2(const BlackHoleParams& p, double cf, double s, double c) {
  const double alpha = p.a * p.a;
  const double oma = 1.0 - alpha;
  const double s2 = s * s;
  const double Dth = 1.0 - alpha * c * c;
  return cf * cf * oma * oma * poly_d(p, s) * s2 / ((1.0 + s2) * (1.0 + s2)) -
         2.0 * cf * oma * oma * (1.0 + alpha * s2) * s2 / (1.0 + s2) +
         s2 * oma * oma * alpha * (1.0 - c * c) / Dth;
}

// C^{t phi} s^2.
double tphi_s2(const BlackHoleParams& p, double cf, double s, double c) {
  const double alpha = p.a * p.a;
  const double oma = 1.0 - alpha;
  const double s2 = s * s;
  const double Dth = 1.0 - alpha * c * c;
  return -cf * oma * oma * p.a * s2 * s2 / (1.0 + s2) +
         s2 * oma * oma * p.a / Dth;
}

double q_poly(double alpha, double c) {
  return (1.0 - alpha * (1.0 + c + c * c)) * (1.0 - alpha * (1.0 - c + c * c));
}

}  // namespace

void validate_mode(const ModeSpec& mode) {
  if (mode.nu <= 0.0) throw InvalidRegion("mode: nu must be positive");
  const bool needs_bc = mode.nu < 1.0;
  if (needs_bc && !mode.bc)
    throw InvalidRegion("mode: 0 < nu < 1 requires a boundary condition");
  if (!needs_bc && mode.bc)
    throw InvalidRegion("mode: nu >= 1 admits no boundary condition");
  if (mode.k_threshold < 0) throw InvalidRegion("mode: k_threshold < 0");
}

Grid2D make_grid(const BlackHoleParams& p, std::size_t N_r,
                 std::size_t N_theta, double delta) {
  const RegionTag tag = classify_region(p);
  if (tag != RegionTag::Admissible && tag != RegionTag::AdmissibleHawkingReall)
    throw InvalidRegion("make_grid: parameters outside the admissible region");
  const auto hd = find_horizons(p);

  // Delta_r dips below zero between the Cauchy and event horizons; the
  // artificial boundary sits at the larger solution of Delta_r = -delta.
  double r_dip = 0.0, f_dip = delta_r(p, 0.0);
  const int n_scan = 4000;
  for (int i = 1; i <= n_scan; ++i) {
    const double r = hd->r_plus * static_cast<double>(i) / n_scan;
    const double f = delta_r(p, r);
    if (f < f_dip) {
      f_dip = f;
      r_dip = r;
    }
  }
  if (!(delta > 0.0) || -delta <= f_dip)
    throw InvalidRegion("make_grid: delta outside (0, |min Delta_r|)");
  double lo = r_dip, hi = hd->r_plus;  // Delta_r increasing on [r_dip, r_plus]
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (delta_r(p, mid) <= -delta)
      lo = mid;
    else
      hi = mid;
  }

  Grid2D g;
  g.N_r = N_r;
  g.N_theta = N_theta;
  g.delta = delta;
  g.r_inner = 0.5 * (lo + hi);
  g.s_max = 1.0 / g.r_inner;
  auto rad = collocation_interval(N_r, 0.0, g.s_max);
  g.s_nodes = std::move(rad.nodes);
  g.Ds = std::move(rad.D1);
  g.Ds2 = std::move(rad.D2);
  auto ang = collocation_interval(N_theta, -1.0, 1.0);
  g.c_nodes = std::move(ang.nodes);
  g.Dc = std::move(ang.D1);
  g.Dc2 = std::move(ang.D2);
  return g;
}

namespace {

// Continuous P(lambda) applied to u = s^p (1-c^2)^{k/2} v with
// v = exp(-s)(1 + 0.4 c + 0.3 c^2), composed termwise in the
// compactified variables; row-scaled like the assembled pencil.  Used
// as the assembly sanity oracle on a manufactured function.
struct Manufactured {
  double v(double s, double c) const {
    return std::exp(-s) * (1.0 + 0.4 * c + 0.3 * c * c);
  }
  double vs(double s, double c) const { return -v(s, c); }
  double vss(double s, double c) const { return v(s, c); }
  double vc(double s, double c) const {
    return std::exp(-s) * (0.4 + 0.6 * c);
  }
  double vcc(double s, double c) const {
    return std::exp(-s) * 0.6 + 0.0 * c;
  }
};

}  // namespace

QnfPencil assemble_pencil(const BlackHoleParams& p, const ModeSpec& mode,
                          const Grid2D& grid, const ExtensionVariant& variant) {
  validate_mode(mode);
  const RegionTag tag = classify_region(p);
  if (tag != RegionTag::Admissible && tag != RegionTag::AdmissibleHawkingReall)
    throw InvalidRegion("assemble_pencil: parameters not admissible");
  if (mode.nu < 1.0 && mode.bc->kind != BcKind::Dirichlet &&
      std::abs(mode.nu - 0.5) > 1e-12)
    throw UnsupportedOrder(
        "assemble_pencil: derivative boundary rows require nu = 1/2 "
        "(s^{1-2nu} trace weight is non-polynomial otherwise)");

  const auto hd = find_horizons(p);
  const double alpha = p.a * p.a;
  const double oma = 1.0 - alpha;
  const double cf = variant.scale;
  const double nu = mode.nu;
  const double pe = nu >= 1.0 ? 1.5 + nu : 1.5 - nu;
  const int m = mode.m;
  const int k = std::abs(m);

  const std::size_t nr = grid.N_r + 1;
  const std::size_t nc = grid.N_theta + 1;
  const std::size_t n = nr * nc;

  QnfPencil pen;
  pen.n = n;
  pen.A0.assign(n * n, cd(0.0));
  pen.A1.assign(n * n, cd(0.0));
  pen.A2.assign(n * n, cd(0.0));
  pen.params = p;
  pen.mode = mode;
  pen.grid = grid;
  pen.variant = variant;
  pen.p_exp = pe;
  pen.kappa = hd->kappa;

  auto idx = [nc](std::size_t i, std::size_t j) { return i * nc + j; };

  for (std::size_t j = 0; j < nc; ++j)
    pen.boundary_row_indices.push_back(idx(0, j));

  // Boundary rows at s = 0.
  if (nu >= 1.0) {
    // Indicial limit of the divided-by-s PDE row: all other terms are
    // O(s^2) there; the extension variant contributes a lambda term.
    for (std::size_t j = 0; j < nc; ++j) {
      const std::size_t row = idx(0, j);
      for (std::size_t ii = 0; ii < nr; ++ii)
        pen.A0[row * n + idx(ii, j)] = -(2.0 * pe - 2.0) * grid.Ds[0 * nr + ii];
      pen.A1[row * n + row] = kI * 2.0 * (1.0 - cf) * oma * (1.0 - pe);
    }
  } else {
    std::vector<double> deriv_row(nr);
    for (std::size_t ii = 0; ii < nr; ++ii) deriv_row[ii] = grid.Ds[ii];
    const BoundaryRows rows = boundary_rows(nu, *mode.bc, deriv_row);
    for (std::size_t j = 0; j < nc; ++j) {
      const std::size_t row = idx(0, j);
      for (std::size_t ii = 0; ii < nr; ++ii) {
        pen.A0[row * n + idx(ii, j)] = rows.lambda0[ii];
        pen.A1[row * n + idx(ii, j)] = rows.lambda1[ii];
      }
    }
  }

  // Interior and inner-endpoint rows: the PDE itself.
  for (std::size_t i = 1; i < nr; ++i) {
    const double s = grid.s_nodes[i];
    const double s2 = s * s;
    const double D = poly_d(p, s);
    const double Dp = poly_d_prime(p, s);
    const double r_ss = -s2 * D;
    const double r_s = -s * (s * Dp + (2.0 * pe - 2.0) * D);
    const double r0_kin = -pe * ((pe - 3.0) * D + s * Dp);
    const double c3 = crt_s3(p, cf, s);
    const double dc2 = dcrt_s2(p, cf, s);
    const cd mcross = kI * (2.0 * m * oma * p.a * s2 * s);

    for (std::size_t j = 0; j < nc; ++j) {
      const double c = grid.c_nodes[j];
      const double Dth = 1.0 - alpha * c * c;
      const double Dthp = -2.0 * alpha * c;
      const std::size_t row = idx(i, j);
      cd* a0 = &pen.A0[row * n];
      cd* a1 = &pen.A1[row * n];

      // Radial derivatives couple the whole s-line at fixed j.
      for (std::size_t ii = 0; ii < nr; ++ii) {
        const double d1 = grid.Ds[i * nr + ii];
        const double d2 = grid.Ds2[i * nr + ii];
        a0[idx(ii, j)] += r_ss * d2 + r_s * d1 + mcross * (s * d1);
        a1[idx(ii, j)] += kI * (-2.0 * c3) * (s * d1);
      }
      // Angular derivatives couple the c-line at fixed i.
      const double ang2 = -(1.0 - c * c) * Dth;
      const double ang1 = 2.0 * (k + 1.0) * c * Dth - (1.0 - c * c) * Dthp;
      const double ang0 =
          k * Dth + k * c * Dthp +
          static_cast<double>(m) * m * q_poly(alpha, c) / Dth;
      for (std::size_t jj = 0; jj < nc; ++jj) {
        const double d1 = grid.Dc[j * nc + jj];
        const double d2 = grid.Dc2[j * nc + jj];
        a0[idx(i, jj)] += s2 * (ang2 * d2 + ang1 * d1);
      }
      // Zeroth-order terms.
      a0[row] += r0_kin +
                 (nu * nu - 2.25) * (1.0 + alpha * c * c * s2) +
                 s2 * ang0 + mcross * pe;
      a1[row] += kI * (-2.0 * c3 * pe + dc2) - 2.0 * m * tphi_s2(p, cf, s, c);
      pen.A2[row * n + row] = tt_s2(p, cf, s, c);
    }
  }

  // Assembly sanity check: compare the matrix action on a manufactured
  // smooth function against the termwise continuous operator at the
  // interior nodes (coordinate poles and the boundary row excluded).
  {
    const Manufactured mf;
    const cd lam0(0.7, 0.4);
    std::vector<cd> v(n);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j)
        v[idx(i, j)] = mf.v(grid.s_nodes[i], grid.c_nodes[j]);
    const auto pv = apply_pencil(pen, lam0, v);
    double worst = 0.0;
    for (std::size_t i = 1; i < nr; ++i) {
      const double s = grid.s_nodes[i];
      const double s2 = s * s;
      const double D = poly_d(p, s);
      const double Dp = poly_d_prime(p, s);
      for (std::size_t j = 1; j + 1 < nc; ++j) {
        const double c = grid.c_nodes[j];
        const double Dth = 1.0 - alpha * c * c;
        const double Dthp = -2.0 * alpha * c;
        const double vv = mf.v(s, c), dvs = mf.vs(s, c), dvss = mf.vss(s, c);
        const double dvc = mf.vc(s, c), dvcc = mf.vcc(s, c);
        cd exact =
            (-s2 * D) * dvss +
            (-s * (s * Dp + (2.0 * pe - 2.0) * D)) * dvs +
            (-pe * ((pe - 3.0) * D + s * Dp) +
             (nu * nu - 2.25) * (1.0 + alpha * c * c * s2)) *
                vv +
            s2 * (-(1.0 - c * c) * Dth * dvcc +
                  (2.0 * (k + 1.0) * c * Dth - (1.0 - c * c) * Dthp) * dvc +
                  (k * Dth + k * c * Dthp +
                   static_cast<double>(m) * m * q_poly(alpha, c) / Dth) *
                      vv) +
            kI * (2.0 * static_cast<double>(m) * oma * p.a * s2 * s) *
                (pe * vv + s * dvs) +
            lam0 * (kI * (-2.0 * crt_s3(p, cf, s) * (pe * vv + s * dvs) +
                          dcrt_s2(p, cf, s) * vv) -
                    2.0 * m * tphi_s2(p, cf, s, c) * vv) +
            lam0 * lam0 * tt_s2(p, cf, s, c) * vv;
        const std::size_t row = idx(i, j);
        double scale = 1.0;
        for (std::size_t kk = 0; kk < n; ++kk)
          scale = std::max(scale, std::abs(pen.A0[row * n + kk]));
        worst = std::max(worst, std::abs(pv[row] - exact) / scale);
      }
    }
    if (worst > 1e-8)
      throw GridTooCoarse("assemble_pencil: manufactured-function residual " +
                          std::to_string(worst));
  }

  return pen;
}

std::vector<cd> apply_pencil(const QnfPencil& pen, cd lambda,
                             const std::vector<cd>& v) {
  const std::size_t n = pen.n;
  std::vector<cd> out(n, cd(0.0));
  const cd l2 = lambda * lambda;
  for (std::size_t i = 0; i < n; ++i) {
    cd acc(0.0);
    const cd* a0 = &pen.A0[i * n];
    const cd* a1 = &pen.A1[i * n];
    const cd* a2 = &pen.A2[i * n];
    for (std::size_t j = 0; j < n; ++j)
      acc += (a0[j] + lambda * a1[j] + l2 * a2[j]) * v[j];
    out[i] = acc;
  }
  return out;
}

std::vector<cd> evaluate_pencil(const QnfPencil& pen, cd lambda) {
  const std::size_t n = pen.n;
  std::vector<cd> out(n * n);
  const cd l2 = lambda * lambda;
  for (std::size_t i = 0; i < n * n; ++i)
    out[i] = pen.A0[i] + lambda * pen.A1[i] + l2 * pen.A2[i];
  return out;
}

double pencil_residual(const QnfPencil& pen, cd lambda,
                       const std::vector<cd>& v) {
  const std::size_t n = pen.n;
  std::vector<bool> is_bc(n, false);
  for (std::size_t r : pen.boundary_row_indices) is_bc[r] = true;
  const auto pv = apply_pencil(pen, lambda, v);
  double vmax = 0.0;
  for (const auto& x : v) vmax = std::max(vmax, std::abs(x));
  if (vmax == 0.0) return std::numeric_limits<double>::infinity();
  const double al = std::abs(lambda);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_bc[i]) continue;
    double rs = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      rs += std::abs(pen.A0[i * n + j]) + al * std::abs(pen.A1[i * n + j]) +
            al * al * std::abs(pen.A2[i * n + j]);
    worst = std::max(worst, std::abs(pv[i]) / (rs * vmax));
  }
  return worst;
}

}  // namespace kaqnf
