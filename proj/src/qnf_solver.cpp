#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>

#include "kaqnf/qnf_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <lapacke.h>
#include <sstream>

#include "kaqnf/phase_space.hpp"

namespace kaqnf {

namespace {

using cd = std::complex<double>;

// Angular parity reduction: the pencil commutes with c -> -c, so its
// spectrum splits over the symmetric/antisymmetric half grids.
struct ParityBlock {
  int parity;                 // +1 even, -1 odd
  std::size_t n = 0;          // reduced dimension
  std::size_t n_half = 0;     // angular half-grid size
  std::vector<std::size_t> j1, j2;  // paired angular indices, j1 <= j2
  std::vector<double> f;            // basis normalization per pair
  std::vector<cd> A0, A1, A2;
};

ParityBlock reduce_parity(const QnfPencil& pen, int parity) {
  const std::size_t nc = pen.grid.N_theta + 1;
  const std::size_t nr = pen.grid.N_r + 1;
  ParityBlock blk;
  blk.parity = parity;
  for (std::size_t j = 0; 2 * j < nc; ++j) {
    const std::size_t jr = nc - 1 - j;
    if (j == jr && parity < 0) continue;  // midpoint node is even
    blk.j1.push_back(j);
    blk.j2.push_back(jr);
    blk.f.push_back(j == jr ? 1.0 : M_SQRT1_2);
  }
  blk.n_half = blk.j1.size();
  blk.n = nr * blk.n_half;

  const std::size_t n = pen.n;
  const std::size_t nh = blk.n_half;
  auto reduce = [&](const std::vector<cd>& A) {
    std::vector<cd> R(blk.n * blk.n, cd(0.0));
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t q = 0; q < nh; ++q) {
        const std::size_t rows[2] = {i * nc + blk.j1[q], i * nc + blk.j2[q]};
        const int nrow = blk.j1[q] == blk.j2[q] ? 1 : 2;
        const std::size_t out_row = (i * nh + q) * blk.n;
        for (std::size_t ip = 0; ip < nr; ++ip)
          for (std::size_t qp = 0; qp < nh; ++qp) {
            const std::size_t cols[2] = {ip * nc + blk.j1[qp],
                                         ip * nc + blk.j2[qp]};
            const int ncol = blk.j1[qp] == blk.j2[qp] ? 1 : 2;
            cd acc(0.0);
            for (int u = 0; u < nrow; ++u)
              for (int v = 0; v < ncol; ++v) {
                const double sgn = ((u == 1 ? parity : 1) *
                                    (v == 1 ? parity : 1));
                acc += sgn * A[rows[u] * n + cols[v]];
              }
            R[out_row + ip * nh + qp] = blk.f[q] * blk.f[qp] * acc;
          }
      }
    return R;
  };
  blk.A0 = reduce(pen.A0);
  blk.A1 = reduce(pen.A1);
  blk.A2 = reduce(pen.A2);
  return blk;
}

std::vector<cd> lift_parity(const ParityBlock& blk, const QnfPencil& pen,
                            const std::vector<cd>& vr) {
  const std::size_t nc = pen.grid.N_theta + 1;
  const std::size_t nr = pen.grid.N_r + 1;
  std::vector<cd> v(pen.n, cd(0.0));
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t q = 0; q < blk.n_half; ++q) {
      const cd val = vr[i * blk.n_half + q];
      v[i * nc + blk.j1[q]] += blk.f[q] * val;
      if (blk.j2[q] != blk.j1[q])
        v[i * nc + blk.j2[q]] += blk.parity * blk.f[q] * val;
    }
  return v;
}

// Companion eigenvalues of A0 + lambda A1 + lambda^2 A2 (lambda
// prescaled by kappa for conditioning), eigenvalues only.
std::vector<cd> companion_eigenvalues(const ParityBlock& blk, double kappa) {
  const std::size_t nn = blk.n;
  const lapack_int N = static_cast<lapack_int>(2 * nn);
  // Column-major L z = lambda' R z with z = (v, lambda' v):
  //   L = [0 I; -A0 -kappa A1],  R = [I 0; 0 kappa^2 A2].
  std::vector<cd> L(4 * nn * nn, cd(0.0)), R(4 * nn * nn, cd(0.0));
  auto at = [N](std::vector<cd>& M, std::size_t i, std::size_t j) -> cd& {
    return M[i + j * static_cast<std::size_t>(N)];
  };
  for (std::size_t i = 0; i < nn; ++i) {
    at(L, i, nn + i) = 1.0;
    at(R, i, i) = 1.0;
  }
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nn; ++j) {
      at(L, nn + i, j) = -blk.A0[i * nn + j];
      at(L, nn + i, nn + j) = -kappa * blk.A1[i * nn + j];
      at(R, nn + i, nn + j) = kappa * kappa * blk.A2[i * nn + j];
    }
  std::vector<cd> alpha(static_cast<std::size_t>(N)),
      beta(static_cast<std::size_t>(N));
  const lapack_int info = LAPACKE_zggev(
      LAPACK_COL_MAJOR, 'N', 'N', N, L.data(), N, R.data(), N, alpha.data(),
      beta.data(), nullptr, 1, nullptr, 1);
  if (info < 0)
    throw LinearizationSingular("zggev: illegal argument " +
                                std::to_string(-info));
  std::vector<cd> out;
  // info > 0 means some eigenvalues failed to converge (indices < info);
  // the remaining ones are still valid.
  for (std::size_t i = info > 0 ? static_cast<std::size_t>(info) : 0;
       i < static_cast<std::size_t>(N); ++i) {
    if (std::abs(beta[i]) < 1e-14 * (1.0 + std::abs(alpha[i]))) continue;
    out.push_back(kappa * alpha[i] / beta[i]);
  }
  return out;
}

// Inverse iteration on the reduced pencil at a QZ eigenvalue estimate.
std::vector<cd> eigenvector_at(const ParityBlock& blk, cd lambda,
                               std::uint64_t seed) {
  const std::size_t nn = blk.n;
  const lapack_int N = static_cast<lapack_int>(nn);
  std::vector<cd> P(nn * nn);
  const cd l2 = lambda * lambda;
  // Column-major P(lambda).
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nn; ++j)
      P[i + j * nn] =
          blk.A0[i * nn + j] + lambda * blk.A1[i * nn + j] + l2 * blk.A2[i * nn + j];
  std::vector<lapack_int> ipiv(nn);
  const lapack_int info =
      LAPACKE_zgetrf(LAPACK_COL_MAJOR, N, N, P.data(), N, ipiv.data());
  AuditRng rng(seed);
  std::vector<cd> v(nn);
  for (auto& x : v) x = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  if (info > 0) {
    // Exactly singular U: the estimate hit the eigenvalue to machine
    // precision; perturb lambda infinitesimally instead.
    return eigenvector_at(blk, lambda * (1.0 + 1e-13) + cd(0, 1e-15), seed);
  }
  for (int it = 0; it < 2; ++it) {
    LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', N, 1, P.data(), N, ipiv.data(),
                   v.data(), N);
    double nrm = 0.0;
    for (const auto& x : v) nrm = std::max(nrm, std::abs(x));
    for (auto& x : v) x /= nrm;
  }
  return v;
}

}  // namespace

Window Window::default_for(double kappa, int k_threshold) {
  Window w;
  w.im_min = -kappa * (0.5 + k_threshold) + 0.1 * kappa;
  w.im_max = 10.0 * kappa;
  w.re_abs_max = 10.0 * kappa;
  return w;
}

std::vector<QnfResult> solve_qep(const QnfPencil& pen, const Window& win) {
  std::vector<QnfResult> out;
  const double thresh =
      -pen.kappa * (0.5 + pen.mode.k_threshold);
  for (int parity : {+1, -1}) {
    const ParityBlock blk = reduce_parity(pen, parity);
    if (blk.n == 0) continue;
    const auto eigs = companion_eigenvalues(blk, pen.kappa);
    for (const cd lam : eigs) {
      if (!win.contains(lam)) continue;
      const auto vr = eigenvector_at(blk, lam, 0x51a9u);
      const auto v = lift_parity(blk, pen, vr);
      QnfResult res;
      res.lambda = lam;
      res.residual = pencil_residual(pen, lam, v);
      res.converged = false;
      res.halfplane_ok = lam.imag() > thresh;
      out.push_back(res);
    }
  }
  std::sort(out.begin(), out.end(), [](const QnfResult& x, const QnfResult& y) {
    return std::abs(x.lambda) < std::abs(y.lambda);
  });
  return out;
}

double pencil_smallest_singular(const QnfPencil& pen, cd lambda) {
  const std::size_t n = pen.n;
  auto P = evaluate_pencil(pen, lambda);  // row-major == transpose, same svd
  std::vector<double> sv(n);
  std::vector<cd> superb(n);
  const lapack_int info = LAPACKE_zgesvd(
      LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(n),
      static_cast<lapack_int>(n), P.data(), static_cast<lapack_int>(n),
      sv.data(), nullptr, 1, nullptr, 1,
      reinterpret_cast<double*>(superb.data()));
  if (info != 0)
    throw LinearizationSingular("zgesvd failed: " + std::to_string(info));
  return sv[n - 1];
}

std::vector<QnfResult> convergence_filter(const std::vector<QnfResult>& coarse,
                                          const std::vector<QnfResult>& fine,
                                          double kappa, int k_threshold,
                                          double tol) {
  std::vector<QnfResult> out;
  std::vector<bool> used(fine.size(), false);
  const double thresh = -kappa * (0.5 + k_threshold);
  for (const auto& c : coarse) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = fine.size();
    for (std::size_t j = 0; j < fine.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(fine[j].lambda - c.lambda);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best_j == fine.size()) continue;
    if (best >= tol * (1.0 + std::abs(c.lambda))) continue;
    if (!(c.residual < 1e-8 && fine[best_j].residual < 1e-8)) continue;
    used[best_j] = true;
    // Carry the finer-resolution value.
    QnfResult r = fine[best_j];
    r.converged = true;
    r.halfplane_ok = r.lambda.imag() > thresh;
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const QnfResult& x, const QnfResult& y) {
    return std::abs(x.lambda) < std::abs(y.lambda);
  });
  return out;
}

std::vector<QnfResult> converged_qnfs(const BlackHoleParams& p,
                                      const ModeSpec& mode, std::size_t Nr1,
                                      std::size_t Nt1, std::size_t Nr2,
                                      std::size_t Nt2, double delta,
                                      const ExtensionVariant& variant) {
  const Grid2D g1 = make_grid(p, Nr1, Nt1, delta);
  const Grid2D g2 = make_grid(p, Nr2, Nt2, delta);
  const QnfPencil p1 = assemble_pencil(p, mode, g1, variant);
  const QnfPencil p2 = assemble_pencil(p, mode, g2, variant);
  const Window win = Window::default_for(p1.kappa, mode.k_threshold);
  const auto r1 = solve_qep(p1, win);
  const auto r2 = solve_qep(p2, win);
  return convergence_filter(r1, r2, p1.kappa, mode.k_threshold);
}

InvarianceOutcome invariance_test(const BlackHoleParams& p,
                                  const ModeSpec& mode, std::size_t Nr1,
                                  std::size_t Nt1, std::size_t Nr2,
                                  std::size_t Nt2, double delta1, double delta2,
                                  const ExtensionVariant& alt_variant) {
  // The rescaled extension must keep dt timelike beyond the horizon.
  const auto hd = find_horizons(p);
  if (!hd) throw ConfigurationInvalid("invariance_test: no horizon");
  for (int i = 0; i <= 40; ++i) {
    const double r = hd->r_plus * std::pow(1000.0, i / 40.0);
    if (!extension_data(p, r, alt_variant).dt_timelike)
      throw ConfigurationInvalid(
          "invariance_test: alternative f_plus not timelike at r = " +
          std::to_string(r));
  }

  const auto base =
      converged_qnfs(p, mode, Nr1, Nt1, Nr2, Nt2, delta1, ExtensionVariant{});
  const auto moved =
      converged_qnfs(p, mode, Nr1, Nt1, Nr2, Nt2, delta2, ExtensionVariant{});
  const auto refl =
      converged_qnfs(p, mode, Nr1, Nt1, Nr2, Nt2, delta1, alt_variant);

  auto max_disp = [](const std::vector<QnfResult>& a,
                     const std::vector<QnfResult>& b) {
    double worst = 0.0;
    for (const auto& x : a) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : b) best = std::min(best, std::abs(x.lambda - y.lambda));
      // Normalize like the convergence filter so the bound is uniform
      // across the window.
      worst = std::max(worst, best / (1.0 + std::abs(x.lambda)));
    }
    return worst;
  };

  InvarianceOutcome out;
  out.n_matched = base.size();
  out.max_displacement_delta = max_disp(base, moved);
  out.max_displacement_fplus = max_disp(base, refl);
  return out;
}

std::string qnf_table_csv(const BlackHoleParams& p, const ModeSpec& mode,
                          double delta, const ExtensionVariant& variant,
                          std::size_t N_r, std::size_t N_theta,
                          const std::vector<QnfResult>& results) {
  std::ostringstream os;
  os.precision(17);
  os << "a,M,nu,m,bc,delta,fplus_id,N_r,N_theta,re_lambda,im_lambda,residual,"
        "converged,halfplane_ok\n";
  const std::string bc = mode.bc ? mode.bc->name() : "";
  for (const auto& r : results) {
    os << p.a << ',' << p.M << ',' << mode.nu << ',' << mode.m << ',' << bc
       << ',' << delta << ',' << variant.id() << ',' << N_r << ',' << N_theta
       << ',' << r.lambda.real() << ',' << r.lambda.imag() << ','
       << r.residual << ',' << (r.converged ? 1 : 0) << ','
       << (r.halfplane_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace kaqnf
