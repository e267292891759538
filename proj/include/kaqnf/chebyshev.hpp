// Chebyshev-Gauss-Lobatto collocation nodes and differentiation
// matrices.  Nodes are generated through sin() so the grid is exactly
// symmetric about the midpoint, which the parity reduction in the
// eigensolver relies on.

#ifndef KAQNF_CHEBYSHEV_HPP_
#define KAQNF_CHEBYSHEV_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

namespace kaqnf {

// N + 1 CGL nodes on [-1, 1], descending: x_0 = 1, x_N = -1.
inline std::vector<double> cgl_nodes(std::size_t N) {
  std::vector<double> x(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    // cos(j pi / N) written as sin for exact antisymmetry x_j = -x_{N-j}.
    const double arg =
        M_PI * (static_cast<double>(N) - 2.0 * static_cast<double>(j)) /
        (2.0 * static_cast<double>(N));
    x[j] = std::sin(arg);
  }
  return x;
}

// First-derivative collocation matrix on the CGL nodes (Trefethen's
// formula with the negative-sum trick for the diagonal).  Exact on
// polynomials of degree <= N.
inline std::vector<double> cgl_diff_matrix(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t N = n - 1;
  std::vector<double> D(n * n, 0.0);
  std::vector<double> c(n, 1.0);
  c[0] = 2.0;
  c[N] = 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D[i * n + j] = (c[i] / c[j]) * sign / (x[i] - x[j]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) s += D[i * n + j];
    D[i * n + i] = -s;
  }
  return D;
}

// Matrix product for square row-major matrices of order n.
inline std::vector<double> mat_square(const std::vector<double>& A,
                                      std::size_t n) {
  std::vector<double> B(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = A[i * n + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) B[i * n + j] += aik * A[k * n + j];
    }
  return B;
}

// Collocation grid on a general interval [lo, hi], ascending nodes,
// with first- and second-derivative matrices in the mapped variable.
struct Collocation1D {
  std::vector<double> nodes;  // ascending, nodes[0] = lo
  std::vector<double> D1;     // row-major (N+1)^2
  std::vector<double> D2;
};

inline Collocation1D collocation_interval(std::size_t N, double lo,
                                          double hi) {
  Collocation1D out;
  const auto x = cgl_nodes(N);
  const std::size_t n = N + 1;
  auto D = cgl_diff_matrix(x);
  // Map x in [1, -1] (descending) to ascending t in [lo, hi]:
  // t = mid - half * x, so d/dt = -(2 / (hi - lo)) d/dx.  The mid/half
  // form keeps the endpoints exact and preserves the node antisymmetry
  // bitwise on symmetric intervals (the parity reduction needs that).
  out.nodes.resize(n);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (std::size_t j = 0; j < n; ++j) out.nodes[j] = mid - half * x[j];
  const double scale = -2.0 / (hi - lo);
  out.D1.resize(n * n);
  for (std::size_t i = 0; i < n * n; ++i) out.D1[i] = scale * D[i];
  out.D2 = mat_square(out.D1, n);
  return out;
}

}  // namespace kaqnf

#endif  // KAQNF_CHEBYSHEV_HPP_
