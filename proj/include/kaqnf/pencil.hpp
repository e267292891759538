// Collocation discretization of the spectral family P(lambda) at fixed
// azimuthal mode m: tensor Chebyshev grid in s = 1/r and c = cos theta,
// substitution u = s^p v with p an indicial exponent, quadratic pencil
// A0 + lambda A1 + lambda^2 A2 with boundary rows at s = 0.

#ifndef KAQNF_PENCIL_HPP_
#define KAQNF_PENCIL_HPP_

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kaqnf/bessel_bc.hpp"
#include "kaqnf/geometry.hpp"

namespace kaqnf {

struct InvalidRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModeSpec {
  int m = 0;
  double nu = 1.5;
  std::optional<BoundaryCondition> bc;  // required iff 0 < nu < 1
  int k_threshold = 2;  // target half-plane Im lambda > -kappa(1/2 + k)
};

// Throws InvalidRegion when the bc presence contradicts the nu range.
void validate_mode(const ModeSpec& mode);

struct Grid2D {
  std::size_t N_r = 0;
  std::size_t N_theta = 0;
  double delta = 0.05;
  double r_inner = 0.0;  // Delta_r(r_inner) = -delta, r_inner < r_plus
  double s_max = 0.0;    // 1 / r_inner
  std::vector<double> s_nodes;  // ascending, s_nodes[0] = 0 exactly
  std::vector<double> Ds, Ds2;  // radial differentiation matrices
  std::vector<double> c_nodes;  // ascending in [-1, 1], symmetric
  std::vector<double> Dc, Dc2;
};

Grid2D make_grid(const BlackHoleParams& p, std::size_t N_r,
                 std::size_t N_theta, double delta);

struct QnfPencil {
  std::size_t n = 0;  // (N_r+1)(N_theta+1)
  std::vector<std::complex<double>> A0, A1, A2;  // row-major n x n
  std::vector<std::size_t> boundary_row_indices;
  BlackHoleParams params{};
  ModeSpec mode{};
  Grid2D grid{};
  ExtensionVariant variant{};
  double p_exp = 0.0;  // substitution exponent
  double kappa = 0.0;
};

QnfPencil assemble_pencil(const BlackHoleParams& p, const ModeSpec& mode,
                          const Grid2D& grid,
                          const ExtensionVariant& variant = {});

// P(lambda) v by Horner evaluation of the three pencil blocks.
std::vector<std::complex<double>> apply_pencil(
    const QnfPencil& pen, std::complex<double> lambda,
    const std::vector<std::complex<double>>& v);

// Dense P(lambda) = A0 + lambda A1 + lambda^2 A2.
std::vector<std::complex<double>> evaluate_pencil(const QnfPencil& pen,
                                                  std::complex<double> lambda);

// Max-norm residual of (lambda, v) over PDE rows, each row normalized
// by its pencil scale ||A0_i||_1 + |lambda| ||A1_i||_1 + |lambda|^2
// ||A2_i||_1, divided by ||v||_inf.
double pencil_residual(const QnfPencil& pen, std::complex<double> lambda,
                       const std::vector<std::complex<double>>& v);

}  // namespace kaqnf

#endif  // KAQNF_PENCIL_HPP_
