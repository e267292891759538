// Exact Kerr-AdS metric data on the extended slice (l = 1 units):
// horizon location, surface gravity, parameter-region classification,
// extension functions and dual-metric coefficients in the regular
// coordinates (t, r, theta, phi).

#ifndef KAQNF_GEOMETRY_HPP_
#define KAQNF_GEOMETRY_HPP_

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kaqnf {

struct BlackHoleParams {
  double a;   // rotation parameter, |a| < 1
  double M;   // mass, > 0
  double nu;  // effective mass parameter, > 0

  bool valid() const { return std::abs(a) < 1.0 && M > 0.0 && nu > 0.0; }
};

// Data attached to the largest root of Delta_r.
struct HorizonData {
  double r_plus;         // largest positive root of Delta_r
  double dDelta_r_plus;  // d/dr Delta_r at r_plus, > 0 (nonextremal)
  double kappa;          // surface gravity
  double omega;          // horizon angular velocity a / (r_plus^2 + a^2)
  double alpha;          // a^2 in l = 1 units
};

enum class RegionTag {
  NoHorizon,
  Extremal,
  Admissible,
  AdmissibleHawkingReall,
  InvalidParams,
};

std::string region_tag_name(RegionTag tag);

struct InvalidParamsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Delta_r = (r^2 + a^2)(1 + r^2) - 2 M r
double delta_r(const BlackHoleParams& p, double r);
double d_delta_r(const BlackHoleParams& p, double r);

// Extremality tolerance: dDelta_r(r_plus) <= this is classified Extremal.
inline constexpr double kExtremalTol = 1e-10;

// Locates the largest root of Delta_r by bracketing scan plus
// bisection and Newton polish.  Empty if no horizon or extremal.
std::optional<HorizonData> find_horizons(const BlackHoleParams& p);

double surface_gravity(const BlackHoleParams& p, const HorizonData& hd);

RegionTag classify_region(const BlackHoleParams& p);

struct RegionScanCell {
  double a;
  double M;
  RegionTag tag;
  double r_plus;  // NaN when no horizon
  double kappa;   // NaN when no horizon
};

std::vector<RegionScanCell> region_scan(const std::vector<double>& a_grid,
                                        const std::vector<double>& M_grid,
                                        double nu = 1.0);

// CSV with header a,M,r_plus,kappa,region; empty fields where no horizon.
std::string region_scan_csv(const std::vector<RegionScanCell>& cells);

// Horizon-crossing extension.  The default generator is
// f_plus(r) = -(1 - alpha) / (1 + r^2); `scale` rescales it, which is
// the alternative extension exercised by the invariance tests.
struct ExtensionVariant {
  double scale = 1.0;
  std::string id() const;
};

struct ExtensionData {
  double f_plus;
  double dF_t;    // only meaningful for r > r_plus
  double dF_phi;  // only meaningful for r > r_plus
  bool dt_timelike;
};

ExtensionData extension_data(const BlackHoleParams& p, double r,
                             const ExtensionVariant& variant = {});

struct PoleCoordinatesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The seven independent coefficients of the quadratic form
// rho^2 g^{-1} = sum C^{mu nu} D_mu D_nu in (t, r, theta, phi).
// C^{r theta}, C^{theta t}, C^{theta phi} vanish identically.
struct DualCoeffs {
  double rr;        // Delta_r
  double thth;      // Delta_theta
  double tt;
  double tphi;
  double phiphi;
  double rt;
  double rphi;      // (1 - alpha) a
  double rho_sq;    // conformal factor rho^2 = r^2 + a^2 cos^2 theta
};

DualCoeffs dual_metric_coeffs(const BlackHoleParams& p, double r, double theta,
                              const ExtensionVariant& variant = {});

}  // namespace kaqnf

#endif  // KAQNF_GEOMETRY_HPP_
