#include "kaqnf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kaqnf {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string region_tag_name(RegionTag tag) {
  switch (tag) {
    case RegionTag::NoHorizon: return "NoHorizon";
    case RegionTag::Extremal: return "Extremal";
    case RegionTag::Admissible: return "Admissible";
    case RegionTag::AdmissibleHawkingReall: return "AdmissibleHawkingReall";
    case RegionTag::InvalidParams: return "InvalidParams";
  }
  return "Unknown";
}

double delta_r(const BlackHoleParams& p, double r) {
  return (r * r + p.a * p.a) * (1.0 + r * r) - 2.0 * p.M * r;
}

double d_delta_r(const BlackHoleParams& p, double r) {
  return 2.0 * r * (1.0 + r * r) + (r * r + p.a * p.a) * 2.0 * r - 2.0 * p.M;
}

std::optional<HorizonData> find_horizons(const BlackHoleParams& p) {
  // Delta_r is a quartic with positive second derivative for r > 0, so it
  // has at most two sign changes on (0, r_max].  r_max dominates the 2Mr
  // term comfortably.
  const double r_max = 2.0 + 2.0 * p.M + std::abs(p.a);
  const int n_scan = 4000;
  double lo = 0.0, hi = 0.0;
  double prev_r = 0.0;
  double prev_f = delta_r(p, 0.0);
  bool bracketed = false;
  // Take the last sign change encountered; its right endpoint has
  // Delta_r > 0, so it brackets the largest root.
  for (int i = 1; i <= n_scan; ++i) {
    const double r = r_max * static_cast<double>(i) / n_scan;
    const double f = delta_r(p, r);
    if (prev_f <= 0.0 && f > 0.0) {
      lo = prev_r;
      hi = r;
      bracketed = true;
    }
    prev_r = r;
    prev_f = f;
  }
  if (!bracketed) {
    // Grazing roots (double root of the quartic) never produce a sign
    // change; they are extremal and rejected below via the minimum.
    double r_min = 0.0, f_min = delta_r(p, 0.0);
    for (int i = 1; i <= n_scan; ++i) {
      const double r = r_max * static_cast<double>(i) / n_scan;
      const double f = delta_r(p, r);
      if (f < f_min) {
        f_min = f;
        r_min = r;
      }
    }
    if (std::abs(f_min) < 1e-8 && d_delta_r(p, r_min) <= kExtremalTol) {
      return std::nullopt;  // extremal (degenerate root)
    }
    return std::nullopt;  // no horizon
  }

  // Bisection to a coarse interval, then Newton polish.
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (delta_r(p, mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double r_plus = 0.5 * (lo + hi);
  for (int i = 0; i < 6; ++i) {
    const double f = delta_r(p, r_plus);
    const double df = d_delta_r(p, r_plus);
    if (df == 0.0) break;
    r_plus -= f / df;
  }

  const double slope = d_delta_r(p, r_plus);
  if (slope <= kExtremalTol) return std::nullopt;

  HorizonData hd;
  hd.r_plus = r_plus;
  hd.dDelta_r_plus = slope;
  hd.alpha = p.a * p.a;
  hd.omega = p.a / (r_plus * r_plus + p.a * p.a);
  hd.kappa = surface_gravity(p, hd);
  return hd;
}

double surface_gravity(const BlackHoleParams& p, const HorizonData& hd) {
  const double alpha = p.a * p.a;
  return hd.dDelta_r_plus /
         (2.0 * (1.0 - alpha) * (hd.r_plus * hd.r_plus + p.a * p.a));
}

RegionTag classify_region(const BlackHoleParams& p) {
  if (std::abs(p.a) >= 1.0) return RegionTag::InvalidParams;
  if (p.M <= 0.0) return RegionTag::InvalidParams;
  auto hd = find_horizons(p);
  if (!hd) {
    // Distinguish a grazing (extremal) quartic from a strictly positive one.
    const double r_max = 2.0 + 2.0 * p.M + std::abs(p.a);
    double f_min = delta_r(p, 0.0);
    for (int i = 1; i <= 2000; ++i) {
      const double r = r_max * static_cast<double>(i) / 2000;
      f_min = std::min(f_min, delta_r(p, r));
    }
    return f_min < 1e-7 ? RegionTag::Extremal : RegionTag::NoHorizon;
  }
  if (hd->r_plus * hd->r_plus > std::abs(p.a))
    return RegionTag::AdmissibleHawkingReall;
  return RegionTag::Admissible;
}

std::vector<RegionScanCell> region_scan(const std::vector<double>& a_grid,
                                        const std::vector<double>& M_grid,
                                        double nu) {
  std::vector<RegionScanCell> out(a_grid.size() * M_grid.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    for (std::size_t j = 0; j < M_grid.size(); ++j) {
      BlackHoleParams p{a_grid[i], M_grid[j], nu};
      RegionScanCell cell;
      cell.a = p.a;
      cell.M = p.M;
      cell.tag = classify_region(p);
      cell.r_plus = kNaN;
      cell.kappa = kNaN;
      if (cell.tag == RegionTag::Admissible ||
          cell.tag == RegionTag::AdmissibleHawkingReall) {
        auto hd = find_horizons(p);
        cell.r_plus = hd->r_plus;
        cell.kappa = hd->kappa;
      }
      out[i * M_grid.size() + j] = cell;
    }
  }
  return out;
}

std::string region_scan_csv(const std::vector<RegionScanCell>& cells) {
  std::ostringstream os;
  os.precision(17);
  os << "a,M,r_plus,kappa,region\n";
  for (const auto& c : cells) {
    os << c.a << ',' << c.M << ',';
    if (std::isnan(c.r_plus))
      os << ',';
    else
      os << c.r_plus << ',' << c.kappa;
    os << ',' << region_tag_name(c.tag) << '\n';
  }
  return os.str();
}

std::string ExtensionVariant::id() const {
  std::ostringstream os;
  os << "fplus_scale_" << scale;
  return os.str();
}

ExtensionData extension_data(const BlackHoleParams& p, double r,
                             const ExtensionVariant& variant) {
  const double alpha = p.a * p.a;
  const double f_plus = -variant.scale * (1.0 - alpha) / (1.0 + r * r);
  const double Dr = delta_r(p, r);
  ExtensionData out;
  out.f_plus = f_plus;
  out.dF_t = (1.0 - alpha) * (r * r + p.a * p.a) / Dr + f_plus;
  out.dF_phi = p.a * (1.0 - alpha) / Dr;
  // dt timelike iff Delta_r f^2 + 2 (1-alpha)(r^2+a^2) f < -(1-alpha)^2 a^2.
  const double lhs =
      Dr * f_plus * f_plus + 2.0 * (1.0 - alpha) * (r * r + p.a * p.a) * f_plus;
  out.dt_timelike = lhs < -(1.0 - alpha) * (1.0 - alpha) * p.a * p.a;
  return out;
}

DualCoeffs dual_metric_coeffs(const BlackHoleParams& p, double r, double theta,
                              const ExtensionVariant& variant) {
  if (theta <= 0.0 || theta >= M_PI)
    throw PoleCoordinatesError("dual_metric_coeffs: theta at coordinate pole");
  const double a = p.a;
  const double alpha = a * a;
  const double one_m_alpha = 1.0 - alpha;
  const double Dr = delta_r(p, r);
  const double c = std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  const double Dth = 1.0 - alpha * c * c;
  const double f = extension_data(p, r, variant).f_plus;
  const double r2a2 = r * r + a * a;

  DualCoeffs out;
  out.rr = Dr;
  out.thth = Dth;
  out.rt = Dr * f + one_m_alpha * r2a2;
  out.rphi = one_m_alpha * a;
  out.tt = Dr * f * f + 2.0 * one_m_alpha * r2a2 * f +
           one_m_alpha * one_m_alpha * a * a * s2 / Dth;
  out.tphi = one_m_alpha * a * f + one_m_alpha * one_m_alpha * a / Dth;
  out.phiphi = one_m_alpha * one_m_alpha / (Dth * s2);
  out.rho_sq = r * r + a * a * c * c;
  return out;
}

}  // namespace kaqnf
