#include "kaqnf/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "kaqnf/rk45.hpp"

namespace kaqnf {

namespace {

struct LocalGeom {
  double Dr, dDr;        // Delta_r, d/dr Delta_r
  double Dth, dDth;      // Delta_theta, d/dtheta Delta_theta
  double W, dW;          // (1-alpha)^2 / (Delta_theta sin^2 theta) and d/dtheta
  double a, one_m_alpha;
};

LocalGeom local_geom(const BlackHoleParams& p, double r, double theta,
                     bool need_w) {
  LocalGeom g;
  const double alpha = p.a * p.a;
  g.a = p.a;
  g.one_m_alpha = 1.0 - alpha;
  g.Dr = delta_r(p, r);
  g.dDr = d_delta_r(p, r);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  g.Dth = 1.0 - alpha * c * c;
  g.dDth = 2.0 * alpha * c * s;
  if (need_w) {
    const double den = g.Dth * s * s;
    g.W = g.one_m_alpha * g.one_m_alpha / den;
    g.dW = -g.W * (g.dDth * s * s + g.Dth * 2.0 * s * c) / den;
  } else {
    g.W = 0.0;
    g.dW = 0.0;
  }
  return g;
}

}  // namespace

PhasePoint PhasePoint::make(double r, double theta, double phi, double rho,
                            double xht, double xhp, int sigma) {
  if (rho < 0.0) throw ChartViolation("PhasePoint: rho must be >= 0");
  if (sigma != 1 && sigma != -1)
    throw ChartViolation("PhasePoint: sigma must be +1 or -1");
  return PhasePoint{r, theta, phi, rho, xht, xhp, sigma};
}

SymbolValue symbol_finite(const BlackHoleParams& p, double r, double theta,
                          double xi_r, double xi_theta, double xi_phi,
                          std::complex<double> z,
                          const ExtensionVariant& variant) {
  const bool need_w = xi_phi != 0.0 || z != std::complex<double>(0.0);
  const LocalGeom g = local_geom(p, r, theta, need_w);
  const double f = extension_data(p, r, variant).f_plus;
  const double r2a2 = r * r + p.a * p.a;
  const double sin2 = std::sin(theta) * std::sin(theta);

  const std::complex<double> xr = xi_r - f * z;
  const std::complex<double> full =
      g.Dr * xr * xr + g.Dth * xi_theta * xi_theta +
      2.0 * g.one_m_alpha * xr * (g.a * xi_phi - r2a2 * z) +
      g.W * (xi_phi - g.a * sin2 * z) * (xi_phi - g.a * sin2 * z);

  SymbolValue out;
  out.p = full.real();
  out.q = -full.imag();  // symbol is p - iq
  out.p1 = g.Dth * xi_theta * xi_theta + g.W * xi_phi * xi_phi;
  const double p2root = g.Dr * xi_r + 2.0 * g.one_m_alpha * g.a * xi_phi;
  out.p2 = p2root * p2root;
  out.rho1 = 0.0;  // only defined in projective scaling
  return out;
}

SymbolValue symbol(const BlackHoleParams& p, const PhasePoint& pt,
                   std::complex<double> z, const ExtensionVariant& variant) {
  // The symbol is a quadratic form in (xi, z) jointly, so
  // rho^2 p(e / rho, z) = p(e, rho z) with e = (sigma, xi_hat).
  SymbolValue out =
      symbol_finite(p, pt.r, pt.theta, static_cast<double>(pt.sigma),
                    pt.xi_hat_theta, pt.xi_hat_phi, pt.rho * z, variant);
  out.rho1 = pt.rho * pt.rho + out.p1 + out.p2;
  return out;
}

double rho1_value(const BlackHoleParams& p, const PhasePoint& pt) {
  const bool need_w = pt.xi_hat_phi != 0.0;
  const LocalGeom g = local_geom(p, pt.r, pt.theta, need_w);
  const double p1 = g.Dth * pt.xi_hat_theta * pt.xi_hat_theta +
                    (need_w ? g.W * pt.xi_hat_phi * pt.xi_hat_phi : 0.0);
  const double root =
      pt.sigma * g.Dr + 2.0 * g.one_m_alpha * g.a * pt.xi_hat_phi;
  return pt.rho * pt.rho + p1 + root * root;
}

HamiltonField hamilton_field(const BlackHoleParams& p, const PhasePoint& pt) {
  const bool need_w = pt.xi_hat_phi != 0.0;
  const LocalGeom g = local_geom(p, pt.r, pt.theta, need_w);
  const double sigma = pt.sigma;
  const double xht = pt.xi_hat_theta;
  const double xhp = pt.xi_hat_phi;

  // Closed-form partials of the homogeneous degree-2 symbol evaluated at
  // the scaled momentum e = (sigma, xi_hat_theta, xi_hat_phi).
  const double p_r = g.dDr;  // dDr * sigma^2
  const double p_th = g.dDth * xht * xht + (need_w ? g.dW * xhp * xhp : 0.0);

  HamiltonField F;
  F.dr = 2.0 * g.Dr * sigma + 2.0 * g.a * g.one_m_alpha * xhp;
  F.dtheta = 2.0 * g.Dth * xht;
  F.dphi = 2.0 * g.a * g.one_m_alpha * sigma + (need_w ? 2.0 * g.W * xhp : 0.0);
  F.drho = sigma * pt.rho * p_r;
  F.dxi_hat_theta = -p_th + sigma * xht * p_r;
  F.dxi_hat_phi = sigma * xhp * p_r;
  return F;
}

double rho1_derivative(const BlackHoleParams& p, const PhasePoint& pt) {
  const bool need_w = pt.xi_hat_phi != 0.0;
  const LocalGeom g = local_geom(p, pt.r, pt.theta, need_w);
  const HamiltonField F = hamilton_field(p, pt);
  const double xht = pt.xi_hat_theta;
  const double xhp = pt.xi_hat_phi;
  const double root = pt.sigma * g.Dr + 2.0 * g.one_m_alpha * g.a * xhp;

  double d = 2.0 * pt.rho * F.drho;
  d += (g.dDth * xht * xht + (need_w ? g.dW * xhp * xhp : 0.0)) * F.dtheta;
  d += 2.0 * g.Dth * xht * F.dxi_hat_theta;
  if (need_w) d += 2.0 * g.W * xhp * F.dxi_hat_phi;
  d += 2.0 * root *
       (pt.sigma * g.dDr * F.dr + 2.0 * g.one_m_alpha * g.a * F.dxi_hat_phi);
  return d;
}

std::string flow_terminal_name(FlowTerminal t) {
  switch (t) {
    case FlowTerminal::ConvergedToLplus: return "ConvergedToLplus";
    case FlowTerminal::ConvergedToLminus: return "ConvergedToLminus";
    case FlowTerminal::ExitedDeltaRegion: return "ExitedDeltaRegion";
    case FlowTerminal::MaxTime: return "MaxTime";
    case FlowTerminal::ChartExit: return "ChartExit";
    case FlowTerminal::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

FlowOutcome integrate_flow(const BlackHoleParams& p, const PhasePoint& start,
                           int direction, const FlowConfig& cfg) {
  // State: (r, theta, phi, rho, xi_hat_theta, xi_hat_phi); sigma fixed.
  const int sigma = start.sigma;
  auto to_point = [&](const StateVec<6>& y) {
    return PhasePoint{y[0], y[1], y[2], y[3], y[4], y[5], sigma};
  };
  auto rhs = [&](const StateVec<6>& y, StateVec<6>& dy) {
    const HamiltonField F = hamilton_field(p, to_point(y));
    dy[0] = direction * F.dr;
    dy[1] = direction * F.dtheta;
    dy[2] = direction * F.dphi;
    dy[3] = direction * F.drho;
    dy[4] = direction * F.dxi_hat_theta;
    dy[5] = direction * F.dxi_hat_phi;
  };

  std::vector<std::function<double(double, const StateVec<6>&)>> events;
  events.push_back([&](double, const StateVec<6>& y) {
    return cfg.eps_sink - rho1_value(p, to_point(y));
  });
  events.push_back([&](double, const StateVec<6>& y) {
    return -cfg.delta - delta_r(p, y[0]);
  });
  events.push_back(
      [&](double, const StateVec<6>& y) { return y[3] - cfg.rho_chart_max; });

  Rk45Options<6> opt;
  opt.t_max = cfg.t_max;
  opt.h_max = 0.25;
  StateVec<6> y0{start.r, start.theta, start.phi,
                 start.rho, start.xi_hat_theta, start.xi_hat_phi};

  std::vector<std::pair<double, StateVec<6>>> traj;
  auto res = integrate_rk45<6>(rhs, y0, opt, events,
                               cfg.record_trajectory ? &traj : nullptr);

  FlowOutcome out;
  out.time = res.t_end;
  if (cfg.record_trajectory) {
    out.trajectory.reserve(traj.size());
    for (const auto& [t, y] : traj) out.trajectory.push_back(to_point(y));
  }
  switch (res.status) {
    case StepStatus::Event:
      if (res.event_index == 0)
        out.terminal = sigma > 0 ? FlowTerminal::ConvergedToLplus
                                 : FlowTerminal::ConvergedToLminus;
      else if (res.event_index == 1)
        out.terminal = FlowTerminal::ExitedDeltaRegion;
      else
        out.terminal = FlowTerminal::ChartExit;
      break;
    case StepStatus::Failed:
      out.terminal = FlowTerminal::StepFailure;
      break;
    default:
      out.terminal = FlowTerminal::MaxTime;
      break;
  }
  return out;
}

std::uint64_t AuditRng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double AuditRng::uniform() { return std::ldexp(static_cast<double>(next() >> 11), -53); }

double AuditRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int AuditRng::sign() { return (next() & 1ULL) ? 1 : -1; }

namespace {

// Inverts Delta_r(r) = target for r near r_plus by Newton.
double radius_at_delta(const BlackHoleParams& p, const HorizonData& hd,
                       double target) {
  double r = hd.r_plus + target / hd.dDelta_r_plus;
  for (int i = 0; i < 50; ++i) {
    const double f = delta_r(p, r) - target;
    const double df = d_delta_r(p, r);
    const double step = f / df;
    r -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(r))) break;
  }
  return r;
}

PhasePoint sample_near_radial_set(const BlackHoleParams& p,
                                  const HorizonData& hd, double neighborhood,
                                  AuditRng& rng) {
  const double h = std::sqrt(neighborhood);
  const double hr = h / hd.dDelta_r_plus;
  for (;;) {
    PhasePoint pt;
    pt.sigma = rng.sign();
    pt.r = hd.r_plus + rng.uniform(-hr, hr);
    pt.theta = std::acos(rng.uniform(-0.95, 0.95));
    pt.phi = rng.uniform(0.0, 2.0 * M_PI);
    pt.rho = rng.uniform(0.0, h);
    pt.xi_hat_theta = rng.uniform(-h, h);
    pt.xi_hat_phi = rng.uniform(-h, h);
    if (rho1_value(p, pt) < neighborhood) return pt;
  }
}

}  // namespace

SourceSinkReport source_sink_audit(const BlackHoleParams& p,
                                   std::size_t n_samples, double neighborhood,
                                   std::uint64_t seed, bool parallel) {
  auto hd = find_horizons(p);
  if (!hd) throw InvalidParamsError("source_sink_audit: no horizon");

  std::vector<PhasePoint> samples(n_samples);
  {
    AuditRng rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i)
      samples[i] = sample_near_radial_set(p, *hd, neighborhood, rng);
  }

  std::vector<double> rho1(n_samples), raw(n_samples);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t i = 0; i < n_samples; ++i) {
    const PhasePoint& pt = samples[i];
    rho1[i] = rho1_value(p, pt);
    const double deriv = rho1_derivative(p, pt);
    raw[i] = pt.sigma * deriv - 2.0 * d_delta_r(p, pt.r) * rho1[i];
  }

  // Fit the O(rho1^{3/2}) constant from the largest-rho1 decile.
  std::vector<std::size_t> order(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rho1[a] > rho1[b]; });
  double c_fit = 0.0;
  const std::size_t decile = std::max<std::size_t>(1, n_samples / 10);
  for (std::size_t k = 0; k < decile; ++k) {
    const std::size_t i = order[k];
    if (rho1[i] > 0.0)
      c_fit = std::max(c_fit, -raw[i] / std::pow(rho1[i], 1.5));
  }

  SourceSinkReport rep;
  rep.n_samples = n_samples;
  rep.fitted_c = c_fit;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double margin = raw[i] + c_fit * std::pow(rho1[i], 1.5);
    worst = std::min(worst, margin);
    if (margin < -1e-13 * (1.0 + std::abs(raw[i]))) {
      rep.failures.push_back({samples[i], margin, "source/sink margin negative"});
    }
  }
  rep.worst_margin = worst;
  return rep;
}

namespace {

// Draws a point of the characteristic set at fiber infinity.  Solves
// p = 0 for the momentum magnitude along a random direction; rejects
// base points where the characteristic set is empty.
bool sample_characteristic(const BlackHoleParams& p, const HorizonData& hd,
                           double delta, AuditRng& rng, PhasePoint* out) {
  const double a2 = p.a * p.a;
  const double r_lo = radius_at_delta(p, hd, -0.98 * delta);
  const double dr_hi = std::max(a2, 1e-4);
  const double r_hi = radius_at_delta(p, hd, dr_hi);
  for (int tries = 0; tries < 256; ++tries) {
    const double r = rng.uniform(r_lo, r_hi);
    const double theta = std::acos(rng.uniform(-0.95, 0.95));
    const int sigma = rng.sign();
    const double psi = rng.uniform(0.0, 2.0 * M_PI);
    const LocalGeom g = local_geom(p, r, theta, true);
    const double cpsi = std::cos(psi), spsi = std::sin(psi);
    const double A = g.Dth * cpsi * cpsi + g.W * spsi * spsi;
    const double B = 2.0 * g.a * g.one_m_alpha * sigma * spsi;
    const double C = g.Dr;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) continue;
    const double root = (rng.sign() > 0)
                            ? (-B + std::sqrt(disc)) / (2.0 * A)
                            : (-B - std::sqrt(disc)) / (2.0 * A);
    *out = PhasePoint{r, theta, rng.uniform(0.0, 2.0 * M_PI), 0.0,
                      root * cpsi, root * spsi, sigma};
    return true;
  }
  return false;
}

bool terminal_classified(FlowTerminal t) {
  return t == FlowTerminal::ConvergedToLplus ||
         t == FlowTerminal::ConvergedToLminus ||
         t == FlowTerminal::ExitedDeltaRegion;
}

}  // namespace

NontrappingReport nontrapping_audit(const BlackHoleParams& p,
                                    std::size_t n_samples,
                                    const FlowConfig& cfg, std::uint64_t seed,
                                    bool parallel) {
  auto hd = find_horizons(p);
  if (!hd) throw InvalidParamsError("nontrapping_audit: no horizon");

  std::vector<PhasePoint> samples;
  samples.reserve(n_samples);
  {
    AuditRng rng(seed);
    while (samples.size() < n_samples) {
      PhasePoint pt;
      if (sample_characteristic(p, *hd, cfg.delta, rng, &pt))
        samples.push_back(pt);
    }
  }

  std::vector<int> classified(n_samples, 0);
  std::vector<FlowTerminal> term_to(n_samples), term_away(n_samples);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t i = 0; i < n_samples; ++i) {
    const PhasePoint& pt = samples[i];
    // For sigma = +1 the backward flow tends to L+, the forward flow
    // exits through {Delta_r <= -delta}; mirrored for sigma = -1.
    const int dir_to_l = -pt.sigma;
    const auto to_l = integrate_flow(p, pt, dir_to_l, cfg);
    const auto away = integrate_flow(p, pt, -dir_to_l, cfg);
    term_to[i] = to_l.terminal;
    term_away[i] = away.terminal;
    classified[i] =
        terminal_classified(to_l.terminal) && terminal_classified(away.terminal);
  }

  NontrappingReport rep;
  rep.n_samples = n_samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    if (classified[i]) {
      ++rep.n_classified;
    } else {
      std::ostringstream os;
      os << "toward=" << flow_terminal_name(term_to[i])
         << " away=" << flow_terminal_name(term_away[i]);
      rep.failures.push_back({samples[i], 0.0, os.str()});
    }
  }
  rep.fraction_classified =
      n_samples == 0 ? 1.0
                     : static_cast<double>(rep.n_classified) /
                           static_cast<double>(n_samples);
  return rep;
}

CharacteristicBoundReport characteristic_bound_check(const BlackHoleParams& p,
                                                     std::size_t n_samples,
                                                     std::uint64_t seed) {
  auto hd = find_horizons(p);
  if (!hd) throw InvalidParamsError("characteristic_bound_check: no horizon");
  AuditRng rng(seed);
  const double a2 = p.a * p.a;
  const double r_lo = radius_at_delta(p, *hd, std::max(2.0 * a2, 1e-3));
  const double r_hi = r_lo + 10.0;

  CharacteristicBoundReport rep;
  rep.n_samples = n_samples;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_samples; ++i) {
    PhasePoint pt;
    pt.sigma = rng.sign();
    pt.r = rng.uniform(r_lo, r_hi);
    pt.theta = std::acos(rng.uniform(-0.95, 0.95));
    pt.phi = rng.uniform(0.0, 2.0 * M_PI);
    pt.rho = 0.0;
    // Heavy-tailed momentum directions cover the noncompact hat-plane.
    pt.xi_hat_theta = std::tan(rng.uniform(-1.4, 1.4));
    pt.xi_hat_phi = std::tan(rng.uniform(-1.4, 1.4));
    const SymbolValue sv = symbol(p, pt, 0.0);
    const LocalGeom g = local_geom(p, pt.r, pt.theta, true);
    const double scale = std::abs(g.Dr) +
                         std::abs(2.0 * g.a * g.one_m_alpha * pt.xi_hat_phi) +
                         sv.p1;
    const double normalized = std::abs(sv.p) / scale;
    worst = std::min(worst, normalized);
    if (normalized <= 0.0) ++rep.n_violations;
  }
  rep.min_normalized_p = worst;
  return rep;
}

namespace {

nlohmann::json failure_json(const AuditFailure& f) {
  return nlohmann::json{{"r", f.point.r},
                        {"theta", f.point.theta},
                        {"phi", f.point.phi},
                        {"rho", f.point.rho},
                        {"xi_hat_theta", f.point.xi_hat_theta},
                        {"xi_hat_phi", f.point.xi_hat_phi},
                        {"sigma", f.point.sigma},
                        {"value", f.value},
                        {"detail", f.detail}};
}

}  // namespace

std::string source_sink_report_json(const SourceSinkReport& rep) {
  nlohmann::json j{{"n_samples", rep.n_samples},
                   {"worst_margin", rep.worst_margin},
                   {"fitted_c", rep.fitted_c},
                   {"failures", nlohmann::json::array()}};
  for (const auto& f : rep.failures) j["failures"].push_back(failure_json(f));
  return j.dump(2);
}

std::string nontrapping_report_json(const NontrappingReport& rep) {
  nlohmann::json j{{"n_samples", rep.n_samples},
                   {"fraction_classified", rep.fraction_classified},
                   {"failures", nlohmann::json::array()}};
  for (const auto& f : rep.failures) j["failures"].push_back(failure_json(f));
  return j.dump(2);
}

}  // namespace kaqnf
