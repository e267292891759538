#include "kaqnf/bessel_bc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "kaqnf/bessel_k.hpp"
#include "kaqnf/phase_space.hpp"

namespace kaqnf {

namespace {
using cd = std::complex<double>;
}

BoundaryCondition BoundaryCondition::dirichlet(double nu) {
  return BoundaryCondition{BcKind::Dirichlet, {}, {}, {}, 1.0 - nu};
}
BoundaryCondition BoundaryCondition::neumann(double nu) {
  return BoundaryCondition{BcKind::Neumann, {}, {}, {}, 1.0 + nu};
}
BoundaryCondition BoundaryCondition::robin(cd beta, double nu) {
  return BoundaryCondition{BcKind::Robin, beta, {}, {}, 1.0 + nu};
}
BoundaryCondition BoundaryCondition::lambda_robin(cd beta0, cd beta1,
                                                  double nu) {
  return BoundaryCondition{BcKind::LambdaRobin, {}, beta0, beta1, 1.0 + nu};
}

std::string BoundaryCondition::name() const {
  switch (kind) {
    case BcKind::Dirichlet: return "dirichlet";
    case BcKind::Neumann: return "neumann";
    case BcKind::Robin: return "robin";
    case BcKind::LambdaRobin: return "lambda_robin";
  }
  return "unknown";
}

std::pair<double, double> indicial_pair(double nu) {
  return {1.5 - nu, 1.5 + nu};
}

ModelProblem make_model_problem(double nu, cd A0) {
  if (std::abs(A0.imag()) < 1e-14 * (1.0 + std::abs(A0)) && A0.real() <= 0.0)
    throw EllipticityFailure("model problem: A0 on the branch cut (-inf, 0]");
  ModelProblem mp;
  mp.nu = nu;
  mp.A0 = A0;
  mp.zeta = cd(0.0, -1.0) * std::sqrt(A0);
  return mp;
}

ModelValue model_solution(const ModelProblem& mp, double x) {
  const cd root = std::sqrt(mp.A0);  // Re > 0: decaying direction
  const cd w = root * x;
  const cd k = bessel_k(mp.nu, w);
  const cd dk = bessel_k_deriv(mp.nu, w);
  ModelValue out;
  const double sx = std::sqrt(x);
  out.u = sx * k;
  out.du = 0.5 / sx * k + sx * root * dk;
  return out;
}

std::pair<cd, cd> model_coeffs(const ModelProblem& mp) {
  const double nu = mp.nu;
  const cd half_root = 0.5 * std::sqrt(mp.A0);
  const cd pref = M_PI / (2.0 * std::sin(nu * M_PI));
  const cd a_minus = pref * std::pow(half_root, -nu) / std::tgamma(1.0 - nu);
  const cd a_plus = -pref * std::pow(half_root, nu) / std::tgamma(1.0 + nu);
  return {a_minus, a_plus};
}

TraceFit traces(double nu, const std::vector<double>& xs,
                const std::vector<cd>& us) {
  if (nu <= 0.0 || nu >= 1.0)
    throw IllConditionedFit("traces: nu outside (0,1)");
  if (xs.size() < 4 || xs.size() != us.size())
    throw IllConditionedFit("traces: need at least 4 samples");
  const double e[4] = {1.5 - nu, 3.5 - nu, 1.5 + nu, 3.5 + nu};
  const Eigen::Index m = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd A(m, 4);
  Eigen::VectorXcd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int j = 0; j < 4; ++j)
      A(i, j) = std::pow(xs[static_cast<std::size_t>(i)], e[j]);
    b(i) = us[static_cast<std::size_t>(i)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) / svd.singularValues()(3);
  if (!(cond < 1e10))
    throw IllConditionedFit("traces: fit basis condition number too large");
  // Pseudo-inverse applied to the complex right-hand side.
  Eigen::VectorXcd c =
      svd.matrixV().cast<cd>() *
      (svd.singularValues().cwiseInverse().cast<cd>().asDiagonal() *
       (svd.matrixU().transpose().cast<cd>() * b));
  TraceFit out;
  out.gamma_minus = c(0);
  out.gamma_plus = 2.0 * nu * c(2);  // product reading of gamma_+
  out.cond = cond;
  return out;
}

BoundarySymbolCoeffs kerr_ads_boundary_symbol(const BlackHoleParams& p,
                                              double theta,
                                              const ExtensionVariant& variant) {
  const double a = p.a;
  const double alpha = a * a;
  const double oma = 1.0 - alpha;
  const double c = std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  if (s2 <= 0.0)
    throw PoleCoordinatesError("boundary symbol: theta at coordinate pole");
  const double Dth = 1.0 - alpha * c * c;
  const double cf = variant.scale;
  BoundarySymbolCoeffs out;
  out.thth = Dth;
  out.phiphi = oma * oma / (Dth * s2);
  out.tphi = oma * oma * a / Dth;
  out.tt = oma * oma * (cf * cf - 2.0 * cf) + oma * oma * a * a * s2 / Dth;
  return out;
}

cd boundary_symbol_value(const BoundarySymbolCoeffs& c, double xi_theta,
                         double xi_phi, cd lambda) {
  return c.thth * xi_theta * xi_theta + c.phiphi * xi_phi * xi_phi -
         2.0 * lambda * xi_phi * c.tphi + lambda * lambda * c.tt;
}

namespace {

struct SectorSample {
  double theta;
  double xi_theta;
  double xi_phi;
  cd lambda;
};

SectorSample draw_sector_sample(AuditRng& rng, const Sector& sector) {
  SectorSample s;
  s.theta = rng.uniform(0.1, M_PI - 0.1);
  const double psi = rng.uniform(0.0, 0.5 * M_PI);
  const double eta_mag = std::cos(psi);
  const double lam_mag = std::sin(psi);
  const double chi = rng.uniform(0.0, 2.0 * M_PI);
  s.xi_theta = eta_mag * std::cos(chi);
  s.xi_phi = eta_mag * std::sin(chi);
  const double phase = rng.uniform(sector.angle_min, sector.angle_max);
  s.lambda = lam_mag * cd(std::cos(phase), std::sin(phase));
  return s;
}

double bc_margin(double nu, const BoundaryCondition& bc, cd a_minus, cd a_plus,
                 cd lambda) {
  const cd gp = 2.0 * nu * a_plus;
  const double scale = std::abs(a_minus) + std::abs(gp);
  cd t;
  switch (bc.kind) {
    case BcKind::Dirichlet: t = a_minus; break;
    case BcKind::Neumann: t = gp; break;
    case BcKind::Robin: t = gp + bc.beta * a_minus; break;
    case BcKind::LambdaRobin:
      t = gp + (bc.beta0 + bc.beta1 * lambda) * a_minus;
      break;
  }
  return std::abs(t) / scale;
}

}  // namespace

LopatinskiiReport lopatinskii_check(double nu, const BoundaryCondition& bc,
                                    const BlackHoleParams& p,
                                    const Sector& sector,
                                    std::size_t n_samples, std::uint64_t seed,
                                    const ExtensionVariant& variant) {
  LopatinskiiReport rep;
  rep.nu = nu;
  rep.bc_name = bc.name();
  rep.n_samples = n_samples;
  AuditRng rng(seed);
  double min_margin = std::numeric_limits<double>::infinity();
  LopatinskiiWitness worst{};
  for (std::size_t i = 0; i < n_samples; ++i) {
    const SectorSample s = draw_sector_sample(rng, sector);
    const auto coeffs = kerr_ads_boundary_symbol(p, s.theta, variant);
    const cd A0 = boundary_symbol_value(coeffs, s.xi_theta, s.xi_phi, s.lambda);
    const ModelProblem mp = make_model_problem(nu, A0);
    const auto [am, ap] = model_coeffs(mp);
    const double margin = bc_margin(nu, bc, am, ap, s.lambda);
    if (margin < min_margin) {
      min_margin = margin;
      worst = {s.theta, s.xi_theta, s.xi_phi, s.lambda, A0, margin};
    }
  }
  rep.min_margin = min_margin;
  rep.passed = min_margin > 1e-6;
  if (!rep.passed) rep.witness = worst;
  return rep;
}

std::string lopatinskii_report_json(const LopatinskiiReport& rep) {
  nlohmann::json j;
  j["nu"] = rep.nu;
  j["bc"] = rep.bc_name;
  j["n_samples"] = rep.n_samples;
  j["min_margin"] = rep.min_margin;
  j["passed"] = rep.passed;
  if (rep.witness) {
    const auto& w = *rep.witness;
    j["witness"] = {{"theta", w.theta},
                    {"xi_theta", w.xi_theta},
                    {"xi_phi", w.xi_phi},
                    {"lambda", {w.lambda.real(), w.lambda.imag()}},
                    {"A0", {w.A0.real(), w.A0.imag()}},
                    {"margin", w.margin}};
  }
  return j.dump(2);
}

cd degenerate_robin_beta(double nu, const BlackHoleParams& p,
                         const Sector& sector, std::uint64_t seed) {
  AuditRng rng(seed);
  const SectorSample s = draw_sector_sample(rng, sector);
  const auto coeffs = kerr_ads_boundary_symbol(p, s.theta);
  const cd A0 = boundary_symbol_value(coeffs, s.xi_theta, s.xi_phi, s.lambda);
  const auto [am, ap] = model_coeffs(make_model_problem(nu, A0));
  return -2.0 * nu * ap / am;
}

BoundaryRows boundary_rows(double nu, const BoundaryCondition& bc,
                           const std::vector<double>& deriv_row) {
  const std::size_t n = deriv_row.size();
  BoundaryRows rows;
  rows.lambda0.assign(n, cd(0.0));
  rows.lambda1.assign(n, cd(0.0));
  const double mu_expected =
      bc.kind == BcKind::Dirichlet ? 1.0 - nu : 1.0 + nu;
  if (std::abs(bc.mu - mu_expected) > 1e-12)
    throw UnsupportedOrder("boundary_rows: bc order mu inconsistent with nu");
  switch (bc.kind) {
    case BcKind::Dirichlet:
      rows.lambda0[0] = 1.0;
      break;
    case BcKind::Neumann:
      for (std::size_t i = 0; i < n; ++i) rows.lambda0[i] = deriv_row[i];
      break;
    case BcKind::Robin:
      for (std::size_t i = 0; i < n; ++i) rows.lambda0[i] = deriv_row[i];
      rows.lambda0[0] += bc.beta;
      break;
    case BcKind::LambdaRobin:
      for (std::size_t i = 0; i < n; ++i) rows.lambda0[i] = deriv_row[i];
      rows.lambda0[0] += bc.beta0;
      rows.lambda1[0] = bc.beta1;
      break;
  }
  return rows;
}

}  // namespace kaqnf
