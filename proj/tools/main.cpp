// kaqnf command-line driver: config ingestion, subcommand dispatch,
// CSV/JSON artifacts and a run manifest.  One subcommand per
// invocation; identical config + seed reproduces identical artifacts.

#include <algorithm>
#include <chrono>
#include <complex>
#include <functional>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kaqnf/bessel_bc.hpp"
#include "kaqnf/frobenius.hpp"
#include "kaqnf/geometry.hpp"
#include "kaqnf/pencil.hpp"
#include "kaqnf/phase_space.hpp"
#include "kaqnf/qnf_solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using json = nlohmann::json;
using namespace kaqnf;

constexpr const char* kToolVersion = "kaqnf 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitAuditFail = 1;
constexpr int kExitConfigError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a over the canonical (key-sorted) dump; embedded in every
// artifact so manifest/artifact pairs can be matched.
std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- schema ----------------------------------------------------------------
//
// Flat dotted-path field table per task.  validate() reports required
// fields that are missing, unknown keys, and every defaulted field.

enum class FieldType { Number, Integer, String, Object };

struct FieldSpec {
  std::string path;  // dotted
  FieldType type;
  bool required;
  json default_value;  // used when !required
};

const std::vector<std::string> kTasks = {
    "horizons",    "region-scan", "flow-audit", "source-sink-audit",
    "lopatinskii", "qnf",         "oracle-a0",  "invariance"};

std::vector<FieldSpec> schema_for(const std::string& task) {
  std::vector<FieldSpec> f;
  f.push_back({"task", FieldType::String, true, {}});
  f.push_back({"seed", FieldType::Integer, false, 0});
  f.push_back({"workers", FieldType::Integer, false, 0});
  auto params = [&f](bool with_nu) {
    f.push_back({"params", FieldType::Object, true, {}});
    f.push_back({"params.a", FieldType::Number, true, {}});
    f.push_back({"params.M", FieldType::Number, true, {}});
    if (with_nu) f.push_back({"params.nu", FieldType::Number, false, 1.0});
  };
  auto mode = [&f] {
    f.push_back({"mode", FieldType::Object, true, {}});
    f.push_back({"mode.m", FieldType::Integer, true, {}});
    f.push_back({"mode.nu", FieldType::Number, true, {}});
    f.push_back({"mode.k_threshold", FieldType::Integer, false, 2});
    f.push_back({"mode.bc", FieldType::Object, false, nullptr});
    f.push_back({"mode.bc.kind", FieldType::String, false, "dirichlet"});
    f.push_back({"mode.bc.beta_re", FieldType::Number, false, 0.0});
    f.push_back({"mode.bc.beta_im", FieldType::Number, false, 0.0});
  };
  auto grid = [&f] {
    f.push_back({"grid", FieldType::Object, true, {}});
    f.push_back({"grid.N_r", FieldType::Integer, true, {}});
    f.push_back({"grid.N_theta", FieldType::Integer, true, {}});
    f.push_back({"grid.N_r_fine", FieldType::Integer, true, {}});
    f.push_back({"grid.N_theta_fine", FieldType::Integer, true, {}});
    f.push_back({"grid.delta", FieldType::Number, false, 0.05});
  };
  if (task == "horizons") {
    params(true);
  } else if (task == "region-scan") {
    f.push_back({"scan", FieldType::Object, true, {}});
    f.push_back({"scan.a_min", FieldType::Number, false, 0.0});
    f.push_back({"scan.a_max", FieldType::Number, false, 0.999});
    f.push_back({"scan.n_a", FieldType::Integer, true, {}});
    f.push_back({"scan.M_min", FieldType::Number, false, 0.01});
    f.push_back({"scan.M_max", FieldType::Number, false, 4.0});
    f.push_back({"scan.n_M", FieldType::Integer, true, {}});
  } else if (task == "flow-audit") {
    params(true);
    f.push_back({"audit", FieldType::Object, true, {}});
    f.push_back({"audit.n_samples", FieldType::Integer, true, {}});
    f.push_back({"audit.delta", FieldType::Number, false, 0.05});
    f.push_back({"audit.eps_sink", FieldType::Number, false, 1e-8});
    f.push_back({"audit.t_max", FieldType::Number, false, 1e3});
  } else if (task == "source-sink-audit") {
    params(true);
    f.push_back({"audit", FieldType::Object, true, {}});
    f.push_back({"audit.n_samples", FieldType::Integer, true, {}});
    f.push_back({"audit.neighborhood", FieldType::Number, false, 1e-3});
  } else if (task == "lopatinskii") {
    params(false);
    f.push_back({"bc", FieldType::Object, true, {}});
    f.push_back({"bc.kind", FieldType::String, true, {}});
    f.push_back({"bc.beta_re", FieldType::Number, false, 0.0});
    f.push_back({"bc.beta_im", FieldType::Number, false, 0.0});
    f.push_back({"nu", FieldType::Number, true, {}});
    f.push_back({"n_samples", FieldType::Integer, false, 2000});
  } else if (task == "qnf") {
    params(false);
    mode();
    grid();
    f.push_back({"fplus_scale", FieldType::Number, false, 1.0});
  } else if (task == "oracle-a0") {
    params(true);
    f.push_back({"ell", FieldType::Integer, true, {}});
    f.push_back({"window", FieldType::Object, true, {}});
    f.push_back({"window.re_min", FieldType::Number, true, {}});
    f.push_back({"window.re_max", FieldType::Number, true, {}});
    f.push_back({"window.im_min", FieldType::Number, true, {}});
    f.push_back({"window.im_max", FieldType::Number, true, {}});
    f.push_back({"window.n_re", FieldType::Integer, false, 30});
    f.push_back({"window.n_im", FieldType::Integer, false, 20});
    f.push_back({"series_order", FieldType::Integer, false, 60});
  } else if (task == "invariance") {
    params(false);
    mode();
    grid();
    f.push_back({"delta_moved", FieldType::Number, true, {}});
    f.push_back({"fplus_scale_alt", FieldType::Number, true, {}});
    f.push_back({"tol", FieldType::Number, false, 1e-5});
  } else {
    throw ConfigError("unknown task '" + task + "'");
  }
  return f;
}

const json* lookup(const json& root, const std::string& path) {
  const json* cur = &root;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos
                                                 ? std::string::npos
                                                 : dot - pos);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return cur;
}

bool type_matches(const json& v, FieldType t) {
  switch (t) {
    case FieldType::Number:
      return v.is_number();
    case FieldType::Integer:
      return v.is_number_integer();
    case FieldType::String:
      return v.is_string();
    case FieldType::Object:
      return v.is_object();
  }
  return false;
}

// Validates the config against the task schema; fills `defaults` with
// "path = value" lines and returns the config with defaults applied.
json validate_config(const json& cfg, std::vector<std::string>* defaults) {
  if (!cfg.is_object()) throw ConfigError("config root must be an object");
  const json* task = lookup(cfg, "task");
  if (!task || !task->is_string())
    throw ConfigError("missing required field 'task'");
  const auto schema = schema_for(task->get<std::string>());

  // Unknown-key sweep: every leaf path in the config must be declared.
  std::vector<std::string> known;
  for (const auto& fs : schema) known.push_back(fs.path);
  std::function<void(const json&, const std::string&)> sweep =
      [&](const json& node, const std::string& prefix) {
        for (const auto& [key, val] : node.items()) {
          const std::string path = prefix.empty() ? key : prefix + "." + key;
          if (std::find(known.begin(), known.end(), path) == known.end())
            throw ConfigError("unknown config key '" + path + "'");
          if (val.is_object()) sweep(val, path);
        }
      };
  sweep(cfg, "");

  json out = cfg;
  for (const auto& fs : schema) {
    // bc subtree is optional as a whole; skip its members when absent.
    if (fs.path.rfind("mode.bc.", 0) == 0 && !lookup(cfg, "mode.bc")) continue;
    const json* v = lookup(cfg, fs.path);
    if (!v) {
      if (fs.required)
        throw ConfigError("missing required field '" + fs.path + "'");
      if (fs.path == "mode.bc") continue;  // absent bc stays absent
      if (defaults)
        defaults->push_back(fs.path + " = " + fs.default_value.dump());
      // apply the default
      json* cur = &out;
      std::size_t pos = 0;
      for (;;) {
        const std::size_t dot = fs.path.find('.', pos);
        const std::string key =
            fs.path.substr(pos, dot == std::string::npos ? std::string::npos
                                                         : dot - pos);
        if (dot == std::string::npos) {
          (*cur)[key] = fs.default_value;
          break;
        }
        cur = &(*cur)[key];
        pos = dot + 1;
      }
      continue;
    }
    if (!type_matches(*v, fs.type))
      throw ConfigError("field '" + fs.path + "' has the wrong type");
  }

  // Semantic checks shared with the library invariants.
  if (const json* pj = lookup(out, "params")) {
    BlackHoleParams p{(*pj)["a"].get<double>(), (*pj)["M"].get<double>(),
                      pj->contains("nu") ? (*pj)["nu"].get<double>() : 1.0};
    if (!p.valid())
      throw ConfigError("params: need |a| < 1, M > 0, nu > 0");
  }
  if (const json* mj = lookup(out, "mode")) {
    const double nu = (*mj)["nu"].get<double>();
    if (nu < 1.0 && !mj->contains("bc"))
      throw ConfigError(
          "mode: 0 < nu < 1 requires mode.bc (ModeSpec invariant)");
    if (nu >= 1.0 && mj->contains("bc"))
      throw ConfigError("mode: nu >= 1 admits no boundary condition");
  }
  return out;
}

// ---- payload decoding ------------------------------------------------------

BlackHoleParams decode_params(const json& cfg, double nu_override = -1.0) {
  const json& pj = cfg.at("params");
  double nu = nu_override > 0.0
                  ? nu_override
                  : (pj.contains("nu") ? pj["nu"].get<double>() : 1.0);
  return BlackHoleParams{pj.at("a").get<double>(), pj.at("M").get<double>(),
                         nu};
}

BoundaryCondition decode_bc(const json& bj, double nu) {
  const std::string kind = bj.at("kind").get<std::string>();
  const std::complex<double> beta{
      bj.contains("beta_re") ? bj["beta_re"].get<double>() : 0.0,
      bj.contains("beta_im") ? bj["beta_im"].get<double>() : 0.0};
  if (kind == "dirichlet") return BoundaryCondition::dirichlet(nu);
  if (kind == "neumann") return BoundaryCondition::neumann(nu);
  if (kind == "robin") return BoundaryCondition::robin(beta, nu);
  throw ConfigError("bc.kind must be dirichlet|neumann|robin");
}

ModeSpec decode_mode(const json& cfg) {
  const json& mj = cfg.at("mode");
  ModeSpec mode;
  mode.m = mj.at("m").get<int>();
  mode.nu = mj.at("nu").get<double>();
  mode.k_threshold = mj.contains("k_threshold")
                         ? mj["k_threshold"].get<int>()
                         : 2;
  if (mj.contains("bc") && !mj["bc"].is_null())
    mode.bc = decode_bc(mj["bc"], mode.nu);
  return mode;
}

// ---- artifact plumbing -----------------------------------------------------

struct RunContext {
  std::filesystem::path out_dir;
  std::string hash;
  std::string started;
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& body) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir / name, std::ios::binary);
    os << body;
    outputs.push_back(name);
  }

  void write_json(const std::string& name, json j) {
    j["config_hash"] = hash;
    write(name, j.dump(2) + "\n");
  }

  void finish(const json& cfg) {
    json m;
    m["tool_version"] = kToolVersion;
    m["config_hash"] = hash;
    m["started"] = started;
    m["finished"] = utc_now();
    m["outputs"] = outputs;
    m["config"] = cfg;
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir / "manifest.json", std::ios::binary);
    os << m.dump(2) << "\n";
  }
};

// CSV artifacts prepend the config hash as a comment line so each file
// is traceable to its manifest.
std::string with_hash_header(const std::string& hash, const std::string& csv) {
  return "# config_hash=" + hash + "\n" + csv;
}

// ---- subcommand bodies -----------------------------------------------------

int run_horizons(const json& cfg, RunContext& ctx) {
  const auto p = decode_params(cfg);
  const auto hd = find_horizons(p);
  json j;
  j["region"] = region_tag_name(classify_region(p));
  if (hd) {
    std::printf("r_plus=%.17g kappa=%.17g\n", hd->r_plus, hd->kappa);
    j["r_plus"] = hd->r_plus;
    j["kappa"] = hd->kappa;
    j["omega"] = hd->omega;
    j["dDelta_r_plus"] = hd->dDelta_r_plus;
  } else {
    std::printf("no horizon (%s)\n",
                region_tag_name(classify_region(p)).c_str());
  }
  ctx.write_json("horizons.json", j);
  return kExitOk;
}

int run_region_scan(const json& cfg, RunContext& ctx) {
  const json& sj = cfg.at("scan");
  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
      v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0);
    return v;
  };
  const auto a_grid = linspace(sj.at("a_min").get<double>(),
                               sj.at("a_max").get<double>(),
                               sj.at("n_a").get<int>());
  const auto M_grid = linspace(sj.at("M_min").get<double>(),
                               sj.at("M_max").get<double>(),
                               sj.at("n_M").get<int>());
  const auto cells = region_scan(a_grid, M_grid);
  ctx.write("region_scan.csv",
            with_hash_header(ctx.hash, region_scan_csv(cells)));
  std::printf("region-scan: %zu cells\n", cells.size());
  return kExitOk;
}

int run_flow_audit(const json& cfg, RunContext& ctx, std::uint64_t seed) {
  const auto p = decode_params(cfg);
  const json& aj = cfg.at("audit");
  FlowConfig fc;
  fc.delta = aj.at("delta").get<double>();
  fc.eps_sink = aj.at("eps_sink").get<double>();
  fc.t_max = aj.at("t_max").get<double>();
  const auto rep = nontrapping_audit(p, aj.at("n_samples").get<std::size_t>(),
                                     fc, seed);
  ctx.write("flow_audit.json", nontrapping_report_json(rep));
  std::printf("flow-audit: %zu/%zu classified (fraction %.6f)\n",
              rep.n_classified, rep.n_samples, rep.fraction_classified);
  return rep.fraction_classified == 1.0 ? kExitOk : kExitAuditFail;
}

int run_source_sink(const json& cfg, RunContext& ctx, std::uint64_t seed) {
  const auto p = decode_params(cfg);
  const json& aj = cfg.at("audit");
  const auto rep =
      source_sink_audit(p, aj.at("n_samples").get<std::size_t>(),
                        aj.at("neighborhood").get<double>(), seed);
  ctx.write("source_sink.json", source_sink_report_json(rep));
  std::printf("source-sink-audit: %zu samples, worst margin %.3e, %s\n",
              rep.n_samples, rep.worst_margin,
              rep.passed() ? "passed" : "FAILED");
  return rep.passed() ? kExitOk : kExitAuditFail;
}

int run_lopatinskii(const json& cfg, RunContext& ctx, std::uint64_t seed) {
  const auto p = decode_params(cfg);
  const double nu = cfg.at("nu").get<double>();
  const auto bc = decode_bc(cfg.at("bc"), nu);
  const auto rep = lopatinskii_check(nu, bc, p, Sector{},
                                     cfg.at("n_samples").get<std::size_t>(),
                                     seed);
  ctx.write("lopatinskii.json", lopatinskii_report_json(rep));
  std::printf("lopatinskii: nu=%g bc=%s min margin %.3e, %s\n", nu,
              bc.name().c_str(), rep.min_margin,
              rep.passed ? "passed" : "FAILED");
  return rep.passed ? kExitOk : kExitAuditFail;
}

int run_qnf(const json& cfg, RunContext& ctx) {
  const auto mode = decode_mode(cfg);
  const auto p = decode_params(cfg, mode.nu);
  const json& gj = cfg.at("grid");
  const double delta = gj.at("delta").get<double>();
  ExtensionVariant variant{cfg.at("fplus_scale").get<double>()};
  const auto results = converged_qnfs(
      p, mode, gj.at("N_r").get<std::size_t>(),
      gj.at("N_theta").get<std::size_t>(), gj.at("N_r_fine").get<std::size_t>(),
      gj.at("N_theta_fine").get<std::size_t>(), delta, variant);
  const auto csv = qnf_table_csv(p, mode, delta, variant,
                                 gj.at("N_r_fine").get<std::size_t>(),
                                 gj.at("N_theta_fine").get<std::size_t>(),
                                 results);
  ctx.write("qnf.csv", with_hash_header(ctx.hash, csv));
  std::printf("qnf: %zu converged frequencies\n", results.size());
  for (const auto& r : results)
    std::printf("  lambda = %.12g %+.12gi  residual %.3e\n", r.lambda.real(),
                r.lambda.imag(), r.residual);
  return kExitOk;
}

int run_oracle_a0(const json& cfg, RunContext& ctx) {
  const auto p = decode_params(cfg);
  if (p.a != 0.0)
    throw ConfigError("oracle-a0 requires params.a = 0");
  const json& wj = cfg.at("window");
  const auto roots = oracle_scan_a0(
      p, cfg.at("ell").get<int>(), nullptr, wj.at("re_min").get<double>(),
      wj.at("re_max").get<double>(), wj.at("im_min").get<double>(),
      wj.at("im_max").get<double>(), wj.at("n_re").get<int>(),
      wj.at("n_im").get<int>(), cfg.at("series_order").get<int>());
  std::ostringstream os;
  os.precision(17);
  os << "ell,re_lambda,im_lambda,matching_residual,iterations\n";
  for (const auto& r : roots)
    os << cfg.at("ell").get<int>() << "," << r.lambda.real() << ","
       << r.lambda.imag() << "," << r.matching_residual << "," << r.iterations
       << "\n";
  ctx.write("oracle_a0.csv", with_hash_header(ctx.hash, os.str()));
  std::printf("oracle-a0: %zu roots\n", roots.size());
  for (const auto& r : roots)
    std::printf("  lambda = %.15g %+.15gi  |W| = %.3e\n", r.lambda.real(),
                r.lambda.imag(), r.matching_residual);
  return kExitOk;
}

int run_invariance(const json& cfg, RunContext& ctx) {
  const auto mode = decode_mode(cfg);
  const auto p = decode_params(cfg, mode.nu);
  const json& gj = cfg.at("grid");
  const auto out = invariance_test(
      p, mode, gj.at("N_r").get<std::size_t>(),
      gj.at("N_theta").get<std::size_t>(), gj.at("N_r_fine").get<std::size_t>(),
      gj.at("N_theta_fine").get<std::size_t>(), gj.at("delta").get<double>(),
      cfg.at("delta_moved").get<double>(),
      ExtensionVariant{cfg.at("fplus_scale_alt").get<double>()});
  const double tol = cfg.at("tol").get<double>();
  json j;
  j["n_matched"] = out.n_matched;
  j["max_displacement_delta"] = out.max_displacement_delta;
  j["max_displacement_fplus"] = out.max_displacement_fplus;
  j["tol"] = tol;
  const bool ok = out.n_matched > 0 && out.max_displacement_delta < tol &&
                  out.max_displacement_fplus < tol;
  j["passed"] = ok;
  ctx.write_json("invariance.json", j);
  std::printf(
      "invariance: %zu matched, displacement delta %.3e / fplus %.3e, %s\n",
      out.n_matched, out.max_displacement_delta, out.max_displacement_fplus,
      ok ? "passed" : "FAILED");
  return ok ? kExitOk : kExitAuditFail;
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kerr-AdS quasinormal-frequency toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed_flag = -1;
  int workers_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "artifact output directory");
    sub->add_option("--seed", seed_flag, "override config seed");
    sub->add_option("--workers", workers_flag, "OpenMP worker count");
  };

  for (const auto& t : kTasks) add_common(app.add_subcommand(t));
  add_common(app.add_subcommand("validate",
                                "schema-check a config without running it"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitConfigError : kExitOk;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    const json raw = load_config(config_path);
    std::vector<std::string> defaults;
    const json cfg = validate_config(raw, &defaults);

    if (sub == "validate") {
      std::printf("config ok: task %s\n",
                  cfg.at("task").get<std::string>().c_str());
      for (const auto& d : defaults)
        std::printf("default: %s\n", d.c_str());
      return kExitOk;
    }
    if (cfg.at("task").get<std::string>() != sub)
      throw ConfigError("config task '" + cfg.at("task").get<std::string>() +
                        "' does not match subcommand '" + sub + "'");

    const std::uint64_t seed =
        seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                       : cfg.at("seed").get<std::uint64_t>();
    int workers = workers_flag > 0 ? workers_flag
                                   : cfg.at("workers").get<int>();
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif

    RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.hash = config_hash(cfg);
    ctx.started = utc_now();

    int rc = kExitOk;
    if (sub == "horizons")
      rc = run_horizons(cfg, ctx);
    else if (sub == "region-scan")
      rc = run_region_scan(cfg, ctx);
    else if (sub == "flow-audit")
      rc = run_flow_audit(cfg, ctx, seed);
    else if (sub == "source-sink-audit")
      rc = run_source_sink(cfg, ctx, seed);
    else if (sub == "lopatinskii")
      rc = run_lopatinskii(cfg, ctx, seed);
    else if (sub == "qnf")
      rc = run_qnf(cfg, ctx);
    else if (sub == "oracle-a0")
      rc = run_oracle_a0(cfg, ctx);
    else if (sub == "invariance")
      rc = run_invariance(cfg, ctx);
    ctx.finish(cfg);
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAuditFail;
  }
}
