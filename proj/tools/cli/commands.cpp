#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "config.hpp"
#include "report.hpp"
#include "sio/error.hpp"
#include "sio/io.hpp"

namespace sio::cli {

namespace {

// Config access that records defaults ---------------------------------------

double num(Json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = fallback;
  return get_double(cfg, key, fallback);
}

int integer(Json& cfg, const std::string& key, int fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = fallback;
  return get_int(cfg, key, fallback);
}

std::string text(Json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = fallback;
  return get_string(cfg, key, fallback);
}

std::vector<double> nums(Json& cfg, const std::string& key, std::vector<double> fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = fallback;
  return get_doubles(cfg, key, fallback);
}

const Json& require(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) throw Error(ErrorCode::schema, "missing '" + key + "'");
  return cfg[key];
}

KernelSpec kernel(Json& cfg, const std::string& fallback = "hilbert") {
  if (!cfg.contains("kernel") || cfg["kernel"].is_null()) cfg["kernel"] = fallback;
  cfg["kernel"] = normalize_spec(cfg["kernel"]);
  return make_kernel(cfg["kernel"]);
}

DiscreteMeasure measure(const Json& cfg, const std::string& key, const Context& ctx) {
  return make_measure(require(cfg, key), ctx.seed);
}

NormOptions norm_options(Json& cfg, const Context& ctx) {
  NormOptions o;
  o.seed = ctx.seed;
  o.seeds = integer(cfg, "seeds", o.seeds);
  const std::string svd = text(cfg, "svd", "automatic");
  if (svd == "automatic") {
    o.method = SvdMethod::automatic;
  } else if (svd == "power") {
    o.method = SvdMethod::power;
  } else if (svd == "dense") {
    o.method = SvdMethod::dense;
  } else {
    throw Error(ErrorCode::schema, "svd must be automatic, power or dense");
  }
  return o;
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void check_dims(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dimension() != k.dimension() || nu.dimension() != k.dimension()) {
    throw Error(ErrorCode::input, "measure dimension does not match the kernel",
                {{"kernel", double(k.dimension())}, {"mu", double(mu.dimension())}, {"nu", double(nu.dimension())}});
  }
}

NormEstimate estimate_from_json(const Json& j) {
  NormEstimate e;
  try {
    e.value = j.at("value").is_null() ? std::nan("") : j.at("value").get<double>();
    e.p = j.at("p").get<double>();
    e.f = j.at("witness").at("f").get<std::vector<double>>();
    e.g = j.at("witness").at("g").get<std::vector<double>>();
    e.support_f = j.at("witness").at("support_f").get<std::vector<std::size_t>>();
    e.support_g = j.at("witness").at("support_g").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::schema, std::string("invalid norm estimate: ") + ex.what());
  }
  return e;
}

// Checks ------------------------------------------------------------------

struct Checks {
  Json list = Json::array();
  bool passed = true;

  void add(const std::string& name, bool ok, double value = std::nan(""), double bound = std::nan("")) {
    list.push_back({{"name", name}, {"passed", ok}, {"value", number(value)}, {"bound", number(bound)}});
    passed = passed && ok;
  }
};

bool close(double a, double b, double rel, double abs = 1e-12) {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

void check_witness(Checks& c, const std::string& name, const Json& est, const KernelMatrix& km,
                   const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const NormEstimate e = estimate_from_json(est);
  const double v = witness_value(km, mu, nu, e);
  c.add(name + " witness reproduces value", close(v, e.value, 1e-9), v, e.value);
  if (est.at("kind") != "restricted_exact" && est.at("kind") != "restricted_heuristic") return;
  bool separated = true;
  for (std::size_t i : e.support_f) {
    for (std::size_t j : e.support_g) {
      if (distance(mu.point(i), nu.point(j)) == 0.0) separated = false;
    }
  }
  c.add(name + " witness supports are disjoint", separated);
}

Checks split_checks(const Json& report) {
  Checks c;
  const auto part = partition_from_json(report.at("partition"));
  const auto sigma = measure_from_json(report.at("sigma"));
  const auto fresh = balance_report(sigma, part, part.level);
  bool same = fresh.size() == part.balance.size();
  for (std::size_t i = 0; same && i < fresh.size(); ++i) {
    same = fresh[i].corner == part.balance[i].corner && close(fresh[i].mass, part.balance[i].mass, 1e-12) &&
           close(fresh[i].mass1, part.balance[i].mass1, 1e-12) && close(fresh[i].mass2, part.balance[i].mass2, 1e-12);
  }
  c.add("balance table reproduces", same);
  double worst = 0.0;
  for (const auto& b : fresh) worst = std::max(worst, b.deviation);
  const double bound = std::ldexp(1.0, -part.level);
  c.add("balance below 2^-n", worst < bound, worst, bound);
  c.add("separation positive", part.separation > 0.0, part.separation, 0.0);
  const double sep = exhaustive_separation(part);
  c.add("exhaustive separation", sep >= part.separation * (1.0 - 1e-12), sep, part.separation);
  bool atoms = true;
  for (const auto& a : part.atoms1) atoms = atoms && part.side(a) == 1;
  for (const auto& a : part.atoms2) atoms = atoms && part.side(a) == 2;
  c.add("adjoined atoms on their side", atoms);
  return c;
}

// Subcommands ---------------------------------------------------------------

Json cmd_schur_bound(Json& cfg, Context&) {
  if (!cfg.contains("mollifier") || cfg["mollifier"].is_null()) cfg["mollifier"] = "gaussian";
  cfg["mollifier"] = normalize_spec(cfg["mollifier"]);
  const Mollifier m = make_mollifier(cfg["mollifier"]);
  std::optional<Grid> grid;
  if (cfg.contains("grid") && !cfg["grid"].is_null()) {
    grid = Grid{get_double(cfg["grid"], "half_width", 0.0), static_cast<std::size_t>(get_int(cfg["grid"], "points", 0))};
  } else {
    cfg["grid"] = nullptr;
  }
  const std::string method = text(cfg, "method", "wiener");
  SchurBound b;
  if (method == "wiener") {
    b = schur_bound(m, grid);
  } else if (method == "direct") {
    b = schur_bound_direct(m, grid);
  } else if (method == "sobolev") {
    b = sobolev_bound(m, integer(cfg, "k", static_cast<int>(m.dimension) / 2 + 1), grid);
  } else {
    throw Error(ErrorCode::schema, "method must be wiener, direct or sobolev");
  }
  Json r = to_json(b);
  r["mollifier"] = m.name;
  return r;
}

Json cmd_moment_order(Json& cfg, Context& ctx) {
  const std::string density = text(cfg, "density", "gaussian");
  const int n = integer(cfg, "N", 1);
  if (n < 1 || n > 3) throw Error(ErrorCode::schema, "N must be 1, 2 or 3");
  std::function<double(std::span<const double>)> f;
  double lo = 0.0;
  double hi = 0.0;
  double h = 0.0;
  if (density == "gaussian") {
    const double c = std::pow(2.0 * std::numbers::pi, -n / 2.0);
    f = [c](std::span<const double> x) {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      return c * std::exp(-0.5 * r2);
    };
    lo = n == 1 ? -12.0 : -10.0;
    hi = -lo;
    h = n == 1 ? 1e-3 : (n == 2 ? 0.02 : 0.1);
  } else if (density == "one_sided_exponential") {
    if (n != 1) throw Error(ErrorCode::schema, "one_sided_exponential is one-dimensional");
    f = [](std::span<const double> x) { return x[0] >= 0.0 ? std::exp(-x[0]) : 0.0; };
    lo = 0.0;
    hi = 40.0;
    h = 1e-3;
  } else {
    throw Error(ErrorCode::schema, "density must be gaussian or one_sided_exponential");
  }
  lo = num(cfg, "lo", lo);
  hi = num(cfg, "hi", hi);
  h = num(cfg, "h", h);
  const int k = integer(cfg, "k", 4);
  const auto rep = moment_order(sample_grid(static_cast<std::size_t>(n), lo, hi, h, f), k,
                                num(cfg, "mass_tolerance", 1e-4), num(cfg, "moment_tolerance", 1e-6));
  ctx.csv.push_back({"s", "abs_m"});
  for (std::size_t i = 0; i < rep.fit_s.size(); ++i) ctx.csv.push_back({fmt(rep.fit_s[i]), fmt(rep.fit_abs_m[i])});
  return to_json(rep);
}

NormEstimate restricted_estimate(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                 const std::string& method, int trials, std::size_t cap, const NormOptions& o,
                                 std::mt19937_64& rng, std::string& resolved) {
  resolved = method;
  if (method == "auto") {
    if (common_support(mu, nu).empty()) {
      resolved = "operator";
    } else {
      resolved = mu.size() + nu.size() <= cap ? "exact" : "heuristic";
    }
  }
  const KernelMatrix km = materialize_masked(k, mu, nu);
  if (resolved == "operator") {
    if (!common_support(mu, nu).empty()) throw Error(ErrorCode::precondition, "supports share points");
    return p == 2.0 ? operator_norm_p2(km, mu, nu, o) : operator_norm_p(km, mu, nu, p, o);
  }
  if (resolved == "exact") return restricted_norm_exact(km, mu, nu, p, cap, o);
  if (resolved == "heuristic") return restricted_norm_heuristic(km, mu, nu, p, trials, rng, o);
  throw Error(ErrorCode::schema, "method must be auto, exact or heuristic");
}

Json cmd_restricted_norm(Json& cfg, Context& ctx) {
  const KernelSpec k = kernel(cfg);
  const auto mu = measure(cfg, "mu", ctx);
  const auto nu = measure(cfg, "nu", ctx);
  check_dims(k, mu, nu);
  const double p = num(cfg, "p", 2.0);
  const std::string method = text(cfg, "method", "auto");
  const int trials = integer(cfg, "trials", 64);
  const int cap = integer(cfg, "cap", static_cast<int>(kRestrictedCap));
  const NormOptions o = norm_options(cfg, ctx);
  std::mt19937_64 rng(ctx.seed);
  std::string resolved;
  const auto e = restricted_estimate(k, mu, nu, p, method, trials, static_cast<std::size_t>(std::max(cap, 0)), o, rng,
                                     resolved);
  Json r = to_json(e);
  r["params"] = {{"p", p}, {"method", resolved}, {"shared_points", common_support(mu, nu).size()}};
  return r;
}

Json cmd_opnorm(Json& cfg, Context& ctx) {
  const KernelSpec k = kernel(cfg);
  const auto mu = measure(cfg, "mu", ctx);
  const auto nu = measure(cfg, "nu", ctx);
  check_dims(k, mu, nu);
  const double p = num(cfg, "p", 2.0);
  const NormOptions o = norm_options(cfg, ctx);
  const KernelMatrix km = materialize(k, mu, nu);
  const auto e = p == 2.0 ? operator_norm_p2(km, mu, nu, o) : operator_norm_p(km, mu, nu, p, o);
  Json r = to_json(e);
  r["params"] = {{"p", p}};
  return r;
}

Json cmd_factor2(Json& cfg, Context& ctx) {
  const KernelSpec k = kernel(cfg);
  const auto mu = measure(cfg, "mu", ctx);
  const auto nu = measure(cfg, "nu", ctx);
  check_dims(k, mu, nu);
  const double p = num(cfg, "p", 2.0);
  const NormOptions o = norm_options(cfg, ctx);
  std::mt19937_64 rng(ctx.seed);
  const auto rep = factor2_check(k, mu, nu, p, rng, o);
  ctx.failed = !rep.holds;
  Json r = to_json(rep);
  r["params"] = {{"p", p}};
  return r;
}

Json cmd_split(Json& cfg, Context& ctx) {
  const auto mu = measure(cfg, "measure", ctx);
  const int level = integer(cfg, "level", 3);
  const double tau = num(cfg, "tau", kDefaultTau);
  SeparatedPartition part;
  DiscreteMeasure sigma = mu;
  if (cfg.contains("nu") && !cfg["nu"].is_null()) {
    const auto nu = measure(cfg, "nu", ctx);
    part = atom_aware_partition(mu, nu, level, tau);
    sigma = sum(decompose(mu).continuous_part, decompose(nu).continuous_part);
  } else {
    cfg["nu"] = nullptr;
    part = build_partition(mu, level, tau);
  }
  Json cascade = Json::array();
  for (const auto& c : balance_cascade(sigma, part)) {
    cascade.push_back({{"cube_level", c.cube_level}, {"max_deviation", c.max_deviation}});
  }
  ctx.csv.push_back({"corner", "mass", "mass1", "mass2", "deviation"});
  for (const auto& b : part.balance) {
    std::string corner;
    for (std::size_t a = 0; a < b.corner.size(); ++a) corner += (a ? " " : "") + fmt(b.corner[a]);
    ctx.csv.push_back({corner, fmt(b.mass), fmt(b.mass1), fmt(b.mass2), fmt(b.deviation)});
  }
  return {{"partition", to_json(part)},
          {"sigma", measure_to_json(sigma)},
          {"cascade", cascade},
          {"exhaustive_separation", exhaustive_separation(part)}};
}

Json cmd_split_verify(Json& cfg, Context& ctx) {
  const std::string path = get_string(cfg, "report", "");
  if (path.empty()) throw Error(ErrorCode::schema, "missing 'report'");
  const Json report = read_json_file(path);
  const Checks c = split_checks(report);
  ctx.failed = !c.passed;
  return {{"checks", c.list}, {"passed", c.passed}};
}

Json cmd_truncate_compare(Json& cfg, Context& ctx) {
  const KernelSpec k = kernel(cfg, "cauchy");
  const auto mu = measure(cfg, "mu", ctx);
  const auto nu = measure(cfg, "nu", ctx);
  check_dims(k, mu, nu);
  const auto eps = nums(cfg, "eps", {0.1});
  TruncationOptions o;
  o.delta = num(cfg, "delta", o.delta);
  o.kappa = num(cfg, "kappa", o.kappa);
  o.norm = norm_options(cfg, ctx);
  const auto study = compare_truncations(k, mu, nu, eps, o);
  ctx.csv.push_back({"eps", "norm_truncated", "norm_smooth", "norm_psi_part", "norm_chi", "norm_sectorial",
                     "split_identity_error", "chain_bound"});
  for (const auto& r : study.rows) {
    ctx.csv.push_back({fmt(r.eps), fmt(r.norm_truncated), fmt(r.norm_smooth), fmt(r.norm_psi_part), fmt(r.norm_chi),
                       fmt(r.norm_sectorial), fmt(r.split_identity_error), r.chain_bound ? fmt(*r.chain_bound) : ""});
    ctx.failed = ctx.failed || !r.triangle_holds || !r.psi_dominated || !r.chain_holds;
  }
  return to_json(study);
}

std::optional<BallScan> scan_from(Json& cfg) {
  const bool has_centers = cfg.contains("centers") && cfg["centers"].is_array();
  const bool has_radii = cfg.contains("radii") && cfg["radii"].is_array();
  if (!cfg.contains("centers")) cfg["centers"] = "default";
  if (!cfg.contains("radii")) cfg["radii"] = "default";
  if (!has_centers && !has_radii) return std::nullopt;
  BallScan s;
  if (has_centers) {
    try {
      s.centers = cfg["centers"].get<std::vector<Point>>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::schema, "'centers' must be a list of points");
    }
  }
  if (has_radii) s.radii = get_doubles(cfg, "radii", {});
  return s;
}

Json cmd_muckenhoupt(Json& cfg, Context& ctx) {
  const auto mu = measure(cfg, "mu", ctx);
  const auto nu = measure(cfg, "nu", ctx);
  const double p = num(cfg, "p", 2.0);
  const double alpha = num(cfg, "alpha", 1.0);
  auto scan = scan_from(cfg);
  if (scan && (scan->centers.empty() || scan->radii.empty())) {
    const auto d = default_scan(mu, nu);
    if (scan->centers.empty() && cfg["centers"] == "default") scan->centers = d.centers;
    if (scan->radii.empty() && cfg["radii"] == "default") scan->radii = d.radii;
  }
  return to_json(ap_alpha_constant(mu, nu, p, alpha, scan));
}

Json cmd_necessity(Json& cfg, Context& ctx) {
  const KernelSpec k = kernel(cfg, "cauchy");
  const auto mu = measure(cfg, "mu", ctx);
  const auto nu = measure(cfg, "nu", ctx);
  check_dims(k, mu, nu);
  NecessityOptions o;
  o.p = num(cfg, "p", o.p);
  o.alpha = num(cfg, "alpha", o.alpha);
  o.d = num(cfg, "d", o.d);
  o.eps_list = nums(cfg, "eps", {0.1});
  if (cfg.contains("centers") && cfg["centers"].is_array()) {
    try {
      o.centers = cfg["centers"].get<std::vector<Point>>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::schema, "'centers' must be a list of points");
    }
  } else {
    cfg["centers"] = "witness";
  }
  o.pair_samples = static_cast<std::size_t>(std::max(integer(cfg, "pair_samples", 1000), 0));
  o.heuristic_trials = integer(cfg, "trials", o.heuristic_trials);
  o.seed = ctx.seed;
  o.norm = norm_options(cfg, ctx);
  const auto rep = necessity_experiment(k, mu, nu, o);
  ctx.csv.push_back({"eps", "mu_mass", "nu_mass", "ap_value", "form", "lower", "upper", "pointwise_violations"});
  for (const auto& b : rep.balls) {
    ctx.csv.push_back({fmt(b.eps), fmt(b.mu_mass), fmt(b.nu_mass), fmt(b.ap_value), fmt(b.form), fmt(b.lower),
                       fmt(b.upper), std::to_string(b.pointwise_violations)});
    ctx.failed = ctx.failed || !b.chain_holds || b.pointwise_violations > 0;
  }
  return to_json(rep);
}

Json cmd_generate_measure(Json& cfg, Context& ctx) {
  Json spec = require(cfg, "measure");
  if (!spec.is_object()) throw Error(ErrorCode::schema, "'measure' must be a generator object");
  const std::string kind = get_string(spec, "kind", "");
  if (kind == "interleaved_grids") {
    if (!ctx.out_nu) throw Error(ErrorCode::schema, "interleaved_grids writes two files; pass --out-nu");
    Json a = spec;
    a["part"] = "centers";
    Json b = spec;
    b["part"] = "corners";
    const auto mu = make_measure(a, ctx.seed);
    const auto nu = make_measure(b, ctx.seed);
    Json second = measure_to_json(nu);
    second["command"] = "generate-measure";
    second["config"] = cfg;
    second["config"]["measure"] = b;
    second["seed"] = ctx.seed;
    write_json_file(*ctx.out_nu, second);
    cfg["measure"] = a;
    return measure_to_json(mu);
  }
  return measure_to_json(make_measure(spec, ctx.seed));
}

Json cmd_verify(Json& cfg, Context& ctx);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"schur-bound", cmd_schur_bound},   {"moment-order", cmd_moment_order},
      {"restricted-norm", cmd_restricted_norm}, {"opnorm", cmd_opnorm},
      {"factor2", cmd_factor2},           {"split", cmd_split},
      {"split-verify", cmd_split_verify}, {"truncate-compare", cmd_truncate_compare},
      {"muckenhoupt", cmd_muckenhoupt},   {"necessity", cmd_necessity},
      {"generate-measure", cmd_generate_measure}, {"verify", cmd_verify},
  };
  return h;
}

Json cmd_verify(Json& cfg, Context& ctx) {
  const std::string path = get_string(cfg, "report", "");
  if (path.empty()) throw Error(ErrorCode::schema, "missing 'report'");
  const Json report = read_json_file(path);
  const std::string command = get_string(report, "command", "");
  Json rcfg = report.contains("config") ? report["config"] : Json::object();
  Context rctx;
  rctx.seed = report.contains("seed") ? report["seed"].get<std::uint64_t>() : 1;
  Checks c;

  auto tol_le = [](double a, double b) { return a <= b + 1e-12 + 1e-9 * std::abs(b); };

  if (command == "schur-bound" || command == "moment-order" || command == "generate-measure") {
    // deterministic computations: re-evaluate and compare
    if (command == "generate-measure") {
      const auto stored = measure_from_json(report);
      const auto fresh = make_measure(rcfg.at("measure"), rctx.seed);
      c.add("measure reproduces", measure_to_json(stored) == measure_to_json(fresh));
      c.add("weights positive", stored.size() == 0 || stored.total_mass() > 0.0, stored.total_mass());
    } else {
      Json again = rcfg;
      const Json fresh = handlers().at(command)(again, rctx);
      if (command == "schur-bound") {
        const double b = fresh.at("bound").get<double>();
        const double s = report.at("bound").get<double>();
        c.add("bound reproduces", close(b, s, 1e-12), b, s);
        c.add("bound at least 1", s >= 1.0 - 1e-12, s, 1.0);
        if (!report.at("power").is_null()) {
          const double base = report.at("base_bound").get<double>();
          const double k = report.at("power").get<double>();
          c.add("power bound is base^k", close(s, std::pow(base, k), 1e-12), s, std::pow(base, k));
        }
      } else {
        c.add("order reproduces", fresh.at("order") == report.at("order"), fresh.at("order").get<double>(),
              report.at("order").get<double>());
        c.add("slope reproduces", close(fresh.at("fitted_slope").get<double>(), report.at("fitted_slope").get<double>(), 1e-12));
      }
    }
  } else if (command == "restricted-norm" || command == "opnorm" || command == "factor2") {
    const KernelSpec k = make_kernel(rcfg.at("kernel"));
    const auto mu = make_measure(rcfg.at("mu"), rctx.seed);
    const auto nu = make_measure(rcfg.at("nu"), rctx.seed);
    const KernelMatrix km = command == "opnorm" ? materialize(k, mu, nu) : materialize_masked(k, mu, nu);
    if (command == "factor2") {
      check_witness(c, "restricted", report.at("restricted"), km, mu, nu);
      check_witness(c, "operator", report.at("operator"), km, mu, nu);
      const double op = report.at("operator").at("value").get<double>();
      const double rs = report.at("restricted").at("value").get<double>();
      c.add("operator <= 2 restricted", tol_le(op, 2.0 * rs), op, 2.0 * rs);
      c.add("restricted <= operator", tol_le(rs, op), rs, op);
    } else {
      check_witness(c, "norm", report, km, mu, nu);
    }
  } else if (command == "split") {
    c = split_checks(report);
  } else if (command == "truncate-compare") {
    for (const auto& r : report.at("rows")) {
      const std::string e = "eps " + fmt(r.at("eps").get<double>()) + ": ";
      const double t = r.at("norm_truncated").get<double>();
      const double s = r.at("norm_smooth").get<double>();
      const double psi = r.at("norm_psi_part").get<double>();
      c.add(e + "truncated <= smooth + psi", tol_le(t, s + psi), t, s + psi);
      c.add(e + "split identity", r.at("split_identity_error").get<double>() <= 1e-12,
            r.at("split_identity_error").get<double>(), 1e-12);
      c.add(e + "psi dominated by chi", r.at("psi_dominated").get<bool>());
      if (!r.at("chain_bound").is_null()) {
        c.add(e + "truncated <= chain bound", tol_le(t, r.at("chain_bound").get<double>()), t,
              r.at("chain_bound").get<double>());
      }
    }
  } else if (command == "muckenhoupt" || command == "necessity") {
    const auto mu = make_measure(rcfg.at("mu"), rctx.seed);
    const auto nu = make_measure(rcfg.at("nu"), rctx.seed);
    const Json& ap = command == "muckenhoupt" ? report : report.at("ap");
    const double constant = ap.at("constant").get<double>();
    const double v = ap_ball_value(mu, nu, ap.at("p").get<double>(), ap.at("alpha").get<double>(),
                                   ap.at("witness_ball").at("center").get<Point>(),
                                   ap.at("witness_ball").at("radius").get<double>());
    c.add("witness ball reproduces constant", close(v, constant, 1e-12), v, constant);
    if (command == "necessity") {
      for (const auto& b : report.at("balls")) {
        const std::string e = "eps " + fmt(b.at("eps").get<double>()) + ": ";
        const double lower = b.at("lower").get<double>();
        const double form = b.at("form").get<double>();
        const double upper = b.at("upper").get<double>();
        c.add(e + "lower <= form", tol_le(lower, form), lower, form);
        c.add(e + "form <= upper", tol_le(form, upper), form, upper);
        c.add(e + "pointwise bound", b.at("pointwise_violations").get<std::size_t>() == 0,
              double(b.at("pointwise_violations").get<std::size_t>()), 0.0);
      }
    }
  } else {
    throw Error(ErrorCode::schema, "cannot verify a report of command '" + command + "'");
  }
  ctx.failed = !c.passed;
  return {{"target", command}, {"checks", c.list}, {"passed", c.passed}};
}

}  // namespace

Handler find_handler(const std::string& command) {
  const auto it = handlers().find(command);
  return it == handlers().end() ? nullptr : it->second;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : handlers()) n.push_back(k);
    return n;
  }();
  return names;
}

}  // namespace sio::cli
