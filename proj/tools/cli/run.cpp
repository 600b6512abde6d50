#include "run.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "sio/io.hpp"

namespace sio::cli {

namespace {

enum class Kind { number, integer, text, numbers, spec, measure };

struct Binding {
  std::string key;  ///< dotted path into the config
  Kind kind = Kind::text;
  std::string value;
  CLI::Option* option = nullptr;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::vector<std::unique_ptr<Binding>> bindings;
  std::string config;
  std::string out;
  std::string csv;
  std::string out_nu;
  std::optional<std::uint64_t> seed;

  CLI::Option* bind(const std::string& flag, const std::string& key, Kind kind, const std::string& help) {
    auto b = std::make_unique<Binding>();
    b->key = key;
    b->kind = kind;
    b->option = app->add_option(flag, b->value, help);
    bindings.push_back(std::move(b));
    return bindings.back()->option;
  }
};

const std::set<std::string>& measure_kinds() {
  static const std::set<std::string> k = {"lebesgue_grid", "random_atoms", "interleaved_grids", "ball_uniform"};
  return k;
}

Json measure_value(const std::string& v) {
  const std::string head = v.substr(0, v.find(':'));
  if (!measure_kinds().count(head)) return v;
  Json j = parse_spec(v);
  j["kind"] = j["name"];
  j.erase("name");
  return j;
}

Json numbers_value(const std::string& v) {
  Json a = Json::array();
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const std::string item = v.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), d);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::schema, "expected a comma-separated number list, got '" + v + "'");
    }
    a.push_back(d);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return a;
}

Json convert(const Binding& b) {
  switch (b.kind) {
    case Kind::number:
    case Kind::integer: {
      const Json a = numbers_value(b.value);
      if (a.size() != 1) throw Error(ErrorCode::schema, "'" + b.key + "' takes one number");
      return a[0];
    }
    case Kind::numbers: return numbers_value(b.value);
    case Kind::spec: return parse_spec(b.value);
    case Kind::measure: return measure_value(b.value);
    case Kind::text: break;
  }
  return b.value;
}

void set_path(Json& cfg, const std::string& key, Json value) {
  Json* node = &cfg;
  std::size_t pos = 0;
  for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.', pos)) {
    Json& next = (*node)[key.substr(pos, dot - pos)];
    if (!next.is_object()) next = Json::object();
    node = &next;
    pos = dot + 1;
  }
  (*node)[key.substr(pos)] = std::move(value);
}

void emit_error(std::ostream& err, const std::string& code, const std::string& message, const Json& data, int status) {
  err << Json{{"error", {{"code", code}, {"message", message}, {"data", data}, {"exit_code", status}}}}.dump() << '\n';
}

void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::io, "cannot write " + path);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << '\n';
  }
}

void setup(Command& c) {
  using K = Kind;
  const std::string& n = c.name;
  const bool has_kernel = n == "restricted-norm" || n == "opnorm" || n == "factor2" || n == "truncate-compare" ||
                          n == "necessity";
  const bool has_pair = has_kernel || n == "muckenhoupt";
  if (has_kernel) c.bind("--kernel", "kernel", K::spec, "hilbert | cauchy | ahlfors_beurling | riesz:alpha=A,N=N");
  if (has_pair) {
    c.bind("--mu", "mu", K::measure, "measure file or generator spec, e.g. lebesgue_grid:N=1,lo=0,hi=1,h=0.01");
    c.bind("--nu", "nu", K::measure, "second measure");
  }
  if (has_pair && n != "muckenhoupt") {
    c.bind("--svd", "svd", K::text, "automatic | power | dense");
    c.bind("--seeds", "seeds", K::integer, "restarts of the p-norm power method");
  }
  if (n == "restricted-norm" || n == "opnorm" || n == "factor2" || n == "muckenhoupt" || n == "necessity") {
    c.bind("--p", "p", K::number, "exponent in (1, inf)");
  }
  if (n == "schur-bound") {
    c.bind("mollifier", "mollifier", K::spec, "gaussian | complex_shift | annulus:delta=D | unit | power:base=B,k=K");
    c.bind("--method", "method", K::text, "wiener | direct | sobolev");
    c.bind("--k", "k", K::integer, "Sobolev exponent");
    c.bind("--grid-half-width", "grid.half_width", K::number, "DFT grid half width L");
    c.bind("--grid-points", "grid.points", K::integer, "DFT grid points per axis");
  } else if (n == "moment-order") {
    c.bind("--density", "density", K::text, "gaussian | one_sided_exponential");
    c.bind("--N", "N", K::integer, "dimension");
    c.bind("--k", "k", K::integer, "order cap");
    c.bind("--step", "h", K::number, "sampling step h");
    c.bind("--lo", "lo", K::number, "grid lower end");
    c.bind("--hi", "hi", K::number, "grid upper end");
  } else if (n == "restricted-norm") {
    c.bind("--method", "method", K::text, "auto | exact | heuristic");
    c.bind("--trials", "trials", K::integer, "heuristic cuts");
    c.bind("--cap", "cap", K::integer, "point cap of the exact enumeration");
  } else if (n == "split") {
    c.bind("--measure,--measure-file", "measure", K::measure, "measure to split");
    c.bind("--nu", "nu", K::measure, "second measure; enables the atom-aware split of measure and nu");
    c.bind("--level", "level", K::integer, "level n");
    c.bind("--tau", "tau", K::number, "shrink factor in (0, 1)");
  } else if (n == "split-verify" || n == "verify") {
    c.bind("report", "report", K::text, "report file")->required();
  } else if (n == "truncate-compare") {
    c.bind("--eps,--eps-grid", "eps", K::numbers, "comma-separated eps values");
    c.bind("--delta", "delta", K::number, "annulus width");
    c.bind("--kappa", "kappa", K::number, "sectoriality constant");
  } else if (n == "muckenhoupt") {
    c.bind("--alpha", "alpha", K::number, "alpha > 0");
    c.bind("--radii", "radii", K::numbers, "comma-separated radii (default: geometric scan)");
  } else if (n == "necessity") {
    c.bind("--eps,--eps-grid", "eps", K::numbers, "comma-separated eps values");
    c.bind("--alpha", "alpha", K::number, "alpha >= d");
    c.bind("--d", "d", K::number, "homogeneity order of B");
    c.bind("--pair-samples", "pair_samples", K::integer, "sampled pairs per ball");
    c.bind("--trials", "trials", K::integer, "heuristic cuts");
  } else if (n == "generate-measure") {
    c.bind("measure", "measure", K::measure, "generator spec, e.g. random_atoms:n=10,N=2");
    c.app->add_option("--out-nu", c.out_nu, "second file for interleaved_grids");
  }
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::parameter:
    case ErrorCode::input:
    case ErrorCode::schema:
    case ErrorCode::io: return 2;
    case ErrorCode::non_convergence:
    case ErrorCode::unreliable_estimate: return 3;
    default: return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments with singular integral operators on measures", "sio"};
  app.require_subcommand(1, 1);
  static const std::map<std::string, std::string> about = {
      {"schur-bound", "certified Schur multiplier bound of a mollifier"},
      {"moment-order", "vanishing order of 1 - rho^ from the moments of rho"},
      {"restricted-norm", "restricted norm over separated supports"},
      {"opnorm", "L^p(mu) -> L^p(nu) operator norm"},
      {"factor2", "operator norm against twice the restricted norm"},
      {"split", "separated partition of a measure"},
      {"split-verify", "re-check a partition report"},
      {"truncate-compare", "hard, smooth and psi truncations per eps"},
      {"muckenhoupt", "two-weight A_p^alpha constant"},
      {"necessity", "lower bound chain on balls B(t0, eps)"},
      {"generate-measure", "write a generated measure"},
      {"verify", "re-evaluate the witnesses of a report"},
  };
  std::vector<std::unique_ptr<Command>> commands;
  for (const auto& name : command_names()) {
    auto c = std::make_unique<Command>();
    c->name = name;
    c->app = app.add_subcommand(name, about.at(name));
    c->app->add_option("--config", c->config, "JSON config; flags override its keys");
    c->app->add_option("--out", c->out, "report path (default: stdout)");
    c->app->add_option("--csv", c->csv, "CSV table path");
    c->app->add_option("--seed", c->seed, "64-bit seed");
    setup(*c);
    commands.push_back(std::move(c));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    emit_error(err, "usage", e.what(), Json::object(), 2);
    return 2;
  }

  Command* cmd = nullptr;
  for (auto& c : commands) {
    if (c->app->parsed()) cmd = c.get();
  }
  try {
    Json cfg = Json::object();
    if (!cmd->config.empty()) {
      cfg = read_json_file(cmd->config);
      if (!cfg.is_object()) throw Error(ErrorCode::schema, "config must be a JSON object");
      cfg.erase("command");
    }
    for (const auto& b : cmd->bindings) {
      if (b->option->count() > 0) set_path(cfg, b->key, convert(*b));
    }
    Context ctx;
    if (cmd->seed) {
      ctx.seed = *cmd->seed;
    } else if (cfg.contains("seed")) {
      if (!cfg["seed"].is_number_unsigned()) throw Error(ErrorCode::schema, "'seed' must be a nonnegative integer");
      ctx.seed = cfg["seed"].get<std::uint64_t>();
    }
    cfg["seed"] = ctx.seed;
    if (!cmd->out_nu.empty()) ctx.out_nu = cmd->out_nu;

    Json report = find_handler(cmd->name)(cfg, ctx);
    report["command"] = cmd->name;
    report["config"] = cfg;
    report["seed"] = ctx.seed;
    if (cmd->out.empty()) {
      out << report.dump(2) << '\n';
    } else {
      write_json_file(cmd->out, report);
    }
    if (!cmd->csv.empty()) write_csv(cmd->csv, ctx.csv);
    if (ctx.failed) {
      emit_error(err, "check_failed", cmd->name + ": a checked property failed", Json::object(), 1);
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    Json data = Json::object();
    for (const auto& [k, v] : e.data()) data[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
    const int status = exit_code(e.code());
    emit_error(err, std::string(to_string(e.code())), e.what(), data, status);
    return status;
  } catch (const nlohmann::json::exception& e) {
    emit_error(err, "schema", e.what(), Json::object(), 2);
    return 2;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), Json::object(), 1);
    return 1;
  }
}

}  // namespace sio::cli
