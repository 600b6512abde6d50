#include "config.hpp"

#include <charconv>
#include <random>

#include "sio/error.hpp"
#include "sio/generators.hpp"
#include "sio/io.hpp"

namespace sio::cli {

namespace {

Json parse_value(const std::string& v) {
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec == std::errc() && ptr == v.data() + v.size()) return d;
  return v;
}

std::size_t get_dim(const Json& spec, std::size_t fallback) {
  const int n = get_int(spec, "N", static_cast<int>(fallback));
  if (n < 1) throw Error(ErrorCode::schema, "N must be a positive integer");
  return static_cast<std::size_t>(n);
}

}  // namespace

Json parse_spec(const std::string& text) {
  Json j = Json::object();
  const auto colon = text.find(':');
  j["name"] = text.substr(0, colon);
  if (colon == std::string::npos) return j;
  std::string rest = text.substr(colon + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::schema, "expected key=value in spec '" + text + "'");
      j[item.substr(0, eq)] = parse_value(item.substr(eq + 1));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return j;
}

Json normalize_spec(const Json& j) {
  if (j.is_string()) return parse_spec(j.get<std::string>());
  if (j.is_object() && j.contains("name") && j["name"].is_string()) return j;
  throw Error(ErrorCode::schema, "spec must be a string or an object with a name");
}

KernelSpec make_kernel(const Json& raw) {
  const Json spec = normalize_spec(raw);
  const std::string name = spec["name"].get<std::string>();
  if (name == "hilbert") return make_hilbert();
  if (name == "cauchy") return make_cauchy();
  if (name == "ahlfors_beurling") return make_ahlfors_beurling();
  if (name == "riesz") return make_riesz_generalized(get_double(spec, "alpha", 1.0), get_dim(spec, 2));
  throw Error(ErrorCode::schema, "unknown kernel '" + name + "'");
}

Mollifier make_mollifier(const Json& raw) {
  const Json spec = normalize_spec(raw);
  const std::string name = spec["name"].get<std::string>();
  if (name == "gaussian") return gaussian_mollifier(get_dim(spec, 1));
  if (name == "complex_shift") return complex_shift_mollifier();
  if (name == "annulus") return smooth_annulus_mollifier(get_double(spec, "delta", 0.1), get_dim(spec, 1));
  if (name == "unit") return unit_mollifier(get_dim(spec, 1));
  if (name == "power") {
    Json base = spec;
    base["name"] = get_string(spec, "base", "gaussian");
    base.erase("base");
    base.erase("k");
    if (base["name"] == "power") throw Error(ErrorCode::schema, "nested power mollifiers are not supported");
    return multiplier_power(make_mollifier(base), get_int(spec, "k", 2));
  }
  throw Error(ErrorCode::schema, "unknown mollifier '" + name + "'");
}

DiscreteMeasure make_measure(const Json& spec, std::uint64_t seed) {
  if (spec.is_string()) return read_measure_file(spec.get<std::string>());
  if (!spec.is_object()) throw Error(ErrorCode::schema, "measure must be a file path or a generator object");
  if (spec.contains("points")) return measure_from_json(spec);
  const std::string kind = get_string(spec, "kind", "");
  const std::size_t n = get_dim(spec, 1);
  if (kind == "lebesgue_grid") {
    return lebesgue_grid(n, get_double(spec, "lo", 0.0), get_double(spec, "hi", 1.0), require_double(spec, "h"));
  }
  if (kind == "interleaved_grids") {
    auto pair = interleaved_grids(n, get_double(spec, "lo", 0.0), get_double(spec, "hi", 1.0), require_double(spec, "h"));
    const std::string part = get_string(spec, "part", "centers");
    if (part == "centers") return pair.first;
    if (part == "corners") return pair.second;
    throw Error(ErrorCode::schema, "interleaved_grids part must be centers or corners");
  }
  if (kind == "random_atoms") {
    const int count = get_int(spec, "n", 10);
    if (count < 0) throw Error(ErrorCode::schema, "n must be nonnegative");
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(get_int(spec, "seed", 0)));
    return random_atoms(static_cast<std::size_t>(count), n, get_double(spec, "lo", 0.0), get_double(spec, "hi", 1.0),
                        rng);
  }
  if (kind == "ball_uniform") {
    auto center = get_doubles(spec, "center", std::vector<double>(n, 0.0));
    if (center.size() == 1) center.assign(n, center[0]);
    return ball_uniform(center, require_double(spec, "radius"), require_double(spec, "h"), get_double(spec, "mass", 1.0),
                        get_double(spec, "offset", 0.5));
  }
  throw Error(ErrorCode::schema, "unknown measure kind '" + kind + "'");
}

double get_double(const Json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  if (!cfg[key].is_number()) throw Error(ErrorCode::schema, "'" + key + "' must be a number");
  return cfg[key].get<double>();
}

double require_double(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw Error(ErrorCode::schema, "missing '" + key + "'");
  return get_double(cfg, key, 0.0);
}

int get_int(const Json& cfg, const std::string& key, int fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  const double v = get_double(cfg, key, 0.0);
  if (v != static_cast<double>(static_cast<int>(v))) throw Error(ErrorCode::schema, "'" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::vector<double> get_doubles(const Json& cfg, const std::string& key, std::vector<double> fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  const Json& v = cfg[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw Error(ErrorCode::schema, "'" + key + "' must be a number list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(ErrorCode::schema, "'" + key + "' must be a number list");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string get_string(const Json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  if (!cfg[key].is_string()) throw Error(ErrorCode::schema, "'" + key + "' must be a string");
  return cfg[key].get<std::string>();
}

}  // namespace sio::cli
