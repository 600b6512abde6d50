#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sio/kernels.hpp"
#include "sio/measure.hpp"
#include "sio/mollifiers.hpp"

namespace sio::cli {

using Json = nlohmann::json;

/// "name" or "name:key=value,key=value" to {"name": ..., key: value...}.
/// Values parse as numbers when possible.
Json parse_spec(const std::string& text);

/// Accepts a spec string or an object with a "name" key.
Json normalize_spec(const Json& j);

/// hilbert | cauchy | ahlfors_beurling | riesz:{alpha, N}
KernelSpec make_kernel(const Json& spec);

/// gaussian:{N} | complex_shift | annulus:{delta, N} | unit:{N} | power:{base, k, ...base params}
Mollifier make_mollifier(const Json& spec);

/// Measure from a file path string or a generator object
/// {kind: lebesgue_grid | random_atoms | interleaved_grids | ball_uniform, ...}.
/// random_atoms draws from a generator seeded by `seed` and the optional "seed" key.
DiscreteMeasure make_measure(const Json& spec, std::uint64_t seed);

/// Typed lookups with schema errors naming the key.
double get_double(const Json& cfg, const std::string& key, double fallback);
double require_double(const Json& cfg, const std::string& key);
int get_int(const Json& cfg, const std::string& key, int fallback);
std::vector<double> get_doubles(const Json& cfg, const std::string& key, std::vector<double> fallback);
std::string get_string(const Json& cfg, const std::string& key, const std::string& fallback);

}  // namespace sio::cli
