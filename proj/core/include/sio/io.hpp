#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "sio/measure.hpp"

namespace sio {

/// {dimension, points: [[...]], weights: [...], atomic: [...], cell_size?}
nlohmann::json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

DiscreteMeasure read_measure_file(const std::filesystem::path& path);
void write_measure_file(const std::filesystem::path& path, const DiscreteMeasure& mu);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `j.dump(2)` plus a trailing newline. Object keys are sorted and
/// doubles print with round-trip precision, so equal values give equal bytes.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace sio
