#include "sio/io.hpp"

#include <fstream>

#include "sio/error.hpp"

namespace sio {

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) points.push_back(mu.point_copy(i));
  nlohmann::json atomic = nlohmann::json::array();
  for (bool a : mu.atomic_flags()) atomic.push_back(a);
  nlohmann::json j = {{"dimension", mu.dimension()},
                      {"points", std::move(points)},
                      {"weights", mu.weights()},
                      {"atomic", std::move(atomic)}};
  if (mu.cell_size()) j["cell_size"] = *mu.cell_size();
  return j;
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  try {
    const auto dimension = j.at("dimension").get<std::size_t>();
    const auto points = j.at("points").get<std::vector<Point>>();
    auto weights = j.at("weights").get<std::vector<double>>();
    auto atomic = j.at("atomic").get<std::vector<bool>>();
    std::optional<double> h;
    if (j.contains("cell_size") && !j["cell_size"].is_null()) h = j["cell_size"].get<double>();
    return DiscreteMeasure::from_points(dimension, points, std::move(weights), std::move(atomic), h);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("invalid measure JSON: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::schema, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

DiscreteMeasure read_measure_file(const std::filesystem::path& path) {
  return measure_from_json(read_json_file(path));
}

void write_measure_file(const std::filesystem::path& path, const DiscreteMeasure& mu) {
  write_json_file(path, measure_to_json(mu));
}

}  // namespace sio
