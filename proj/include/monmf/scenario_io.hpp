#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "monmf/csv.hpp"
#include "monmf/experiments.hpp"

namespace monmf {

inline const char* to_string(Scenario s) {
  return s == Scenario::s1 ? "s1" : "s2";
}

inline Scenario scenario_from_string(const std::string& name) {
  if (name == "s1") return Scenario::s1;
  if (name == "s2") return Scenario::s2;
  throw std::invalid_argument("unknown scenario: " + name);
}

inline const char* to_string(Direction d) {
  return d == Direction::increasing ? "inc" : "dec";
}

inline Direction direction_from_string(const std::string& name) {
  if (name == "inc" || name == "increasing") return Direction::increasing;
  if (name == "dec" || name == "decreasing") return Direction::decreasing;
  throw std::invalid_argument("unknown direction: " + name);
}

inline nlohmann::json pattern_to_json(const MonotonicityPattern& pattern) {
  nlohmann::json arr = nlohmann::json::array();
  for (Direction d : pattern) arr.push_back(to_string(d));
  return arr;
}

/// Writes the scenario bundle: Z_noisy.csv, Z_clean.csv, W_true.csv,
/// H_true.csv and meta.json. Byte-identical for identical inputs.
inline void save_scenario(const std::string& dir, const ScenarioData& sd) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_matrix_csv((base / "Z_noisy.csv").string(), sd.z_noisy);
  write_matrix_csv((base / "Z_clean.csv").string(), sd.z_clean);
  write_matrix_csv((base / "W_true.csv").string(), sd.w_true);
  write_matrix_csv((base / "H_true.csv").string(), sd.h_true);

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["scenario"] = to_string(sd.scenario);
  meta["seed"] = sd.seed;
  meta["noise_level"] = sd.noise_level;
  meta["rows"] = sd.z_clean.rows();
  meta["cols"] = sd.z_clean.cols();
  meta["rank"] = sd.h_true.rows();
  meta["pattern"] = pattern_to_json(sd.pattern);
  meta["signal_params"] = sd.signal_params;

  std::ofstream out(base / "meta.json");
  if (!out) throw std::runtime_error("cannot open for writing: " + dir);
  out << meta.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + dir);
}

inline ScenarioData load_scenario(const std::string& dir) {
  const std::filesystem::path base(dir);
  std::ifstream in(base / "meta.json");
  if (!in)
    throw std::invalid_argument("cannot open scenario meta: " + dir);
  nlohmann::json meta = nlohmann::json::parse(in);

  ScenarioData sd;
  sd.scenario = scenario_from_string(meta.at("scenario").get<std::string>());
  sd.seed = meta.at("seed").get<std::uint64_t>();
  sd.noise_level = meta.at("noise_level").get<double>();
  for (const auto& d : meta.at("pattern"))
    sd.pattern.push_back(direction_from_string(d.get<std::string>()));
  if (meta.contains("signal_params"))
    sd.signal_params =
        meta.at("signal_params").get<std::map<std::string, double>>();
  sd.z_noisy = read_matrix_csv((base / "Z_noisy.csv").string());
  sd.z_clean = read_matrix_csv((base / "Z_clean.csv").string());
  sd.w_true = read_matrix_csv((base / "W_true.csv").string());
  sd.h_true = read_matrix_csv((base / "H_true.csv").string());
  return sd;
}

}  // namespace monmf
