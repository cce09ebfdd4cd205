#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "volsamp/generators.hpp"
#include "volsamp/measure_model.hpp"

namespace volsamp {

// CSV layout: one row per H coordinate, one column per sample point, no
// header. Weights: one value per line. Blank lines are ignored.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view field, const std::string& where) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorCode::ParseError, where + ": cannot parse '" + std::string(field) + "' as a number");
  return value;
}

inline std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    const std::string where = path + ":" + std::to_string(line_no);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(rows.front().size()) +
                                             " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read error on '" + path + "'");
  return rows;
}

}  // namespace detail

inline Matrix read_matrix_csv(const std::string& path) {
  const auto rows = detail::read_csv_rows(path);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "'" + path + "' contains no data");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

inline Vector read_weights_csv(const std::string& path) {
  const auto rows = detail::read_csv_rows(path);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "'" + path + "' contains no weights");
  if (rows.front().size() != 1)
    throw Error(ErrorCode::ParseError, "'" + path + "' must hold a single column of weights");
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = rows[i][0];
  return out;
}

/// Loads values and (optionally) weights; an empty weights path means unit weights.
inline DiscretizedFunction load_function(const std::string& values_path, const std::string& weights_path = {}) {
  Matrix values = read_matrix_csv(values_path);
  if (weights_path.empty()) return DiscretizedFunction(values);
  return DiscretizedFunction(std::move(values), read_weights_csv(weights_path));
}

inline void write_matrix_csv(std::ostream& out, const Matrix& values) {
  char buf[32];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

// InstanceSpec JSON schema:
//   {"kind": "prescribed_spectrum" | "kernel_snapshot" | "gaussian",
//    "m": int, "n": int, "seed": uint64, "params": {...}}
// params by kind:
//   prescribed_spectrum: {"spectrum": [..], "weights": "uniform" | "random" | [..],
//                         "canonical": bool}
//   kernel_snapshot:     {"kernel": "inverse_sum" | "gaussian", "shift": c, "length": l,
//                         "x_grid": [..] | {"lo", "hi", "count"}, "y_grid": same}
//   gaussian:            {"weights": as above}
// For kernel_snapshot m and n are implied by the grids.

namespace detail {

inline nlohmann::json weights_to_json(const InstanceSpec& spec) {
  switch (spec.weight_mode) {
    case WeightMode::Uniform: return "uniform";
    case WeightMode::Random: return "random";
    case WeightMode::Explicit: return spec.weights;
  }
  return "uniform";
}

inline void weights_from_json(const nlohmann::json& j, InstanceSpec& spec) {
  if (j.is_string()) {
    const auto mode = j.get<std::string>();
    if (mode == "uniform")
      spec.weight_mode = WeightMode::Uniform;
    else if (mode == "random")
      spec.weight_mode = WeightMode::Random;
    else
      throw Error(ErrorCode::ParseError, "unknown weights mode '" + mode + "'");
  } else {
    spec.weight_mode = WeightMode::Explicit;
    spec.weights = j.get<std::vector<double>>();
  }
}

inline std::vector<double> grid_from_json(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  const auto count = j.at("count").get<std::size_t>();
  if (count < 1) throw Error(ErrorCode::InvalidGrid, "grid count must be >= 1");
  return linspace(j.at("lo").get<double>(), j.at("hi").get<double>(), count);
}

}  // namespace detail

inline nlohmann::json to_json(const InstanceSpec& spec) {
  nlohmann::json params = nlohmann::json::object();
  switch (spec.kind) {
    case InstanceKind::PrescribedSpectrum:
      params["spectrum"] = spec.spectrum;
      params["weights"] = detail::weights_to_json(spec);
      params["canonical"] = spec.canonical_factors;
      break;
    case InstanceKind::KernelSnapshot:
      params["kernel"] = std::string(to_string(spec.kernel));
      params["shift"] = spec.shift;
      params["length"] = spec.length;
      params["x_grid"] = spec.x_grid;
      params["y_grid"] = spec.y_grid;
      break;
    case InstanceKind::Gaussian:
      params["weights"] = detail::weights_to_json(spec);
      break;
  }
  return {{"kind", std::string(to_string(spec.kind))},
          {"m", spec.m},
          {"n", spec.n},
          {"seed", spec.seed},
          {"params", params}};
}

inline InstanceSpec instance_spec_from_json(const nlohmann::json& j) {
  try {
    InstanceSpec spec;
    const auto kind = j.at("kind").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    spec.seed = j.value("seed", std::uint64_t{0});
    if (kind == "prescribed_spectrum") {
      spec.kind = InstanceKind::PrescribedSpectrum;
      spec.spectrum = params.value("spectrum", std::vector<double>{});
      spec.canonical_factors = params.value("canonical", false);
      if (params.contains("weights")) detail::weights_from_json(params["weights"], spec);
    } else if (kind == "kernel_snapshot") {
      spec.kind = InstanceKind::KernelSnapshot;
      const auto kernel = params.value("kernel", std::string("inverse_sum"));
      if (kernel == "inverse_sum")
        spec.kernel = KernelKind::InverseSum;
      else if (kernel == "gaussian")
        spec.kernel = KernelKind::Gaussian;
      else
        throw Error(ErrorCode::ParseError, "unknown kernel '" + kernel + "'");
      spec.shift = params.value("shift", 1.0);
      spec.length = params.value("length", 1.0);
      spec.x_grid = detail::grid_from_json(params.at("x_grid"));
      spec.y_grid = detail::grid_from_json(params.at("y_grid"));
    } else if (kind == "gaussian") {
      spec.kind = InstanceKind::Gaussian;
      if (params.contains("weights")) detail::weights_from_json(params["weights"], spec);
    } else {
      throw Error(ErrorCode::ParseError, "unknown instance kind '" + kind + "'");
    }

    if (spec.kind == InstanceKind::KernelSnapshot) {
      spec.m = j.value("m", spec.x_grid.size());
      spec.n = j.value("n", spec.y_grid.size());
      if (spec.m != spec.x_grid.size() || spec.n != spec.y_grid.size())
        throw Error(ErrorCode::InvalidGrid, "m and n must match the grid sizes");
    } else {
      spec.m = j.at("m").get<std::size_t>();
      spec.n = j.at("n").get<std::size_t>();
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("instance spec: ") + e.what());
  }
}

inline InstanceSpec read_instance_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return instance_spec_from_json(j);
}

}  // namespace volsamp
