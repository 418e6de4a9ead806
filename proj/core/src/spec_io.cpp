#include "fractalnet/spec_io.hpp"

#include "fractalnet/error.hpp"

#include <fstream>

namespace fractalnet {

using nlohmann::json;

Rational rational_from_json(const json& value) {
  if (value.is_string()) return parse_rational(value.get<std::string>());
  if (value.is_number_integer()) return Rational(value.dump());
  if (value.is_number_float()) return parse_rational(value.dump());
  throw Error(ErrorCode::kSpecError, "expected a rational, got " + value.dump());
}

namespace {

RationalMatrix matrix_from_json(const json& value) {
  if (!value.is_array()) throw Error(ErrorCode::kSpecError, "matrix must be an array of rows");
  RationalMatrix out;
  for (const auto& row : value) {
    if (!row.is_array()) throw Error(ErrorCode::kSpecError, "matrix row must be an array");
    RationalVector r;
    for (const auto& entry : row) r.push_back(rational_from_json(entry));
    out.push_back(std::move(r));
  }
  return out;
}

RationalVector vector_from_json(const json& value) {
  if (!value.is_array()) throw Error(ErrorCode::kSpecError, "expected an array");
  RationalVector out;
  for (const auto& entry : value) out.push_back(rational_from_json(entry));
  return out;
}

json matrix_to_json(const RationalMatrix& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& v : row) r.push_back(format_rational(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

IfsSpec parse_spec(const json& doc) {
  try {
    IfsSpec spec;
    spec.name = doc.value("name", std::string{});
    spec.dimension = doc.at("dimension").get<std::size_t>();
    for (const auto& m : doc.at("maps")) {
      spec.maps.push_back(AffineMap::make(matrix_from_json(m.at("matrix")), vector_from_json(m.at("offset")),
                                          rational_from_json(m.at("ratio"))));
    }
    for (const auto& c : doc.at("conductances_v0")) {
      std::size_t i = c.at("i").get<std::size_t>();
      std::size_t j = c.at("j").get<std::size_t>();
      if (i == j) throw Error(ErrorCode::kSpecError, "self-loop conductance on V_0");
      Rational value = rational_from_json(c.at("c"));
      auto key = std::make_pair(std::min(i, j), std::max(i, j));
      auto [it, inserted] = spec.conductances_v0.emplace(key, value);
      if (!inserted && it->second != value) {
        throw Error(ErrorCode::kSpecError, "asymmetric conductance between " + std::to_string(i) + " and " + std::to_string(j));
      }
    }
    if (doc.contains("vertical_weights") && !doc["vertical_weights"].is_null()) {
      spec.vertical_weights = vector_from_json(doc["vertical_weights"]);
    }
    if (doc.contains("extension_matrices") && !doc["extension_matrices"].is_null()) {
      std::vector<RationalMatrix> ms;
      for (const auto& m : doc["extension_matrices"]) ms.push_back(matrix_from_json(m));
      spec.extension_matrices = std::move(ms);
    }
    spec.vertical_normalization = doc.value("vertical_normalization", true);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSpecError, e.what());
  }
}

IfsSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSpecError, "cannot open spec file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSpecError, path.string() + ": " + e.what());
  }
  IfsSpec spec = parse_spec(doc);
  if (spec.name.empty()) spec.name = path.stem().string();
  return spec;
}

json spec_to_json(const IfsSpec& spec) {
  json doc;
  doc["name"] = spec.name;
  doc["dimension"] = spec.dimension;
  doc["maps"] = json::array();
  for (const auto& m : spec.maps) {
    json offset = json::array();
    for (const auto& v : m.offset) offset.push_back(format_rational(v));
    doc["maps"].push_back({{"matrix", matrix_to_json(m.matrix)}, {"offset", offset}, {"ratio", format_rational(m.ratio)}});
  }
  doc["conductances_v0"] = json::array();
  for (const auto& [key, c] : spec.conductances_v0) {
    doc["conductances_v0"].push_back({{"i", key.first}, {"j", key.second}, {"c", format_rational(c)}});
  }
  if (!spec.vertical_weights.empty()) {
    json w = json::array();
    for (const auto& v : spec.vertical_weights) w.push_back(format_rational(v));
    doc["vertical_weights"] = w;
  }
  if (spec.extension_matrices) {
    json ms = json::array();
    for (const auto& m : *spec.extension_matrices) ms.push_back(matrix_to_json(m));
    doc["extension_matrices"] = ms;
  }
  doc["vertical_normalization"] = spec.vertical_normalization;
  return doc;
}

}  // namespace fractalnet
