#include "fractalnet/export.hpp"

#include "fractalnet/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fractalnet {

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

nlohmann::json rational_json(const Rational& value) { return format_rational(value); }

nlohmann::json point_json(const Point& p) {
  auto out = nlohmann::json::array();
  for (const Rational& c : p) out.push_back(format_rational(c));
  return out;
}

namespace {

void emit(std::string& out, const nlohmann::json& j, int depth) {
  using V = nlohmann::json::value_t;
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case V::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(key).dump() + ": ";
        emit(out, value, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case V::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(out, j[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case V::number_float: {
      double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string coords_field(const Point& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ';';
    out += format_rational(p[i]);
  }
  return out;
}

template <class T>
std::string cell(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return format_double(v);
  } else {
    return format_rational(v);
  }
}

template <class T>
std::string energy_csv_impl(const BasicEnergyBreakdown<T>& b, bool with_ratio) {
  std::string out = with_ratio ? "level,horizontal_energy,vertical_energy,ratio\n"
                               : "level,horizontal_energy,vertical_energy\n";
  for (std::size_t k = 0; k < b.horizontal.size(); ++k) {
    out += fmt::format("{},{},{}", k, cell(b.horizontal[k]), cell(b.vertical[k]));
    if (with_ratio) {
      out += ',';
      if (k > 0 && b.horizontal[k - 1] != T(0)) out += cell(T(b.horizontal[k] / b.horizontal[k - 1]));
    }
    out += '\n';
  }
  return out;
}

template <class T>
std::string function_csv_impl(const BasicVertexFunction<T>& f) {
  const Network& net = f.network();
  std::string out = "vertex_id,level,coords,value\n";
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    out += fmt::format("{},{},{},{}\n", v, net.vertex(v).level, coords_field(net.coords(v)), cell(f[v]));
  }
  return out;
}

}  // namespace

std::string dump_json(const nlohmann::json& doc) {
  std::string out;
  emit(out, doc, 0);
  out += '\n';
  return out;
}

nlohmann::json graph_json(const Network& net) {
  const Attractor& att = net.attractor();
  auto vertices = nlohmann::json::array();
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    vertices.push_back({{"id", v},
                        {"coords", point_json(net.coords(v))},
                        {"level", net.vertex(v).level},
                        {"generation", att.generation(net.vertex(v).point)},
                        {"frontier", net.is_frontier(v)}});
  }
  auto edges = nlohmann::json::array();
  for (const Edge& e : net.edges()) {
    edges.push_back({{"u", e.u},
                     {"v", e.v},
                     {"c", format_rational(e.conductance)},
                     {"kind", to_string(e.kind)},
                     {"level", e.level}});
  }
  return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}, {"root", net.root()}};
}

std::string graph_dot(const Network& net) {
  std::string out = "graph fractalnet {\n  node [shape=point];\n";
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    out += fmt::format("  {} [label=\"({}) {}\"];\n", v, coords_field(net.coords(v)), net.vertex(v).level);
  }
  for (const Edge& e : net.edges()) {
    out += fmt::format("  {} -- {} [color={}, label=\"{}\"];\n", e.u, e.v,
                       e.kind == EdgeKind::kHorizontal ? "black" : "red", format_rational(e.conductance));
  }
  out += "}\n";
  return out;
}

nlohmann::json counts_json(const Network& net) {
  auto levels = nlohmann::json::array();
  for (const LevelCounts& c : level_counts(net)) {
    levels.push_back({{"level", c.level},
                      {"vertices", c.vertices},
                      {"horizontal_edges", c.horizontal_edges},
                      {"vertical_edges", c.vertical_edges}});
  }
  return {{"truncation", net.truncation()},
          {"vertex_count", net.vertex_count()},
          {"edge_count", net.edge_count()},
          {"levels", std::move(levels)}};
}

std::string energy_csv(const EnergyBreakdown& b, bool with_ratio) { return energy_csv_impl(b, with_ratio); }
std::string energy_csv(const ExactEnergyBreakdown& b, bool with_ratio) { return energy_csv_impl(b, with_ratio); }

std::string function_csv(const VertexFunction& f) { return function_csv_impl(f); }
std::string function_csv(const ExactVertexFunction& f) { return function_csv_impl(f); }

std::string walk_csv(const Network& net, const WalkEnsemble& ens, const VertexFunction* f) {
  if (!ens.config.keep_paths) throw Error(ErrorCode::kInvalidPath, "walk export needs recorded paths");
  std::string out = f ? "walk_id,step,vertex_id,level,f_value\n" : "walk_id,step,vertex_id,level\n";
  for (std::size_t i = 0; i < ens.samples.size(); ++i) {
    const auto& path = ens.samples[i].vertices;
    for (std::size_t s = 0; s < path.size(); ++s) {
      VertexIndex v = path[s];
      out += fmt::format("{},{},{},{}", i, s, v, net.vertex(v).level);
      if (f) out += "," + format_double((*f)[v]);
      out += '\n';
    }
  }
  return out;
}

nlohmann::json walk_config_json(const WalkConfig& c) {
  return {{"start", c.start},
          {"walks", c.walks},
          {"step_cap", c.step_cap},
          {"seed", c.seed},
          {"keep_paths", c.keep_paths}};
}

nlohmann::json kernel_json(const KernelElement& k, double resistance) {
  return {{"center", k.center},
          {"M", k.truncation},
          {"mode", to_string(k.mode)},
          {"resistance", resistance},
          {"residual_norm", k.residual}};
}

nlohmann::json ensemble_json(const WalkEnsemble& ens) {
  auto absorption = nlohmann::json::array();
  for (const auto& [v, count] : ens.absorption) absorption.push_back({{"vertex_id", v}, {"count", count}});
  return {{"config", walk_config_json(ens.config)},
          {"M", ens.truncation},
          {"absorption", std::move(absorption)},
          {"mean_steps", ens.mean_steps},
          {"cap_exhausted", ens.cap_exhausted}};
}

nlohmann::json crossings_json(const CrossingsReport& r) {
  return {{"a", r.a},
          {"b", r.b},
          {"mean", r.crossings.mean},
          {"ci95", r.crossings.ci95},
          {"walks", r.crossings.count},
          {"energy", r.energy},
          {"green_xx", r.green_xx},
          {"bound", r.bound},
          {"cap_exhausted", r.cap_exhausted},
          {"pass", r.pass}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace fractalnet
