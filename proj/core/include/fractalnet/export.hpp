#pragma once

#include "fractalnet/boundary.hpp"
#include "fractalnet/energy.hpp"
#include "fractalnet/network.hpp"
#include "fractalnet/random_walk.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace fractalnet {

// 17 significant digits.
std::string format_double(double value);
nlohmann::json rational_json(const Rational& value);
nlohmann::json point_json(const Point& p);

// Objects keep nlohmann's sorted key order; floats use format_double, non-finite become null.
std::string dump_json(const nlohmann::json& doc);

nlohmann::json graph_json(const Network& net);
std::string graph_dot(const Network& net);
nlohmann::json counts_json(const Network& net);

// level,horizontal_energy,vertical_energy[,ratio]; ratio is E_k / E_{k-1}.
std::string energy_csv(const EnergyBreakdown& b, bool with_ratio = false);
std::string energy_csv(const ExactEnergyBreakdown& b, bool with_ratio = false);

std::string function_csv(const VertexFunction& f);
std::string function_csv(const ExactVertexFunction& f);

// One row per visited vertex; needs keep_paths. f_value is omitted when f is null.
std::string walk_csv(const Network& net, const WalkEnsemble& ens, const VertexFunction* f = nullptr);

nlohmann::json walk_config_json(const WalkConfig& config);
nlohmann::json kernel_json(const KernelElement& k, double resistance);
nlohmann::json ensemble_json(const WalkEnsemble& ens);
nlohmann::json crossings_json(const CrossingsReport& r);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fractalnet
