#pragma once

#include "fractalnet/attractor.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace fractalnet {

// Rationals are "p/q" strings or JSON integers; decimal numbers are read exactly.
Rational rational_from_json(const nlohmann::json& value);

IfsSpec parse_spec(const nlohmann::json& doc);
IfsSpec load_spec(const std::filesystem::path& path);
nlohmann::json spec_to_json(const IfsSpec& spec);

}  // namespace fractalnet
