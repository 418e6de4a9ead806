#pragma once

#include <fractalnet/attractor.hpp>
#include <fractalnet/network.hpp>

#include <map>
#include <memory>
#include <random>
#include <string>

namespace fractalnet::testing {

inline std::string spec_path(const std::string& name) {
  return std::string(FRACTALNET_SPEC_DIR) + "/" + name;
}

// Attractors are cached per depth; networks reuse them so indices line up.
inline std::shared_ptr<const Attractor> sg_attractor(std::size_t depth) {
  static std::map<std::size_t, std::shared_ptr<const Attractor>> cache;
  auto& slot = cache[depth];
  if (!slot) slot = std::make_shared<const Attractor>(sierpinski_gasket_spec(), depth);
  return slot;
}

inline std::shared_ptr<const Attractor> cantor_attractor(std::size_t depth) {
  static std::map<std::size_t, std::shared_ptr<const Attractor>> cache;
  auto& slot = cache[depth];
  if (!slot) slot = std::make_shared<const Attractor>(cantor_spec(), depth);
  return slot;
}

inline const Network& sg_network(std::size_t m) {
  static std::map<std::size_t, std::unique_ptr<Network>> cache;
  auto& slot = cache[m];
  if (!slot) slot = std::make_unique<Network>(Network::build(sg_attractor(m), m));
  return *slot;
}

inline const Network& cantor_network(std::size_t m) {
  static std::map<std::size_t, std::unique_ptr<Network>> cache;
  auto& slot = cache[m];
  if (!slot) slot = std::make_unique<Network>(Network::build(cantor_attractor(m), m));
  return *slot;
}

inline Point pt(std::initializer_list<const char*> coords) {
  Point p;
  for (const char* c : coords) p.push_back(parse_rational(c));
  return p;
}

}  // namespace fractalnet::testing
