#pragma once

#include "fractalnet/harmonic.hpp"
#include "fractalnet/random_walk.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace fractalnet {

enum class AddressSource { kExplicit, kExtracted };

struct BoundaryAddress {
  Word prefix;
  std::size_t depth = 0;
  AddressSource source = AddressSource::kExplicit;
};

BoundaryAddress explicit_address(const Word& w);

// Nested cells containing the point of v, to `depth`; at junctions the
// lexicographically least word wins. Throws DepthExceedsTruncation past v's level.
BoundaryAddress address_of_vertex(const Network& net, VertexIndex v, std::size_t depth);
// The address of the absorption vertex; throws InvalidPath if the walk never absorbed.
BoundaryAddress address_of_path(const Network& net, const PathSample& path, std::size_t depth);

// lim u along the address (the spline of u's cell data), evaluated at addr.depth.
SplineValue boundary_limit(const IfsSpec& spec, const ExtensionMatrices& m, const HGFunction& u,
                           const BoundaryAddress& addr);

// u_(xi, m) for every xi in V_m.
struct TestFamily {
  std::size_t level = 0;
  std::vector<HGFunction> members;
};

TestFamily make_test_family(const Network& net, const ExtensionMatrices& m, std::size_t level);

// Equal, within tol, for every family member at the two absorption vertices.
bool paths_equivalent(const PathSample& p1, const PathSample& p2, const TestFamily& family, double tol = 1e-12);

struct AddressStability {
  std::size_t walks = 0;
  std::size_t absorbed_low = 0;
  std::size_t absorbed_high = 0;
  std::size_t same_address = 0;
  double fraction_same = 0.0;
};

// Runs the same seeded walks on a low and a high truncation of one attractor and
// compares the depth-`depth` addresses of their absorption points.
AddressStability coupled_address_stability(const Network& low, const Network& high, const WalkConfig& config,
                                           std::size_t depth);

struct CorrespondenceOptions {
  std::size_t family_level = 0;
  std::size_t continuity_depth = 4;
  std::size_t spline_depth = 40;
  std::uint64_t seed = 1;
};

struct CorrespondenceReport {
  std::size_t depth = 0;
  std::size_t round_trip_tested = 0;
  std::size_t round_trip_failed = 0;
  std::size_t pairs = 0;
  std::size_t separated = 0;
  std::size_t same_point = 0;
  std::size_t continuity_depth = 0;
  double continuity_bound = 0.0;
  double max_gap = 0.0;

  bool pass() const {
    return round_trip_failed == 0 && separated + same_point == pairs && max_gap <= continuity_bound;
  }
};

// (i) round trip word -> point -> cells at `depth`; (ii) every pair of sampled
// addresses separated unless they name the same point; (iii) addresses sharing a
// continuity_depth prefix differ by at most r_max^(n-m) on the level-m family.
CorrespondenceReport verify_correspondence(const Attractor& attractor, const ExtensionMatrices& m,
                                           std::span<const Word> addresses, std::size_t depth,
                                           const CorrespondenceOptions& options = {});

nlohmann::json to_json(const CorrespondenceReport& report);

}  // namespace fractalnet
