#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pointclimb {

// Triangle mesh as parsed from an OFF file. Polygon faces are fan-split at
// load time, so faces are always triples.
struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> faces;
};

// Parses ASCII OFF. Tolerates comments, blank lines, polygon faces, and the
// glued-header variant ("OFF490 322 0") found in ModelNet40. Malformed input
// raises std::runtime_error naming the byte offset.
Mesh parse_off(std::string_view text);

// n points drawn area-weighted uniformly over the mesh surface, flat n*3.
// Deterministic per seed. A mesh with zero total area is invalid.
std::vector<double> sample_surface_points(const Mesh& mesh, int n, uint64_t seed);

}  // namespace pointclimb
