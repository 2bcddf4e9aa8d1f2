#include "pointclimb/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"

using namespace pointclimb;

namespace {

const char* kTetra = R"(OFF
4 4 0
0 0 0
1 0 0
0 1 0
0 0 1
3 0 1 2
3 0 1 3
3 0 2 3
3 1 2 3
)";

}  // namespace

TEST_CASE("parse_off reads a tetrahedron") {
  const Mesh m = parse_off(kTetra);
  REQUIRE(m.vertices.size() == 4);
  REQUIRE(m.faces.size() == 4);
  CHECK(m.vertices[1] == std::array<double, 3>{1, 0, 0});
  CHECK(m.faces[3] == std::array<int, 3>{1, 2, 3});
}

TEST_CASE("parse_off fan-splits polygon faces") {
  const char* cube = R"(# unit cube
OFF
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 1 2 3
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
)";
  const Mesh m = parse_off(cube);
  CHECK(m.vertices.size() == 8);
  CHECK(m.faces.size() == 12);
  // first quad splits into (0,1,2) and (0,2,3)
  CHECK(m.faces[0] == std::array<int, 3>{0, 1, 2});
  CHECK(m.faces[1] == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("parse_off accepts the glued header variant") {
  std::string spaced = kTetra;
  std::string glued = "OFF4 4 0" + spaced.substr(spaced.find('\n', spaced.find('4')));
  REQUIRE(glued.substr(0, 8) == "OFF4 4 0");
  const Mesh a = parse_off(spaced);
  const Mesh b = parse_off(glued);
  CHECK(a.vertices == b.vertices);
  CHECK(a.faces == b.faces);
}

TEST_CASE("parse_off reports malformed input with a byte offset") {
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(parse_off("PLY\n0 0 0\n"), Contains("byte 0"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_off("OFF\n1 1 0\n0 0 0\n3 0 0 7\n"),
                       Contains("out of range"), std::runtime_error);
  CHECK_THROWS_AS(parse_off("OFF\n2 0 0\n0 0 0\n"), std::runtime_error);  // truncated
  CHECK_THROWS_AS(parse_off("OFF\nx 0 0\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_off("OFF\n1 1 0\n0 0 0\n2 0 0\n"), std::runtime_error);  // degenerate face
}

TEST_CASE("surface samples of one triangle lie inside it") {
  Mesh m;
  m.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
  m.faces = {{0, 1, 2}};
  const auto pts = sample_surface_points(m, 1000, 5);
  REQUIRE(pts.size() == 3000);
  for (int i = 0; i < 1000; ++i) {
    const double x = pts[static_cast<size_t>(i * 3)];
    const double y = pts[static_cast<size_t>(i * 3 + 1)];
    CHECK(pts[static_cast<size_t>(i * 3 + 2)] == 0.0);
    CHECK(x >= 0.0);
    CHECK(y >= 0.0);
    CHECK(x + y <= 2.0 + 1e-12);
  }
}

TEST_CASE("surface sampling weights triangles by area") {
  // area 3 triangle in plane z=0, area 1 triangle in plane z=5
  Mesh m;
  m.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 2, 0}, {0, 0, 5}, {2, 0, 5}, {0, 1, 5}};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  const int n = 100000;
  const auto pts = sample_surface_points(m, n, 9);
  int low = 0;
  for (int i = 0; i < n; ++i) low += pts[static_cast<size_t>(i * 3 + 2)] < 2.5 ? 1 : 0;
  CHECK(low > static_cast<int>(n * 0.74));
  CHECK(low < static_cast<int>(n * 0.76));
}

TEST_CASE("surface sampling centroid matches the analytic expectation") {
  Mesh m;  // unit square at z=0
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  const int n = 100000;
  const auto pts = sample_surface_points(m, n, 3);
  double cx = 0.0, cy = 0.0;
  for (int i = 0; i < n; ++i) {
    cx += pts[static_cast<size_t>(i * 3)];
    cy += pts[static_cast<size_t>(i * 3 + 1)];
  }
  CHECK(std::fabs(cx / n - 0.5) < 0.01);
  CHECK(std::fabs(cy / n - 0.5) < 0.01);
}

TEST_CASE("surface sampling is deterministic per seed and rejects zero area") {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  CHECK(sample_surface_points(m, 64, 4) == sample_surface_points(m, 64, 4));
  CHECK(sample_surface_points(m, 64, 4) != sample_surface_points(m, 64, 5));

  Mesh degenerate;
  degenerate.vertices = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  degenerate.faces = {{0, 1, 2}};  // collinear
  CHECK_THROWS_AS(sample_surface_points(degenerate, 10, 1), std::invalid_argument);
}
