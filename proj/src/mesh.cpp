#include "pointclimb/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pointclimb/rng.hpp"

namespace pointclimb {

namespace {

[[noreturn]] void fail(size_t offset, const std::string& what) {
  throw std::runtime_error("OFF parse error at byte " + std::to_string(offset) +
                           ": " + what);
}

// Whitespace/comment-skipping tokenizer that remembers where each token
// starts, for error messages.
class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  std::string_view next_token() {
    skip();
    if (pos_ >= text_.size()) fail(pos_, "unexpected end of input");
    const size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '#') {
      ++pos_;
    }
    last_start_ = start;
    return text_.substr(start, pos_ - start);
  }

  size_t last_token_offset() const { return last_start_; }

  int next_int(const char* what) { return parse_int(next_token(), what); }

  int parse_int(std::string_view tok, const char* what) {
    int v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      fail(last_start_, std::string("expected integer ") + what);
    }
    return v;
  }

  double next_double(const char* what) {
    const auto tok = next_token();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
      fail(last_start_, std::string("expected number ") + what);
    }
    return v;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  size_t last_start_ = 0;
};

double triangle_area(const std::array<double, 3>& a, const std::array<double, 3>& b,
                     const std::array<double, 3>& c) {
  const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const double cx = uy * vz - uz * vy;
  const double cy = uz * vx - ux * vz;
  const double cz = ux * vy - uy * vx;
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

}  // namespace

Mesh parse_off(std::string_view text) {
  Scanner sc(text);

  const auto magic = sc.next_token();
  int nv;
  if (magic == "OFF") {
    nv = sc.next_int("vertex count");
  } else if (magic.substr(0, 3) == "OFF" && magic.size() > 3) {
    // ModelNet40 ships files whose vertex count is glued to the magic
    nv = sc.parse_int(magic.substr(3), "vertex count");
  } else {
    fail(sc.last_token_offset(), "missing OFF magic");
  }
  const int nf = sc.next_int("face count");
  sc.next_int("edge count");  // ignored, as is conventional
  if (nv < 0 || nf < 0) fail(sc.last_token_offset(), "negative count");

  Mesh mesh;
  mesh.vertices.reserve(static_cast<size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    std::array<double, 3> v;
    for (int c = 0; c < 3; ++c) v[static_cast<size_t>(c)] = sc.next_double("vertex coordinate");
    mesh.vertices.push_back(v);
  }

  for (int i = 0; i < nf; ++i) {
    const int sides = sc.next_int("face vertex count");
    if (sides < 3) fail(sc.last_token_offset(), "face with fewer than 3 vertices");
    std::vector<int> poly(static_cast<size_t>(sides));
    for (int s = 0; s < sides; ++s) {
      const int idx = sc.next_int("face index");
      if (idx < 0 || idx >= nv) fail(sc.last_token_offset(), "face index out of range");
      poly[static_cast<size_t>(s)] = idx;
    }
    for (int s = 1; s + 1 < sides; ++s) {
      mesh.faces.push_back({poly[0], poly[static_cast<size_t>(s)], poly[static_cast<size_t>(s + 1)]});
    }
  }
  return mesh;
}

std::vector<double> sample_surface_points(const Mesh& mesh, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_surface_points: n must be positive");

  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    total += triangle_area(mesh.vertices[static_cast<size_t>(f[0])],
                           mesh.vertices[static_cast<size_t>(f[1])],
                           mesh.vertices[static_cast<size_t>(f[2])]);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("sample_surface_points: mesh has zero surface area");
  }

  Rng rng(mix(seed, "surface"));
  std::vector<double> out(static_cast<size_t>(n) * 3);
  for (int i = 0; i < n; ++i) {
    const double r = rng.next_double() * total;
    const size_t fi = static_cast<size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    const auto& f = mesh.faces[std::min(fi, mesh.faces.size() - 1)];
    const auto& a = mesh.vertices[static_cast<size_t>(f[0])];
    const auto& b = mesh.vertices[static_cast<size_t>(f[1])];
    const auto& c = mesh.vertices[static_cast<size_t>(f[2])];

    // square-root warp makes barycentric coordinates area-uniform
    const double s = std::sqrt(rng.next_double());
    const double t = rng.next_double();
    const double u = 1.0 - s, v = s * (1.0 - t), w = s * t;
    for (int d = 0; d < 3; ++d) {
      out[static_cast<size_t>(i * 3 + d)] =
          u * a[static_cast<size_t>(d)] + v * b[static_cast<size_t>(d)] + w * c[static_cast<size_t>(d)];
    }
  }
  return out;
}

}  // namespace pointclimb
