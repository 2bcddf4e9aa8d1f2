#include "pointclimb/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "pointclimb/rng.hpp"

#ifdef POINTCLIMB_HAVE_HDF5
#include <hdf5.h>
#endif

namespace pointclimb {

std::vector<double> normalize_unit_sphere(std::vector<double> xyz) {
  const int n = static_cast<int>(xyz.size()) / 3;
  if (n < 1 || xyz.size() % 3 != 0) {
    throw std::invalid_argument("normalize_unit_sphere: need n*3 coordinates, n >= 1");
  }
  double cx = 0.0, cy = 0.0, cz = 0.0;
  for (int i = 0; i < n; ++i) {
    cx += xyz[static_cast<size_t>(i * 3)];
    cy += xyz[static_cast<size_t>(i * 3 + 1)];
    cz += xyz[static_cast<size_t>(i * 3 + 2)];
  }
  cx /= n;
  cy /= n;
  cz /= n;
  double max_r = 0.0;
  for (int i = 0; i < n; ++i) {
    double& x = xyz[static_cast<size_t>(i * 3)];
    double& y = xyz[static_cast<size_t>(i * 3 + 1)];
    double& z = xyz[static_cast<size_t>(i * 3 + 2)];
    x -= cx;
    y -= cy;
    z -= cz;
    max_r = std::max(max_r, std::sqrt(x * x + y * y + z * z));
  }
  if (max_r > 0.0) {
    for (double& v : xyz) v /= max_r;
  }
  return xyz;
}

// ---------------------------------------------------------------------------
// LabelMapper
// ---------------------------------------------------------------------------

void LabelMapper::extend(const std::vector<int>& task_classes) {
  for (int c : task_classes) {
    if (to_logit_.count(c) != 0) {
      throw std::logic_error("label mapper: class " + std::to_string(c) +
                             " is already mapped");
    }
  }
  for (int c : task_classes) {
    to_logit_[c] = static_cast<int>(slots_.size());
    slots_.push_back(c);
  }
}

int LabelMapper::logit(int global_class) const {
  const auto it = to_logit_.find(global_class);
  if (it == to_logit_.end()) {
    throw std::invalid_argument("label mapper: class " + std::to_string(global_class) +
                                " is not mapped");
  }
  return it->second;
}

int LabelMapper::global_of(int logit_index) const {
  if (logit_index < 0 || logit_index >= size()) {
    throw std::invalid_argument("label mapper: logit index out of range");
  }
  return slots_[static_cast<size_t>(logit_index)];
}

// ---------------------------------------------------------------------------
// Synthetic shapes
// ---------------------------------------------------------------------------

namespace {

constexpr int kBaseShapes = 10;
constexpr int kMaxClasses = 2 * kBaseShapes;

void unit_sphere_point(Rng& rng, double* p) {
  double x, y, z, n2;
  do {
    x = rng.next_normal();
    y = rng.next_normal();
    z = rng.next_normal();
    n2 = x * x + y * y + z * z;
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  p[0] = x * inv;
  p[1] = y * inv;
  p[2] = z * inv;
}

// One surface/support point of the base shape family, in canonical pose.
void shape_point(int family, Rng& rng, double* p) {
  constexpr double kPi = 3.14159265358979323846;
  switch (family) {
    case 0: {  // sphere
      unit_sphere_point(rng, p);
      return;
    }
    case 1: {  // cube surface
      const int face = rng.next_int(0, 5);
      const double a = rng.next_range(-1.0, 1.0);
      const double b = rng.next_range(-1.0, 1.0);
      const double s = face % 2 == 0 ? 1.0 : -1.0;
      if (face / 2 == 0) {
        p[0] = s; p[1] = a; p[2] = b;
      } else if (face / 2 == 1) {
        p[0] = a; p[1] = s; p[2] = b;
      } else {
        p[0] = a; p[1] = b; p[2] = s;
      }
      return;
    }
    case 2: {  // cylinder with caps, r=1, z in [-1,1]; side:caps area 4pi:2pi
      const double u = rng.next_double();
      const double theta = rng.next_range(0.0, 2.0 * kPi);
      if (u < 2.0 / 3.0) {
        p[0] = std::cos(theta);
        p[1] = std::sin(theta);
        p[2] = rng.next_range(-1.0, 1.0);
      } else {
        const double r = std::sqrt(rng.next_double());
        p[0] = r * std::cos(theta);
        p[1] = r * std::sin(theta);
        p[2] = u < 5.0 / 6.0 ? 1.0 : -1.0;
      }
      return;
    }
    case 3: {  // cone, apex (0,0,1), base r=1 at z=-1; lateral:base = sqrt5:1
      const double theta = rng.next_range(0.0, 2.0 * kPi);
      const double side_share = std::sqrt(5.0) / (std::sqrt(5.0) + 1.0);
      if (rng.next_double() < side_share) {
        const double s = std::sqrt(rng.next_double());  // radial fraction
        p[0] = s * std::cos(theta);
        p[1] = s * std::sin(theta);
        p[2] = 1.0 - 2.0 * s;
      } else {
        const double r = std::sqrt(rng.next_double());
        p[0] = r * std::cos(theta);
        p[1] = r * std::sin(theta);
        p[2] = -1.0;
      }
      return;
    }
    case 4: {  // torus R=1, r=0.35; phi accepted against the area density
      const double R = 1.0, r = 0.35;
      const double theta = rng.next_range(0.0, 2.0 * kPi);
      double phi;
      do {
        phi = rng.next_range(0.0, 2.0 * kPi);
      } while (rng.next_double() >= (R + r * std::cos(phi)) / (R + r));
      const double d = R + r * std::cos(phi);
      p[0] = d * std::cos(theta);
      p[1] = d * std::sin(theta);
      p[2] = r * std::sin(phi);
      return;
    }
    case 5: {  // flat square plate
      p[0] = rng.next_range(-1.0, 1.0);
      p[1] = rng.next_range(-1.0, 1.0);
      p[2] = 0.0;
      return;
    }
    case 6: {  // helix, two turns; constant speed so uniform t is arc-uniform
      const double t = rng.next_range(0.0, 4.0 * kPi);
      p[0] = std::cos(t);
      p[1] = std::sin(t);
      p[2] = t / (2.0 * kPi) - 1.0;
      return;
    }
    case 7: {  // cross of two orthogonal bars
      const bool first = rng.next_double() < 0.5;
      const double along = rng.next_range(-1.0, 1.0);
      const double a = rng.next_range(-0.2, 0.2);
      const double b = rng.next_range(-0.2, 0.2);
      if (first) {
        p[0] = along; p[1] = a; p[2] = b;
      } else {
        p[0] = a; p[1] = along; p[2] = b;
      }
      return;
    }
    case 8: {  // L bracket: floor plate plus wall plate
      if (rng.next_double() < 0.5) {
        p[0] = rng.next_range(-1.0, 1.0);
        p[1] = rng.next_range(-1.0, 1.0);
        p[2] = rng.next_range(-1.0, -0.9);
      } else {
        p[0] = rng.next_range(-1.0, -0.9);
        p[1] = rng.next_range(-1.0, 1.0);
        p[2] = rng.next_range(-1.0, 1.0);
      }
      return;
    }
    case 9: {  // ellipsoid
      unit_sphere_point(rng, p);
      p[0] *= 1.0;
      p[1] *= 0.6;
      p[2] *= 0.35;
      return;
    }
    default:
      throw std::logic_error("shape_point: unknown family");
  }
}

// Uniform random rotation from a normalized quaternion.
void random_rotation(Rng& rng, double m[9]) {
  double q[4], n2;
  do {
    for (double& c : q) c = rng.next_normal();
    n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  const double w = q[0] * inv, x = q[1] * inv, y = q[2] * inv, z = q[3] * inv;
  m[0] = 1 - 2 * (y * y + z * z);
  m[1] = 2 * (x * y - w * z);
  m[2] = 2 * (x * z + w * y);
  m[3] = 2 * (x * y + w * z);
  m[4] = 1 - 2 * (x * x + z * z);
  m[5] = 2 * (y * z - w * x);
  m[6] = 2 * (x * z - w * y);
  m[7] = 2 * (y * z + w * x);
  m[8] = 1 - 2 * (x * x + y * y);
}

PointCloud synth_cloud(int class_id, int sample_index, int n_points, uint64_t seed) {
  Rng rng(mix(mix(mix(seed, "synth"), static_cast<uint64_t>(class_id)),
              static_cast<uint64_t>(sample_index)));

  const int family = class_id % kBaseShapes;
  const bool squashed = class_id >= kBaseShapes;

  double sx = rng.next_range(0.8, 1.2);
  double sy = rng.next_range(0.8, 1.2);
  double sz = rng.next_range(0.8, 1.2);
  double rot[9];
  random_rotation(rng, rot);

  PointCloud cloud;
  cloud.global_class = class_id;
  cloud.source_id = "synth/c" + std::to_string(class_id) + "/s" + std::to_string(sample_index);
  cloud.xyz.resize(static_cast<size_t>(n_points) * 3);
  for (int i = 0; i < n_points; ++i) {
    double p[3];
    shape_point(family, rng, p);
    if (squashed) {
      p[0] *= 0.45;
      p[2] *= 1.6;
    }
    p[0] *= sx;
    p[1] *= sy;
    p[2] *= sz;
    double* out = cloud.xyz.data() + i * 3;
    for (int r = 0; r < 3; ++r) {
      out[r] = rot[r * 3] * p[0] + rot[r * 3 + 1] * p[1] + rot[r * 3 + 2] * p[2] +
               0.01 * rng.next_normal();
    }
  }
  return cloud;
}

}  // namespace

Dataset generate_synthetic_classes(int num_classes, int samples_per_class,
                                   int n_points, uint64_t seed) {
  if (num_classes < 1 || num_classes > kMaxClasses) {
    throw std::invalid_argument("generate_synthetic_classes: supports 1.." +
                                std::to_string(kMaxClasses) + " classes");
  }
  if (samples_per_class < 2) {
    throw std::invalid_argument(
        "generate_synthetic_classes: need >= 2 samples per class for a split");
  }
  if (n_points < 1) throw std::invalid_argument("generate_synthetic_classes: n_points >= 1");

  const int train_count = std::max(1, samples_per_class * 4 / 5);

  Dataset ds;
  ds.num_classes = num_classes;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < samples_per_class; ++i) {
      auto cloud = synth_cloud(c, i, n_points, seed);
      (i < train_count ? ds.train : ds.test).push_back(std::move(cloud));
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// HDF5 ingestion
// ---------------------------------------------------------------------------

#ifdef POINTCLIMB_HAVE_HDF5

bool hdf5_available() { return true; }

namespace {

[[noreturn]] void h5_fail(const std::string& path, const std::string& field,
                          const std::string& what) {
  throw std::runtime_error("hdf5 load error in " + path + ", field '" + field +
                           "': " + what);
}

struct H5Handle {
  hid_t id = -1;
  herr_t (*closer)(hid_t) = nullptr;
  ~H5Handle() {
    if (id >= 0 && closer) closer(id);
  }
};

// Failed opens are reported through exceptions; keep the library's stderr
// error stack quiet for the duration of a load.
struct H5Quiet {
  H5E_auto2_t func = nullptr;
  void* data = nullptr;
  H5Quiet() {
    H5Eget_auto2(H5E_DEFAULT, &func, &data);
    H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);
  }
  ~H5Quiet() { H5Eset_auto2(H5E_DEFAULT, func, data); }
};

}  // namespace

std::vector<PointCloud> load_h5_file(const std::string& path) {
  H5Quiet quiet;
  H5Handle file{H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT), H5Fclose};
  if (file.id < 0) throw std::runtime_error("hdf5 load error: cannot open " + path);

  H5Handle data{H5Dopen2(file.id, "data", H5P_DEFAULT), H5Dclose};
  if (data.id < 0) h5_fail(path, "data", "dataset missing");
  H5Handle dspace{H5Dget_space(data.id), H5Sclose};
  hsize_t ddims[8] = {0};
  if (H5Sget_simple_extent_ndims(dspace.id) != 3) h5_fail(path, "data", "expected rank 3");
  H5Sget_simple_extent_dims(dspace.id, ddims, nullptr);
  if (ddims[2] != 3) h5_fail(path, "data", "expected trailing extent 3");
  const size_t num = ddims[0], pts = ddims[1];

  H5Handle label{H5Dopen2(file.id, "label", H5P_DEFAULT), H5Dclose};
  if (label.id < 0) h5_fail(path, "label", "dataset missing");
  H5Handle lspace{H5Dget_space(label.id), H5Sclose};
  const int lrank = H5Sget_simple_extent_ndims(lspace.id);
  hsize_t ldims[8] = {0};
  H5Sget_simple_extent_dims(lspace.id, ldims, nullptr);
  size_t lnum = ldims[0];
  if (lrank == 2 && ldims[1] == 1) {
    // common packaging stores labels as [num x 1]
  } else if (lrank != 1) {
    h5_fail(path, "label", "expected rank 1");
  }
  if (lnum != num) h5_fail(path, "label", "count differs from data rows");

  std::vector<float> raw(num * pts * 3);
  if (H5Dread(data.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT, raw.data()) < 0) {
    h5_fail(path, "data", "read failed");
  }
  std::vector<int> labels(num);
  if (H5Dread(label.id, H5T_NATIVE_INT, H5S_ALL, H5S_ALL, H5P_DEFAULT, labels.data()) < 0) {
    h5_fail(path, "label", "read failed");
  }

  std::vector<PointCloud> clouds;
  clouds.reserve(num);
  for (size_t i = 0; i < num; ++i) {
    if (labels[i] < 0 || labels[i] > 39) {
      h5_fail(path, "label", "value " + std::to_string(labels[i]) + " outside 0..39 at row " +
                                 std::to_string(i));
    }
    PointCloud c;
    c.global_class = labels[i];
    c.source_id = path + "#" + std::to_string(i);
    c.xyz.resize(pts * 3);
    for (size_t j = 0; j < pts * 3; ++j) {
      const float v = raw[i * pts * 3 + j];
      if (!std::isfinite(v)) h5_fail(path, "data", "non-finite coordinate");
      c.xyz[j] = static_cast<double>(v);
    }
    clouds.push_back(std::move(c));
  }
  return clouds;
}

#else  // !POINTCLIMB_HAVE_HDF5

bool hdf5_available() { return false; }

std::vector<PointCloud> load_h5_file(const std::string&) {
  throw std::runtime_error("hdf5 support was not compiled in");
}

#endif

std::vector<PointCloud> load_h5_split(const std::string& root, const std::string& split) {
  if (split != "train" && split != "test") {
    throw std::invalid_argument("load_h5_split: split must be 'train' or 'test'");
  }
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw std::runtime_error("load_h5_split: no such directory: " + root);
  }
  std::vector<std::string> files;
  const std::string prefix = "ply_data_" + split;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && name.size() > 3 &&
        name.substr(name.size() - 3) == ".h5") {
      files.push_back(entry.path().string());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("load_h5_split: no " + prefix + "*.h5 under " + root);
  }
  std::sort(files.begin(), files.end());

  std::vector<PointCloud> all;
  for (const auto& f : files) {
    auto part = load_h5_file(f);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

// ---------------------------------------------------------------------------
// DatasetProvider
// ---------------------------------------------------------------------------

DatasetProvider::DatasetProvider(const Dataset& full, const Scenario& scenario) {
  tasks_.resize(static_cast<size_t>(scenario.num_tasks()));
  std::unordered_map<int, int> class_to_task;
  for (int t = 0; t < scenario.num_tasks(); ++t) {
    for (int c : scenario.tasks[static_cast<size_t>(t)]) class_to_task[c] = t;
  }
  for (const auto& cloud : full.train) {
    const auto it = class_to_task.find(cloud.global_class);
    if (it != class_to_task.end()) tasks_[static_cast<size_t>(it->second)].train.push_back(cloud);
  }
  for (const auto& cloud : full.test) {
    const auto it = class_to_task.find(cloud.global_class);
    if (it != class_to_task.end()) tasks_[static_cast<size_t>(it->second)].test.push_back(cloud);
  }
  for (int t = 0; t < scenario.num_tasks(); ++t) {
    for (int c : scenario.tasks[static_cast<size_t>(t)]) {
      const auto has = [c](const std::vector<PointCloud>& v) {
        return std::any_of(v.begin(), v.end(),
                           [c](const PointCloud& p) { return p.global_class == c; });
      };
      if (!has(tasks_[static_cast<size_t>(t)].train) || !has(tasks_[static_cast<size_t>(t)].test)) {
        throw std::invalid_argument("dataset provider: class " + std::to_string(c) +
                                    " missing from a split");
      }
    }
  }
}

void DatasetProvider::begin_task(int t) {
  if (t < 0 || t >= num_tasks()) throw std::invalid_argument("begin_task: task out of range");
  fence_ = t;
  joint_ = false;
}

void DatasetProvider::begin_joint(int upto) {
  if (upto < 0 || upto >= num_tasks()) throw std::invalid_argument("begin_joint: task out of range");
  fence_ = upto;
  joint_ = true;
}

const std::vector<PointCloud>& DatasetProvider::train(int t) {
  if (t < 0 || t >= num_tasks()) throw std::invalid_argument("train: task out of range");
  log_.push_back({t, joint_});
  const bool allowed = joint_ ? t <= fence_ : t == fence_;
  if (!allowed) {
    throw std::logic_error("train data of task " + std::to_string(t) +
                           " is fenced off (current fence " + std::to_string(fence_) + ")");
  }
  return tasks_[static_cast<size_t>(t)].train;
}

const std::vector<PointCloud>& DatasetProvider::test(int t) const {
  if (t < 0 || t >= num_tasks()) throw std::invalid_argument("test: task out of range");
  return tasks_[static_cast<size_t>(t)].test;
}

}  // namespace pointclimb
