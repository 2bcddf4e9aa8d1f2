#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pointclimb/sampler.hpp"

namespace pointclimb {

// One labeled cloud. Coordinates are flat row-major n*3.
struct PointCloud {
  std::vector<double> xyz;
  int global_class = -1;
  std::string source_id;

  int num_points() const { return static_cast<int>(xyz.size()) / 3; }
};

// Centers the centroid at the origin and scales the farthest point to radius
// 1. A cloud whose points all coincide is only centered.
std::vector<double> normalize_unit_sphere(std::vector<double> xyz);

// Bijection between global class ids and contiguous logit columns, extended
// in task-arrival order. Existing entries are never remapped.
class LabelMapper {
 public:
  void extend(const std::vector<int>& task_classes);
  int logit(int global_class) const;
  int global_of(int logit_index) const;
  int size() const { return static_cast<int>(slots_.size()); }
  // logit column -> global class id, in assignment order
  const std::vector<int>& slots() const { return slots_; }

 private:
  std::vector<int> slots_;
  std::unordered_map<int, int> to_logit_;
};

// Train and test clouds of a single task; all classes within the task's set.
struct TaskDataset {
  std::vector<PointCloud> train;
  std::vector<PointCloud> test;
};

// A full multi-class dataset before scenario partitioning.
struct Dataset {
  int num_classes = 0;
  std::vector<PointCloud> train;
  std::vector<PointCloud> test;
};

// Parametric shape families (sphere, cube, cylinder, cone, torus, plane,
// helix, cross, bracket, ellipsoid; ids >= 10 are squashed variants) with
// per-sample random rotation, anisotropic scale in [0.8, 1.2] and Gaussian
// jitter sigma 0.01. Deterministic per seed; per-class 80/20 train/test
// split. Supports up to 20 classes.
Dataset generate_synthetic_classes(int num_classes, int samples_per_class,
                                   int n_points, uint64_t seed);

// Loads one HDF5 file holding `data` [num x points x 3] floats and `label`
// [num] ints in 0..39. Errors name the offending field.
std::vector<PointCloud> load_h5_file(const std::string& path);

// Loads every ply_data_<split>*.h5 under root, in sorted order.
// split is "train" or "test".
std::vector<PointCloud> load_h5_split(const std::string& root, const std::string& split);

// Whether HDF5 support was compiled in.
bool hdf5_available();

// Hands tasks' data to the trainer and audits every train-split read, so the
// exemplar-free contract is checkable: in task mode only the fenced task's
// train data is accessible; joint mode (the documented upper-bound
// violation) opens tasks 0..fence. Test splits are always readable, since
// evaluation spans the union of seen tasks.
class DatasetProvider {
 public:
  struct Access {
    int task;
    bool joint_mode;
  };

  DatasetProvider(const Dataset& full, const Scenario& scenario);

  void begin_task(int t);
  void begin_joint(int upto);

  // train split of task t; logs the access and enforces the fence
  const std::vector<PointCloud>& train(int t);
  // test split of task t; unrestricted
  const std::vector<PointCloud>& test(int t) const;

  int num_tasks() const { return static_cast<int>(tasks_.size()); }
  const std::vector<Access>& train_access_log() const { return log_; }

 private:
  std::vector<TaskDataset> tasks_;
  std::vector<Access> log_;
  int fence_ = -1;
  bool joint_ = false;
};

}  // namespace pointclimb
