#pragma once

#include <vector>

#include "pointclimb/tensor.hpp"

namespace pointclimb {

enum class LossKind { Joint, Ft, Lwf, Census };

struct DistillConfig {
  double tau = 2.0;
  double lambda_lwf = 1.0;
  LossKind loss_kind = LossKind::Ft;
  // ambiguity toggles: eta as cumulative class count instead of the current
  // task's, and T as the 1-based current task number instead of tasks
  // completed before it
  bool eta_cumulative = false;
  bool t_current_index = false;
};

// Weighting inputs of the census objective for one incremental task.
struct CensusContext {
  int eta = 0;           // class count of the current task
  int tasks_elapsed = 0; // completed tasks before it, base task included
};

// Derives the context for 0-based task index t (t >= 1; the base task has no
// distillation) under the config's eta/T interpretation.
CensusContext make_census_context(const std::vector<int>& task_sizes, int t,
                                  const DistillConfig& config);

double census_weight(const CensusContext& ctx);

// Mean cross-entropy of softmax(student_logits) against the labels, at
// temperature 1.
Tensor class_loss(const Tensor& student_logits, const std::vector<int>& labels);

// Soft cross-entropy between the temperature-softened teacher distribution
// and the student's full-head softmax restricted to the teacher's classes
// (the first teacher-width columns). Novel columns sit in the normalizer, so
// mass they claim raises the loss. The teacher side is detached: no gradient
// ever reaches it.
Tensor distill_loss(const Tensor& teacher_logits, const Tensor& student_logits, double tau);

// lambda * distill + class.
Tensor lwf_loss(const Tensor& teacher_logits, const Tensor& student_logits,
                const std::vector<int>& labels, const DistillConfig& config);

// class + (eta * T) * distill.
Tensor census_loss(const Tensor& teacher_logits, const Tensor& student_logits,
                   const std::vector<int>& labels, const DistillConfig& config,
                   const CensusContext& ctx);

}  // namespace pointclimb
