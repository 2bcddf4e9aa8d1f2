#include "pointclimb/losses.hpp"

#include <stdexcept>
#include <string>

namespace pointclimb {

namespace {

void require_logit_matrix(const Tensor& t, const char* who) {
  if (t.rank() != 2) {
    throw std::invalid_argument(std::string(who) + " logits must be a rank-2 tensor");
  }
  if (t.dim(0) < 1 || t.dim(1) < 1) {
    throw std::invalid_argument(std::string(who) + " logits must be non-empty");
  }
}

}  // namespace

CensusContext make_census_context(const std::vector<int>& task_sizes, int t,
                                  const DistillConfig& config) {
  if (t < 1 || t >= static_cast<int>(task_sizes.size())) {
    throw std::invalid_argument("census context needs an incremental task index");
  }
  CensusContext ctx;
  if (config.eta_cumulative) {
    int total = 0;
    for (int i = 0; i <= t; ++i) total += task_sizes[i];
    ctx.eta = total;
  } else {
    ctx.eta = task_sizes[t];
  }
  ctx.tasks_elapsed = config.t_current_index ? t + 1 : t;
  return ctx;
}

double census_weight(const CensusContext& ctx) {
  if (ctx.eta < 1) throw std::invalid_argument("census eta must be at least 1");
  if (ctx.tasks_elapsed < 1) {
    throw std::invalid_argument("census tasks_elapsed must be at least 1");
  }
  return static_cast<double>(ctx.eta) * static_cast<double>(ctx.tasks_elapsed);
}

Tensor class_loss(const Tensor& student_logits, const std::vector<int>& labels) {
  require_logit_matrix(student_logits, "student");
  return nll_loss(log_softmax_rows(student_logits, 1.0), labels);
}

Tensor distill_loss(const Tensor& teacher_logits, const Tensor& student_logits, double tau) {
  require_logit_matrix(teacher_logits, "teacher");
  require_logit_matrix(student_logits, "student");
  if (teacher_logits.dim(0) != student_logits.dim(0)) {
    throw std::invalid_argument("teacher and student batch sizes differ");
  }
  const int old_classes = teacher_logits.dim(1);
  if (student_logits.dim(1) < old_classes) {
    throw std::invalid_argument("student has fewer classes than teacher");
  }
  const int n = teacher_logits.dim(0);

  // The student softmax runs over the full head, so novel-class logits stay
  // coupled to the old-class targets through the normalizer. Slicing happens
  // after, not before.
  Tensor teacher_probs = softmax_rows(teacher_logits.detached(), tau);
  Tensor student_log_probs = log_softmax_rows(student_logits, tau);
  Tensor student_old = student_logits.dim(1) == old_classes
                           ? student_log_probs
                           : slice_cols(student_log_probs, 0, old_classes);
  Tensor total = reduce_all_sum(mul(teacher_probs, student_old));
  return scale(total, -1.0 / static_cast<double>(n));
}

Tensor lwf_loss(const Tensor& teacher_logits, const Tensor& student_logits,
                const std::vector<int>& labels, const DistillConfig& config) {
  if (config.lambda_lwf < 0.0) {
    throw std::invalid_argument("lwf lambda must be non-negative");
  }
  Tensor distill = distill_loss(teacher_logits, student_logits, config.tau);
  return add(scale(distill, config.lambda_lwf), class_loss(student_logits, labels));
}

Tensor census_loss(const Tensor& teacher_logits, const Tensor& student_logits,
                   const std::vector<int>& labels, const DistillConfig& config,
                   const CensusContext& ctx) {
  double weight = census_weight(ctx);
  Tensor distill = distill_loss(teacher_logits, student_logits, config.tau);
  return add(class_loss(student_logits, labels), scale(distill, weight));
}

}  // namespace pointclimb
