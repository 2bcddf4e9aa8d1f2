#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pointclimb/tensor.hpp"

namespace testutil {

struct GradCheck {
  double max_err = 0.0;   // |analytic - central difference|, scaled
  std::string worst;      // "param <p> elem <i>" of the largest error
};

// Central-difference check of d(loss)/d(param) against the tape gradient.
// build must watch every param in params on the tape it is given and return
// the scalar loss; it is re-invoked after each perturbation. The error is
// |fd - g| / max(1, |fd|, |g|), so it reads as absolute below magnitude 1.
template <typename BuildFn>
GradCheck check_gradients(const std::vector<pointclimb::Param*>& params,
                          BuildFn build, double h = 1e-4) {
  using pointclimb::Tape;

  {
    Tape tape;
    tape.backward(build(tape));
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  GradCheck result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& value = params[pi]->value;
    for (size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + h;
      double up;
      {
        Tape tape;
        up = build(tape).scalar_value();
      }
      value[i] = saved - h;
      double down;
      {
        Tape tape;
        down = build(tape).scalar_value();
      }
      value[i] = saved;

      const double fd = (up - down) / (2.0 * h);
      const double g = analytic[pi][i];
      const double err =
          std::fabs(fd - g) / std::max({1.0, std::fabs(fd), std::fabs(g)});
      if (err > result.max_err) {
        result.max_err = err;
        result.worst = "param " + std::to_string(pi) + " elem " + std::to_string(i);
      }
    }
  }
  return result;
}

}  // namespace testutil
