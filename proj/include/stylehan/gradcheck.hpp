#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stylehan/params.hpp"

namespace stylehan {

struct Evaluation {
  double loss = 0.0;
  std::uint64_t kinks = 0;  // Graph::kink_signature() of the evaluation
};

// Evaluates a scalar objective in 64-bit. When `sink` is non-null the
// objective must also run backward into it.
using Objective = std::function<Evaluation(const BasicParams<double>&, Gradients<double>* sink)>;

struct GradCheckOptions {
  double step = 1e-3;
  // Groups with more trainable coordinates than this are sampled.
  std::size_t full_check_limit = 1000;
  std::size_t sample_size = 200;
  std::uint64_t seed = 0;
  // Test hook: added to the first checked analytic coordinate of every group.
  double corrupt_gradient = 0.0;
};

struct GroupReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GroupReport> groups;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;

  bool passed(double tolerance) const { return checked > 0 && max_rel_error < tolerance; }
};

double relative_error(double analytic, double numeric);

// Compares the objective's analytic gradient against central differences
// (f(θ+h) − f(θ−h)) / 2h. Coordinates whose perturbation changes a branch
// decision (relu sign, argmax, probability clamp) are skipped and counted.
// Throws std::runtime_error when two baseline evaluations disagree.
GradCheckReport finite_diff_check(const Objective& objective, BasicParams<double> params,
                                  const GradCheckOptions& options = {});

}  // namespace stylehan
