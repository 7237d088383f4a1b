#include "stylehan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace stylehan {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

GradCheckReport finite_diff_check(const Objective& objective, BasicParams<double> params,
                                  const GradCheckOptions& options) {
  Gradients<double> sink(params.size());
  const Evaluation base = objective(params, &sink);
  const Evaluation again = objective(params, nullptr);
  if (base.loss != again.loss || base.kinks != again.kinks)
    throw std::runtime_error("gradient check: objective is not deterministic (baseline evaluations differ)");
  const auto analytic = sink.to_full(params);

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (std::size_t p = 0; p < params.size(); ++p) {
    const ParamSpec& spec = params.specs[p];
    if (!spec.trainable) continue;
    auto& values = params.values[p].storage();
    const std::size_t first = spec.table ? spec.shape.back() : 0;  // PAD row is frozen
    if (first >= values.size()) continue;

    std::vector<std::size_t> coords(values.size() - first);
    std::iota(coords.begin(), coords.end(), first);
    if (coords.size() > options.full_check_limit) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.sample_size);
      std::sort(coords.begin(), coords.end());
    }

    GroupReport group{spec.name};
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const std::size_t i = coords[k];
      const double saved = values[i];
      values[i] = saved + options.step;
      const Evaluation plus = objective(params, nullptr);
      values[i] = saved - options.step;
      const Evaluation minus = objective(params, nullptr);
      values[i] = saved;
      if (plus.kinks != base.kinks || minus.kinks != base.kinks) {
        ++group.skipped_kinks;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * options.step);
      double a = analytic[p][i];
      if (group.checked == 0) a += options.corrupt_gradient;
      group.max_rel_error = std::max(group.max_rel_error, relative_error(a, numeric));
      ++group.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.checked += group.checked;
    report.skipped_kinks += group.skipped_kinks;
    report.groups.push_back(std::move(group));
  }
  return report;
}

}  // namespace stylehan
