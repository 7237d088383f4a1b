#pragma once

#include <cstdint>
#include <vector>

#include "stylehan/gradcheck.hpp"
#include "stylehan/model.hpp"

namespace stylehan {

// Gradient-check fixture: a tiny model (vocab 20, d = 4, Z = {2, 3}, 2
// filters per size, H = 3, 3 sentences × 6 words, C = 2) with every
// parameter jittered away from zero so no relu sits exactly on its kink,
// and a few random documents of both labels.
struct CheckFixture {
  BasicModel<double> model;
  std::vector<TensorizedDocument> docs;
};

ModelConfig gradcheck_config(Mode mode);
CheckFixture make_check_fixture(Mode mode, std::uint64_t seed);

// Full-model finite-difference check of the mean document NLL.
GradCheckReport check_model_gradients(Mode mode, std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace stylehan
