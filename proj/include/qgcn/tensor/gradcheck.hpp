#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qgcn/tensor/tensor.hpp"

namespace qgcn::tensor {

struct GradCheckOptions {
  double step = 1e-4;
  // Entries checked per input; 0 means every entry.
  std::size_t samples_per_input = 0;
  std::uint64_t seed = 1;
  // Denominator floor for the relative error, so that two gradients that are
  // both ~0 do not produce a spurious large ratio.
  double denom_floor = 1e-8;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst;  // "input[i] entry j: analytic a vs numeric n"
};

// Compares the tape gradient of `loss` with respect to each tensor in
// `inputs` against central finite differences of the same function. `loss`
// must rebuild its graph on every call and return a single-element tensor.
GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>>& inputs, const GradCheckOptions& options = {});

}  // namespace qgcn::tensor
