#include "qgcn/tensor/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qgcn::tensor {

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
  if (state.step == 0 && state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.numel(), T(0));
      state.second_moment.emplace_back(p.numel(), T(0));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state holds " + std::to_string(state.first_moment.size()) +
                     " buffers for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.first_moment[i].size() != params[i].numel() || state.second_moment[i].size() != params[i].numel()) {
      throw ShapeError("adam_step: moment buffer shape mismatch for parameter " + std::to_string(i));
    }
    if (params[i].has_grad()) check_finite<T>(params[i].grad(), "adam_step gradient");
  }

  const auto& o = state.options;
  const std::int64_t t = state.step + 1;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const bool has_grad = p.has_grad();
    const auto g = p.grad();
    auto w = p.mutable_data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = has_grad ? double(g[j]) : 0.0;
      const double mj = o.beta1 * double(m[j]) + (1.0 - o.beta1) * gj;
      const double vj = o.beta2 * double(v[j]) + (1.0 - o.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = o.lr * (mj / bc1) / (std::sqrt(vj / bc2) + o.eps);
      w[j] = static_cast<T>(double(w[j]) - update);
    }
  }
  state.step = t;
}

template void adam_step<float>(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace qgcn::tensor
