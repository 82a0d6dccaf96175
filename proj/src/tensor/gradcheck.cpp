#include "qgcn/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace qgcn::tensor {

GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>>& inputs, const GradCheckOptions& options) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& t : inputs) {
    analytic.emplace_back(t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                                       : std::vector<double>(t.numel(), 0.0));
  }

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto& t = inputs[i];
    std::vector<std::size_t> idx;
    if (options.samples_per_input && options.samples_per_input < t.numel()) {
      std::uniform_int_distribution<std::size_t> pick(0, t.numel() - 1);
      std::set<std::size_t> chosen;
      while (chosen.size() < options.samples_per_input) chosen.insert(pick(rng));
      idx.assign(chosen.begin(), chosen.end());
    } else {
      idx.resize(t.numel());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    auto data = t.mutable_data();
    NoGradGuard no_tape;
    for (const std::size_t j : idx) {
      const double saved = data[j];
      data[j] = saved + options.step;
      const double up = loss().item();
      data[j] = saved - options.step;
      const double down = loss().item();
      data[j] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denom_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.entries_checked;
      if (result.worst.empty() || rel > result.max_rel_error) {
        result.max_rel_error = rel;
        std::ostringstream os;
        os.precision(10);
        os << "input[" << i << "] entry " << j << ": analytic " << a << " vs numeric " << numeric;
        result.worst = os.str();
      }
    }
  }
  return result;
}

}  // namespace qgcn::tensor
