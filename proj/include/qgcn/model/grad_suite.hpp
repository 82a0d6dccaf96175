#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qgcn::model {

struct GradSuiteEntry {
  std::string name;
  double max_rel_error = 0;
  double tolerance = 0;
  std::size_t entries = 0;
  std::string worst;
  bool passed() const { return max_rel_error < tolerance; }
};

inline constexpr double kOpGradTolerance = 1e-4;
inline constexpr double kModelGradTolerance = 1e-3;

// Central finite differences against the tape at double precision for every
// differentiable op, the composite blocks, and an end-to-end toy model on a
// 16×16 input (sampled entries of every parameter tensor).
std::vector<GradSuiteEntry> run_gradient_suite(std::uint64_t seed = 7);

}  // namespace qgcn::model
