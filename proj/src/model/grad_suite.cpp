#include "qgcn/model/grad_suite.hpp"

#include <cmath>
#include <random>

#include "qgcn/model/network.hpp"
#include "qgcn/tensor/gradcheck.hpp"
#include "qgcn/tensor/init.hpp"
#include "qgcn/tensor/ops.hpp"

namespace qgcn::model {

namespace {

using T = tensor::Tensor<double>;
using tensor::Shape;
namespace ops = qgcn::tensor;

T rand_tensor(const Shape& shape, std::mt19937_64& rng, double stddev = 1.0) {
  return tensor::gaussian_init<double>(shape, stddev, rng, true);
}

// Entries with magnitude in [0.1, 1] and random sign, keeping ReLU/L1 kinks
// far from the finite-difference step.
T away_from_zero(const Shape& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(tensor::numel(shape));
  for (auto& x : v) x = sign(rng) ? mag(rng) : -mag(rng);
  return T(shape, std::move(v), true);
}

// Fixed random linear functional: turns any tensor into a smooth scalar.
struct Projection {
  T weight, bias;
  Projection(std::size_t n, std::mt19937_64& rng)
      : weight(tensor::gaussian_init<double>({1, n}, 1.0, rng, false)), bias(T::zeros({1}, false)) {}
  T operator()(const T& t) const { return ops::linear(t.reshape({1, t.numel()}), weight, bias).reshape({1}); }
};

GradSuiteEntry run(const std::string& name, const std::function<T()>& loss, std::vector<T> inputs, double tol,
                   tensor::GradCheckOptions opts = {}) {
  const auto r = tensor::check_gradients(loss, inputs, opts);
  return {name, r.max_rel_error, tol, r.entries_checked, r.worst};
}

ConvParams<double> rand_conv(int cin, int cout, int k, int stride, int pad, std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(double(cin * k * k));
  return {rand_tensor({std::size_t(cout), std::size_t(cin), std::size_t(k), std::size_t(k)}, rng, s),
          rand_tensor({std::size_t(cout)}, rng, 0.1), stride, pad};
}

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradSuiteEntry> out;
  const double tol = kOpGradTolerance;

  {
    T x = rand_tensor({2, 5, 8, 8}, rng), w = rand_tensor({64, 5, 3, 3}, rng, 0.3), b = rand_tensor({64}, rng);
    Projection p(2 * 64 * 4 * 4, rng);
    out.push_back(run("conv2d", [&] { return p(ops::conv2d(x, w, b, 2, 1)); }, {x, w, b}, tol));
  }
  {
    T x = rand_tensor({1, 3, 5, 5}, rng), w = rand_tensor({4, 3, 3, 3}, rng), b = rand_tensor({4}, rng);
    Projection p(4 * 5 * 5, rng);
    out.push_back(run("conv2d_same", [&] { return p(ops::conv2d(x, w, b, 1, 1)); }, {x, w, b}, tol));
  }
  {
    T x = away_from_zero({2, 3, 4, 4}, rng);
    Projection p(x.numel(), rng);
    out.push_back(run("relu", [&] { return p(ops::relu(x)); }, {x}, tol));
  }
  {
    T a = rand_tensor({2, 3, 4, 4}, rng), b = away_from_zero({2, 3, 4, 4}, rng);
    Projection p(a.numel(), rng);
    out.push_back(run("add", [&] { return p(ops::add(a, ops::relu(b))); }, {a, b}, tol));
  }
  {
    T x = rand_tensor({2, 3, 4, 4}, rng);
    Projection p(x.numel(), rng);
    out.push_back(run("scale", [&] { return p(ops::scale(x, 0.1)); }, {x}, tol));
  }
  {
    T x = rand_tensor({2, 8, 3, 3}, rng);
    Projection p(x.numel(), rng);
    out.push_back(run("pixel_shuffle", [&] { return p(ops::pixel_shuffle(x, 2)); }, {x}, tol));
    out.push_back(run("pixel_unshuffle", [&] { return p(ops::pixel_unshuffle(x.reshape({2, 2, 6, 6}), 2)); }, {x}, tol));
  }
  {
    T x = rand_tensor({3, 8}, rng), w = rand_tensor({4, 8}, rng), b = rand_tensor({4}, rng);
    Projection p(12, rng);
    out.push_back(run("linear", [&] { return p(ops::linear(x, w, b)); }, {x, w, b}, tol));
  }
  {
    T target = rand_tensor({2, 3, 4, 4}, rng, 1.0);
    T offset = away_from_zero({2, 3, 4, 4}, rng);
    T pred(target.shape(), std::vector<double>(target.numel()), true);
    for (std::size_t i = 0; i < pred.numel(); ++i) pred.mutable_data()[i] = target.data()[i] + offset.data()[i];
    out.push_back(run("l1_loss", [&] { return ops::l1_loss(pred, target); }, {pred, target}, tol));
  }
  {
    T a = rand_tensor({2, 3, 4, 4}, rng), b = rand_tensor({2, 2, 4, 4}, rng);
    Projection p(2 * 5 * 16, rng);
    out.push_back(run("concat_channels", [&] { return p(ops::concat_channels(a, b)); }, {a, b}, tol));
  }
  {
    T v = rand_tensor({2, 3}, rng);
    Projection p(2 * 3 * 5 * 4, rng);
    out.push_back(run("tile_spatial", [&] { return p(ops::tile_spatial(v, 5, 4)); }, {v}, tol));
  }
  {
    T local = rand_tensor({2, 4, 3, 3}, rng), vec = rand_tensor({2, 6}, rng);
    Projection p(2 * 10 * 9, rng);
    out.push_back(run("fuse_global", [&] { return p(fuse_global(local, vec)); }, {local, vec}, tol));
  }
  {
    ResidualBlockParams<double> blk{rand_conv(4, 4, 3, 1, 1, rng), rand_conv(4, 4, 3, 1, 1, rng)};
    T x = rand_tensor({2, 4, 6, 6}, rng);
    Projection p(x.numel(), rng);
    out.push_back(run("residual_block", [&] { return p(residual_block(x, blk, 0.1)); },
                      {x, blk.conv1.weight, blk.conv1.bias, blk.conv2.weight, blk.conv2.bias}, tol));
    std::vector<ResidualBlockParams<double>> group{blk, {rand_conv(4, 4, 3, 1, 1, rng), rand_conv(4, 4, 3, 1, 1, rng)}};
    out.push_back(run("residual_group",
                      [&] { return p(residual_group(x, std::span<const ResidualBlockParams<double>>(group), 0.1)); },
                      {x, group[1].conv1.weight, group[1].conv2.bias}, tol));
  }

  {
    // End to end on the toy color network. Weights get fan-in scaled init so
    // every layer carries a gradient well above round-off; the image input is
    // left out because its path into the global branch is detached by design.
    QgcnModel<double> model(ModelConfig::toy(true));
    for (auto& p : model.parameters()) {
      const double fan_in = p.tensor.rank() >= 2 ? double(p.tensor.numel() / p.tensor.dim(0)) : 0.0;
      tensor::gaussian_fill(p.tensor, fan_in > 0 ? 1.0 / std::sqrt(fan_in) : 0.1, rng);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> img(3 * 16 * 16), qm(2 * 16 * 16);
    for (auto& v : img) v = u(rng);
    for (auto& v : qm) v = u(rng);
    T image({1, 3, 16, 16}, img, false), qmap({1, 2, 16, 16}, qm, false);
    Projection proj(3 * 16 * 16, rng);
    tensor::GradCheckOptions opts;
    opts.step = 1e-5;
    opts.samples_per_input = 3;
    opts.seed = seed;
    out.push_back(run("model_end_to_end", [&] { return proj(model.forward(image, qmap)); }, model.parameter_tensors(),
                      kModelGradTolerance, opts));
  }
  return out;
}

}  // namespace qgcn::model
