#include "qgcn/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qgcn/tensor/init.hpp"
#include "qgcn/tensor/ops.hpp"

namespace qgcn::model {

namespace ops = qgcn::tensor;
using tensor::ShapeError;

template <typename T>
Tensor<T> conv(const Tensor<T>& x, const ConvParams<T>& p) {
  return ops::conv2d(x, p.weight, p.bias, p.stride, p.padding);
}

template <typename T>
Tensor<T> residual_block(const Tensor<T>& x, const ResidualBlockParams<T>& p, double res_scale) {
  if (x.rank() != 4 || x.dim(1) != p.conv1.weight.dim(1)) {
    throw ShapeError("residual_block: input " + tensor::to_string(x.shape()) + " does not match block channels " +
                     std::to_string(p.conv1.weight.dim(1)));
  }
  auto body = conv(ops::relu(conv(x, p.conv1)), p.conv2);
  return ops::add(x, ops::scale(body, res_scale));
}

template <typename T>
Tensor<T> residual_group(const Tensor<T>& x, std::span<const ResidualBlockParams<T>> blocks, double res_scale) {
  Tensor<T> h = x;
  for (const auto& b : blocks) h = residual_block(h, b, res_scale);
  return ops::add(h, x);
}

template <typename T>
Tensor<T> global_branch(const Tensor<T>& resized, const GlobalBranchParams<T>& p, int input_size) {
  const auto s = static_cast<std::size_t>(input_size);
  if (resized.rank() != 4 || resized.dim(2) != s || resized.dim(3) != s) {
    throw ShapeError("global_branch: expected N×C×" + std::to_string(s) + "×" + std::to_string(s) + " input, got " +
                     tensor::to_string(resized.shape()));
  }
  Tensor<T> h = resized;
  for (const auto& c : p.convs) h = ops::relu(conv(h, c));
  const std::size_t n = h.dim(0);
  h = h.reshape({n, h.numel() / n});
  h = ops::relu(ops::linear(h, p.fc1.weight, p.fc1.bias));
  return ops::linear(h, p.fc2.weight, p.fc2.bias);
}

template <typename T>
Tensor<T> fuse_global(const Tensor<T>& local, const Tensor<T>& global_vec) {
  if (local.rank() != 4 || global_vec.rank() != 2 || local.dim(0) != global_vec.dim(0)) {
    throw ShapeError("fuse_global: batch mismatch between " + tensor::to_string(local.shape()) + " and " +
                     tensor::to_string(global_vec.shape()));
  }
  return ops::concat_channels(local, ops::tile_spatial(global_vec, local.dim(2), local.dim(3)));
}

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, std::size_t out_h, std::size_t out_w) {
  if (x.rank() != 4 || out_h == 0 || out_w == 0) throw ShapeError("resize_bilinear: expects N×C×H×W and a non-empty target");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  struct Tap {
    std::size_t i0, i1;
    double f;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = double(in) / double(out);
    for (std::size_t o = 0; o < out; ++o) {
      double src = std::max((double(o) + 0.5) * scale - 0.5, 0.0);
      std::size_t i0 = std::min(static_cast<std::size_t>(src), in - 1);
      std::size_t i1 = std::min(i0 + 1, in - 1);
      t[o] = {i0, i1, src - double(i0)};
    }
    return t;
  };
  const auto ty = taps(h, out_h), tx = taps(w, out_w);
  std::vector<T> out(n * c * out_h * out_w);
  const auto in = x.data();
  for (std::size_t p = 0; p < n * c; ++p) {
    const T* src = in.data() + p * h * w;
    T* dst = out.data() + p * out_h * out_w;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      const auto& a = ty[oy];
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const auto& b = tx[ox];
        const double top = src[a.i0 * w + b.i0] * (1 - b.f) + src[a.i0 * w + b.i1] * b.f;
        const double bot = src[a.i1 * w + b.i0] * (1 - b.f) + src[a.i1 * w + b.i1] * b.f;
        dst[oy * out_w + ox] = static_cast<T>(top * (1 - a.f) + bot * a.f);
      }
    }
  }
  return Tensor<T>({n, c, out_h, out_w}, std::move(out), false);
}

template <typename T>
ConvParams<T> QgcnModel<T>::make_conv(const std::string& name, int cin, int cout, int k, int stride, int padding) {
  const auto ucin = static_cast<std::size_t>(cin), ucout = static_cast<std::size_t>(cout),
             uk = static_cast<std::size_t>(k);
  ConvParams<T> p{Tensor<T>::zeros({ucout, ucin, uk, uk}, true), Tensor<T>::zeros({ucout}, true), stride, padding};
  params_.push_back({name + ".weight", p.weight});
  params_.push_back({name + ".bias", p.bias});
  return p;
}

template <typename T>
LinearParams<T> QgcnModel<T>::make_linear(const std::string& name, int in, int out) {
  const auto uin = static_cast<std::size_t>(in), uout = static_cast<std::size_t>(out);
  LinearParams<T> p{Tensor<T>::zeros({uout, uin}, true), Tensor<T>::zeros({uout}, true)};
  params_.push_back({name + ".weight", p.weight});
  params_.push_back({name + ".bias", p.bias});
  return p;
}

template <typename T>
QgcnModel<T>::QgcnModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  const int f = config_.feat_channels;
  head_ = make_conv("head", config_.in_channels, f, 3, 1, 1);
  down_ = make_conv("down", f, f, 3, 2, 1);
  auto make_group = [&](const std::string& prefix, std::vector<ResidualBlockParams<T>>& group) {
    for (int b = 0; b < config_.n_res_per_group; ++b) {
      const std::string base = prefix + ".block" + std::to_string(b);
      ResidualBlockParams<T> blk;
      blk.conv1 = make_conv(base + ".conv1", f, f, 3, 1, 1);
      blk.conv2 = make_conv(base + ".conv2", f, f, 3, 1, 1);
      group.push_back(std::move(blk));
    }
  };
  make_group("group1", group1_);
  if (config_.enable_global_branch) {
    int cin = config_.in_channels;
    for (const auto& s : kGlobalConvStack) {
      global_.convs.push_back(make_conv(std::string("global.") + s.name, cin, s.out_channels, s.kernel, s.stride, s.padding));
      cin = s.out_channels;
    }
    const int side = config_.global_output_size();
    global_.fc1 = make_linear("global.fc1", cin * side * side, kGlobalFc1Width);
    global_.fc2 = make_linear("global.fc2", kGlobalFc1Width, config_.global_vec_dim);
    fusion_ = make_conv("fusion", f + config_.global_vec_dim, f, 3, 1, 1);
  }
  make_group("group2", group2_);
  up_ = make_conv("up", f, 4 * f, 3, 1, 1);
  tail_ = make_conv("tail", f, config_.image_channels(), 3, 1, 1);
}

template <typename T>
void QgcnModel<T>::init_gaussian(double stddev, std::mt19937_64& rng) {
  for (auto& p : params_) {
    if (p.tensor.rank() >= 2) {
      tensor::gaussian_fill(p.tensor, stddev, rng);
    } else {
      std::fill(p.tensor.mutable_data().begin(), p.tensor.mutable_data().end(), T(0));
    }
  }
}

template <typename T>
void QgcnModel<T>::init_fan_in(double gain, std::mt19937_64& rng) {
  for (auto& p : params_) {
    if (p.tensor.rank() >= 2) {
      const double fan_in = double(p.tensor.numel() / p.tensor.dim(0));
      tensor::gaussian_fill(p.tensor, gain / std::sqrt(fan_in), rng);
    } else {
      std::fill(p.tensor.mutable_data().begin(), p.tensor.mutable_data().end(), T(0));
    }
  }
}

template <typename T>
std::vector<Tensor<T>> QgcnModel<T>::parameter_tensors() const {
  std::vector<Tensor<T>> out;
  for (const auto& p : params_) out.push_back(p.tensor);
  return out;
}

template <typename T>
std::size_t QgcnModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

template <typename T>
Tensor<T> QgcnModel<T>::parameter(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

template <typename T>
void QgcnModel<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
Tensor<T> QgcnModel<T>::global_features(const Tensor<T>& input) const {
  if (!config_.enable_global_branch) throw std::logic_error("global branch is disabled in this model");
  const auto s = static_cast<std::size_t>(config_.global_input_size);
  return global_branch(resize_bilinear(input, s, s), global_, config_.global_input_size);
}

template <typename T>
Tensor<T> QgcnModel<T>::forward(const Tensor<T>& image, const Tensor<T>& qmap) const {
  if (image.rank() != 4 || qmap.rank() != 4) throw ShapeError("forward: image and qmap must be N×C×H×W");
  if (image.dim(1) != static_cast<std::size_t>(config_.image_channels()) ||
      qmap.dim(1) != static_cast<std::size_t>(config_.qmap_channels())) {
    throw ShapeError("forward: channel layout " + tensor::to_string(image.shape()) + " + " +
                     tensor::to_string(qmap.shape()) + " does not match a model with in_channels=" +
                     std::to_string(config_.in_channels));
  }
  if (image.dim(0) != qmap.dim(0) || image.dim(2) != qmap.dim(2) || image.dim(3) != qmap.dim(3)) {
    throw ShapeError("forward: image and qmap extents differ");
  }
  if (image.dim(2) % 2 || image.dim(3) % 2) {
    throw ShapeError("forward: spatial extents must be even, got " + tensor::to_string(image.shape()));
  }

  const auto input = ops::concat_channels(image, qmap);
  auto h = ops::relu(conv(input, head_));
  h = ops::relu(conv(h, down_));
  h = residual_group(h, std::span<const ResidualBlockParams<T>>(group1_), config_.res_scale);
  if (config_.enable_global_branch) {
    const auto vec = global_features(input.detach());
    h = ops::relu(conv(fuse_global(h, vec), fusion_));
  }
  h = residual_group(h, std::span<const ResidualBlockParams<T>>(group2_), config_.res_scale);
  h = ops::pixel_shuffle(ops::relu(conv(h, up_)), 2);
  auto out = conv(h, tail_);
  if (config_.global_residual_skip) out = ops::add(out, image);
  return out;
}

template <typename T>
Tensor<T> QgcnModel<T>::infer(const Tensor<T>& image, const Tensor<T>& qmap) const {
  tensor::NoGradGuard guard;
  auto out = forward(image, qmap);
  for (auto& v : out.mutable_data()) v = std::clamp(v, T(0), T(1));
  return out;
}

#define QGCN_INSTANTIATE_MODEL(T)                                                                       \
  template Tensor<T> conv(const Tensor<T>&, const ConvParams<T>&);                                    \
  template Tensor<T> residual_block(const Tensor<T>&, const ResidualBlockParams<T>&, double);         \
  template Tensor<T> residual_group(const Tensor<T>&, std::span<const ResidualBlockParams<T>>, double); \
  template Tensor<T> global_branch(const Tensor<T>&, const GlobalBranchParams<T>&, int);              \
  template Tensor<T> fuse_global(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> resize_bilinear(const Tensor<T>&, std::size_t, std::size_t);                     \
  template class QgcnModel<T>;

QGCN_INSTANTIATE_MODEL(float)
QGCN_INSTANTIATE_MODEL(double)

}  // namespace qgcn::model
