#include "qgcn/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace qgcn::tensor {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

// Builds the output tensor; when recording, wires `parents` and `fn` into the tape.
template <typename T, typename Fn>
Tensor<T> make_result(Shape shape, std::vector<T> data, const char* op,
                      std::initializer_list<const Tensor<T>*> inputs, Fn fn) {
  check_finite<T>(data, op);
  Tensor<T> out(std::move(shape), std::move(data), false);
  if (any_requires_grad<T>(inputs)) {
    auto& node = *out.node();
    node.requires_grad = true;
    node.op = op;
    for (const auto* t : inputs) {
      node.parents.push_back(t->defined() ? t->node() : nullptr);
    }
    node.backward_fn = std::move(fn);
  }
  return out;
}

// Parent gradient buffer or nullptr when the parent does not take gradients.
template <typename T>
T* grad_of(Node<T>& self, std::size_t i) {
  auto& p = self.parents[i];
  if (!p || !p->requires_grad) return nullptr;
  return p->ensure_grad().data();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

inline constexpr std::size_t kConvChunkColumns = 2048;

struct ConvGeometry {
  std::size_t n, cin, h, w, cout, k, ho, wo;
  int stride, pad;
  std::size_t patch() const { return cin * k * k; }
  std::size_t out_area() const { return ho * wo; }
};

// Samples per GEMM: enough to give small feature maps a wide product.
inline std::size_t conv_chunk(const ConvGeometry& g) {
  return std::max<std::size_t>(1, std::min(g.n, kConvChunkColumns / std::max<std::size_t>(1, g.out_area())));
}

// Output columns [lo, hi) whose input column ox·stride − pad + kx lies inside [0, w).
struct ValidSpan {
  std::size_t lo, hi;
};

inline ValidSpan valid_span(const ConvGeometry& g, std::size_t kx) {
  const long off = static_cast<long>(kx) - g.pad;
  const long s = g.stride;
  long lo = off >= 0 ? 0 : (-off + s - 1) / s;
  long hi = (static_cast<long>(g.w) - 1 - off) / s + 1;
  if (static_cast<long>(g.w) - 1 - off < 0) hi = 0;
  hi = std::min(hi, static_cast<long>(g.wo));
  lo = std::min(lo, hi);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Writes one sample's patches into `cols`, a (cin·k·k) × ld row-major matrix
// whose columns [0, ho·wo) belong to this sample.
template <typename T>
void im2col(const T* img, const ConvGeometry& g, T* cols, std::size_t ld) {
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        T* row = cols + ((c * g.k + ky) * g.k + kx) * ld;
        const auto [lo, hi] = valid_span(g, kx);
        const long off = static_cast<long>(kx) - g.pad;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const long iy = static_cast<long>(oy) * g.stride - g.pad + static_cast<long>(ky);
          T* dst = row + oy * g.wo;
          if (iy < 0 || iy >= static_cast<long>(g.h)) {
            std::fill(dst, dst + g.wo, T(0));
            continue;
          }
          const T* src = img + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          std::fill(dst, dst + lo, T(0));
          if (g.stride == 1) {
            std::copy(src + (static_cast<long>(lo) + off), src + (static_cast<long>(hi) + off), dst + lo);
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) dst[ox] = src[static_cast<long>(ox) * g.stride + off];
          }
          std::fill(dst + hi, dst + g.wo, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, T* img, std::size_t ld) {
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const T* row = cols + ((c * g.k + ky) * g.k + kx) * ld;
        const auto [lo, hi] = valid_span(g, kx);
        const long off = static_cast<long>(kx) - g.pad;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const long iy = static_cast<long>(oy) * g.stride - g.pad + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          T* dst = img + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          const T* src = row + oy * g.wo;
          for (std::size_t ox = lo; ox < hi; ++ox) dst[static_cast<long>(ox) * g.stride + off] += src[ox];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                 int padding) {
  require(stride > 0, "conv2d: stride must be positive");
  require(padding >= 0, "conv2d: padding must be non-negative");
  require(input.rank() == 4, "conv2d: input must be N×C×H×W, got " + to_string(input.shape()));
  require(weight.rank() == 4 && weight.dim(2) == weight.dim(3),
          "conv2d: weight must be Cout×Cin×k×k, got " + to_string(weight.shape()));
  require(weight.dim(1) == input.dim(1), "conv2d: input channels " + std::to_string(input.dim(1)) +
                                             " do not match weight " + to_string(weight.shape()));
  ConvGeometry g{};
  g.n = input.dim(0);
  g.cin = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.cout = weight.dim(0);
  g.k = weight.dim(2);
  g.stride = stride;
  g.pad = padding;
  require(g.h + 2 * padding >= g.k && g.w + 2 * padding >= g.k,
          "conv2d: kernel larger than padded input " + to_string(input.shape()));
  if (bias.defined()) {
    require(bias.numel() == g.cout, "conv2d: bias length does not match output channels");
  }
  g.ho = (g.h + 2 * padding - g.k) / stride + 1;
  g.wo = (g.w + 2 * padding - g.k) / stride + 1;

  // Samples are processed in chunks whose patches share one GEMM: columns of
  // `cols` are grouped by sample, so each product is Cout × (chunk·area).
  const auto area = g.out_area();
  const auto chunk = conv_chunk(g);
  const auto in_plane = g.cin * g.h * g.w;
  const auto out_plane = g.cout * area;
  std::vector<T> out(g.n * out_plane);
  std::vector<T> cols(g.patch() * chunk * area);
  RowMatrix<T> prod;
  ConstMatMap<T> wmat(weight.data().data(), g.cout, g.patch());
  for (std::size_t n0 = 0; n0 < g.n; n0 += chunk) {
    const std::size_t m = std::min(chunk, g.n - n0), ld = m * area;
    for (std::size_t i = 0; i < m; ++i) {
      im2col(input.data().data() + (n0 + i) * in_plane, g, cols.data() + i * area, ld);
    }
    prod.noalias() = wmat * ConstMatMap<T>(cols.data(), g.patch(), ld);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < g.cout; ++c) {
        const T b = bias.defined() ? bias.data()[c] : T(0);
        const T* src = prod.data() + c * ld + i * area;
        T* dst = out.data() + (n0 + i) * out_plane + c * area;
        for (std::size_t j = 0; j < area; ++j) dst[j] = src[j] + b;
      }
    }
  }

  auto in_node = input.node();
  auto w_node = weight.node();
  return make_result<T>(
      {g.n, g.cout, g.ho, g.wo}, std::move(out), "conv2d", {&input, &weight, &bias},
      [g, in_node, w_node](Node<T>& self) {
        const auto area = g.out_area();
        const auto chunk = conv_chunk(g);
        const auto in_plane = g.cin * g.h * g.w;
        const auto out_plane = g.cout * area;
        T* gx = grad_of(self, 0);
        T* gw = grad_of(self, 1);
        T* gb = grad_of(self, 2);
        RowMatrix<T> gout, dcols;
        std::vector<T> cols(gw ? g.patch() * chunk * area : 0);
        ConstMatMap<T> wmat(w_node->data.data(), g.cout, g.patch());
        for (std::size_t n0 = 0; n0 < g.n; n0 += chunk) {
          const std::size_t m = std::min(chunk, g.n - n0), ld = m * area;
          gout.resize(static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(ld));
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t c = 0; c < g.cout; ++c) {
              const T* src = self.grad.data() + (n0 + i) * out_plane + c * area;
              std::copy(src, src + area, gout.data() + c * ld + i * area);
            }
          }
          if (gb) {
            for (std::size_t c = 0; c < g.cout; ++c) gb[c] += gout.row(static_cast<Eigen::Index>(c)).sum();
          }
          if (gw) {
            for (std::size_t i = 0; i < m; ++i) {
              im2col(in_node->data.data() + (n0 + i) * in_plane, g, cols.data() + i * area, ld);
            }
            MatMap<T>(gw, g.cout, g.patch()).noalias() +=
                gout * ConstMatMap<T>(cols.data(), g.patch(), ld).transpose();
          }
          if (gx) {
            dcols.noalias() = wmat.transpose() * gout;
            for (std::size_t i = 0; i < m; ++i) {
              col2im_add(dcols.data() + i * area, g, gx + (n0 + i) * in_plane, ld);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v < T(0) ? T(0) : v;  // NaN passes through to the finiteness check
  return make_result<T>(x.shape(), std::move(out), "relu", {&x}, [](Node<T>& self) {
    T* gx = grad_of(self, 0);
    const auto& in = self.parents[0]->data;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i] > T(0)) gx[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(),
          "add: shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), "add", {&a, &b}, [](Node<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (T* g = grad_of(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, double factor) {
  const T f = static_cast<T>(factor);
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= f;
  return make_result<T>(x.shape(), std::move(out), "scale", {&x}, [f](Node<T>& self) {
    T* gx = grad_of(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += f * self.grad[i];
  });
}

namespace {

// Index into the N×(C·r²)×H×W tensor for output element (n, c, oy, ox) of
// the N×C×rH×rW tensor.
struct ShuffleIndex {
  std::size_t n, c, h, w, r;
  std::size_t low(std::size_t in, std::size_t ic, std::size_t oy, std::size_t ox) const {
    const std::size_t sub = (oy % r) * r + (ox % r);
    return ((in * c * r * r + ic * r * r + sub) * h + oy / r) * w + ox / r;
  }
};

template <typename T>
void for_each_shuffle(const ShuffleIndex& s, T&& visit) {
  std::size_t hi = 0;
  for (std::size_t in = 0; in < s.n; ++in) {
    for (std::size_t ic = 0; ic < s.c; ++ic) {
      for (std::size_t oy = 0; oy < s.h * s.r; ++oy) {
        for (std::size_t ox = 0; ox < s.w * s.r; ++ox) visit(hi++, s.low(in, ic, oy, ox));
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r) {
  require(r > 0, "pixel_shuffle: factor must be positive");
  require(x.rank() == 4, "pixel_shuffle: input must be N×C×H×W");
  const auto rr = static_cast<std::size_t>(r);
  require(x.dim(1) % (rr * rr) == 0, "pixel_shuffle: channels " + std::to_string(x.dim(1)) +
                                         " not divisible by " + std::to_string(rr * rr));
  const ShuffleIndex s{x.dim(0), x.dim(1) / (rr * rr), x.dim(2), x.dim(3), rr};
  std::vector<T> out(x.numel());
  const auto in = x.data();
  for_each_shuffle(s, [&](std::size_t hi, std::size_t lo) { out[hi] = in[lo]; });
  return make_result<T>({s.n, s.c, s.h * rr, s.w * rr}, std::move(out), "pixel_shuffle", {&x},
                        [s](Node<T>& self) {
                          T* gx = grad_of(self, 0);
                          for_each_shuffle(s, [&](std::size_t hi, std::size_t lo) { gx[lo] += self.grad[hi]; });
                        });
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int r) {
  require(r > 0, "pixel_unshuffle: factor must be positive");
  require(x.rank() == 4, "pixel_unshuffle: input must be N×C×H×W");
  const auto rr = static_cast<std::size_t>(r);
  require(x.dim(2) % rr == 0 && x.dim(3) % rr == 0, "pixel_unshuffle: extents not divisible by factor");
  const ShuffleIndex s{x.dim(0), x.dim(1), x.dim(2) / rr, x.dim(3) / rr, rr};
  std::vector<T> out(x.numel());
  const auto in = x.data();
  for_each_shuffle(s, [&](std::size_t hi, std::size_t lo) { out[lo] = in[hi]; });
  return make_result<T>({s.n, s.c * rr * rr, s.h, s.w}, std::move(out), "pixel_unshuffle", {&x},
                        [s](Node<T>& self) {
                          T* gx = grad_of(self, 0);
                          for_each_shuffle(s, [&](std::size_t hi, std::size_t lo) { gx[hi] += self.grad[lo]; });
                        });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require(input.rank() >= 1, "linear: empty input");
  require(weight.rank() == 2, "linear: weight must be Out×In, got " + to_string(weight.shape()));
  const std::size_t n = input.rank() == 1 ? 1 : input.dim(0);
  const std::size_t in = input.numel() / std::max<std::size_t>(n, 1);
  const std::size_t out_dim = weight.dim(0);
  require(weight.dim(1) == in, "linear: input length " + std::to_string(in) + " does not match weight " +
                                   to_string(weight.shape()));
  if (bias.defined()) require(bias.numel() == out_dim, "linear: bias length mismatch");

  std::vector<T> out(n * out_dim);
  ConstMatMap<T> x(input.data().data(), n, in);
  ConstMatMap<T> wm(weight.data().data(), out_dim, in);
  MatMap<T> om(out.data(), n, out_dim);
  om.noalias() = x * wm.transpose();
  if (bias.defined()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < out_dim; ++o) om(i, o) += bias.data()[o];
    }
  }
  return make_result<T>({n, out_dim}, std::move(out), "linear", {&input, &weight, &bias},
                        [n, in, out_dim](Node<T>& self) {
                          ConstMatMap<T> gout(self.grad.data(), n, out_dim);
                          if (T* gx = grad_of(self, 0)) {
                            ConstMatMap<T> wm(self.parents[1]->data.data(), out_dim, in);
                            MatMap<T>(gx, n, in).noalias() += gout * wm;
                          }
                          if (T* gw = grad_of(self, 1)) {
                            ConstMatMap<T> x(self.parents[0]->data.data(), n, in);
                            MatMap<T>(gw, out_dim, in).noalias() += gout.transpose() * x;
                          }
                          if (T* gb = grad_of(self, 2)) {
                            for (std::size_t o = 0; o < out_dim; ++o) gb[o] += gout.col(o).sum();
                          }
                        });
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require(pred.shape() == target.shape(),
          "l1_loss: shape mismatch " + to_string(pred.shape()) + " vs " + to_string(target.shape()));
  require(pred.numel() > 0, "l1_loss: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.numel(); ++i) sum += std::abs(double(pred.data()[i]) - double(target.data()[i]));
  const double count = static_cast<double>(pred.numel());
  return make_result<T>({1}, {static_cast<T>(sum / count)}, "l1_loss", {&pred, &target},
                        [count](Node<T>& self) {
                          const auto& p = self.parents[0]->data;
                          const auto& t = self.parents[1]->data;
                          const T g = static_cast<T>(double(self.grad[0]) / count);
                          T* gp = grad_of(self, 0);
                          T* gt = grad_of(self, 1);
                          for (std::size_t i = 0; i < p.size(); ++i) {
                            const T s = p[i] > t[i] ? g : (p[i] < t[i] ? -g : T(0));
                            if (gp) gp[i] += s;
                            if (gt) gt[i] -= s;
                          }
                        });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.rank() == 4 && b.rank() == 4, "concat_channels: inputs must be N×C×H×W");
  require(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
          "concat_channels: mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  const std::size_t plane = a.dim(2) * a.dim(3);
  std::vector<T> out(n * (ca + cb) * plane);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data().data() + i * ca * plane, ca * plane, out.data() + i * (ca + cb) * plane);
    std::copy_n(b.data().data() + i * cb * plane, cb * plane, out.data() + (i * (ca + cb) + ca) * plane);
  }
  return make_result<T>({n, ca + cb, a.dim(2), a.dim(3)}, std::move(out), "concat_channels", {&a, &b},
                        [n, ca, cb, plane](Node<T>& self) {
                          T* ga = grad_of(self, 0);
                          T* gb = grad_of(self, 1);
                          for (std::size_t i = 0; i < n; ++i) {
                            const T* src = self.grad.data() + i * (ca + cb) * plane;
                            if (ga) {
                              for (std::size_t j = 0; j < ca * plane; ++j) ga[i * ca * plane + j] += src[j];
                            }
                            if (gb) {
                              for (std::size_t j = 0; j < cb * plane; ++j) gb[i * cb * plane + j] += src[ca * plane + j];
                            }
                          }
                        });
}

template <typename T>
Tensor<T> tile_spatial(const Tensor<T>& v, std::size_t h, std::size_t w) {
  require(v.rank() == 2, "tile_spatial: vector input must be N×C, got " + to_string(v.shape()));
  const std::size_t n = v.dim(0), c = v.dim(1), plane = h * w;
  std::vector<T> out(n * c * plane);
  for (std::size_t i = 0; i < n * c; ++i) std::fill_n(out.data() + i * plane, plane, v.data()[i]);
  return make_result<T>({n, c, h, w}, std::move(out), "tile_spatial", {&v}, [n, c, plane](Node<T>& self) {
    T* gv = grad_of(self, 0);
    for (std::size_t i = 0; i < n * c; ++i) {
      T s = 0;
      for (std::size_t j = 0; j < plane; ++j) s += self.grad[i * plane + j];
      gv[i] += s;
    }
  });
}

#define QGCN_INSTANTIATE_OPS(T)                                                                  \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);    \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, double);                                            \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, int);                                       \
  template Tensor<T> pixel_unshuffle(const Tensor<T>&, int);                                     \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> tile_spatial(const Tensor<T>&, std::size_t, std::size_t);

QGCN_INSTANTIATE_OPS(float)
QGCN_INSTANTIATE_OPS(double)

}  // namespace qgcn::tensor
