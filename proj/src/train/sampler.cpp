#include "qgcn/train/sampler.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace qgcn::train {

Tensor<float> images_to_tensor(const std::vector<Image8>& images) {
  if (images.empty()) throw std::invalid_argument("images_to_tensor: no images");
  const auto& first = images.front();
  const std::size_t n = images.size(), c = first.channels(), h = first.height(), w = first.width();
  std::vector<float> data(n * c * h * w);
  for (std::size_t i = 0; i < n; ++i) {
    if (!images[i].same_geometry(first)) throw std::invalid_argument("images_to_tensor: mixed image geometry");
    const auto px = images[i].pixels();
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* dst = data.data() + (i * c + ch) * h * w;
      for (std::size_t p = 0; p < h * w; ++p) dst[p] = static_cast<float>(px[p * c + ch]) / 255.0f;
    }
  }
  return Tensor<float>({n, c, h, w}, std::move(data), false);
}

Image8 tensor_to_image(const Tensor<float>& t, std::size_t index, ColorSpace cs) {
  if (t.rank() != 4 || index >= t.dim(0)) throw std::invalid_argument("tensor_to_image: bad tensor or index");
  const std::size_t c = t.dim(1), h = t.dim(2), w = t.dim(3);
  Image8 img(h, w, cs);
  if (img.channels() != c) throw std::invalid_argument("tensor_to_image: channel count does not match colorspace");
  const auto d = t.data();
  auto px = img.pixels();
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* src = d.data() + (index * c + ch) * h * w;
    for (std::size_t p = 0; p < h * w; ++p) px[p * c + ch] = round_to_u8(double(src[p]) * 255.0);
  }
  return img;
}

Tensor<float> qmap_to_tensor(const jpeg::QuantMap& qm) {
  return Tensor<float>({1, qm.planes(), qm.height(), qm.width()}, qm.normalized(), false);
}

Batch sample_batch(const SampleStore& store, const SamplerOptions& opts, std::mt19937_64& rng) {
  if (store.empty()) throw std::invalid_argument("sample_batch: empty sample store");
  if (opts.batch_size == 0 || opts.patch_size == 0) throw std::invalid_argument("sample_batch: zero batch or patch size");
  if (opts.qf_lo < 1 || opts.qf_hi > 100 || opts.qf_lo > opts.qf_hi) {
    throw std::invalid_argument("sample_batch: qf range must satisfy 1 <= lo <= hi <= 100");
  }

  std::uniform_int_distribution<std::size_t> pick(0, store.size() - 1);
  std::uniform_int_distribution<int> pick_qf(opts.qf_lo, opts.qf_hi);
  std::vector<Image8> clean, degraded;
  std::vector<float> qmaps;
  std::size_t k = 0;
  Batch b;
  for (std::size_t i = 0; i < opts.batch_size; ++i) {
    const Image8& src = store.crops[pick(rng)];
    if (src.height() < opts.patch_size || src.width() < opts.patch_size) {
      throw std::invalid_argument("sample_batch: patch larger than stored crops");
    }
    std::uniform_int_distribution<std::size_t> py(0, src.height() - opts.patch_size);
    std::uniform_int_distribution<std::size_t> px(0, src.width() - opts.patch_size);
    const std::size_t y = py(rng);
    const std::size_t x = px(rng);
    const int qf = pick_qf(rng);

    Image8 patch = crop(src, y, x, opts.patch_size, opts.patch_size);
    if (!opts.color) patch = to_gray(patch);
    auto res = sim::compress_simulate(patch, qf, opts.subsampling);
    const auto qm = jpeg::build_qmap(patch.width(), patch.height(), res.luma,
                                     opts.color ? std::optional<jpeg::QuantTable>(res.chroma) : std::nullopt);
    const auto planes = qm.normalized();
    k = qm.planes();
    qmaps.insert(qmaps.end(), planes.begin(), planes.end());
    clean.push_back(std::move(patch));
    degraded.push_back(std::move(res.image));
    b.qfs.push_back(qf);
  }
  b.clean = images_to_tensor(clean);
  b.degraded = images_to_tensor(degraded);
  b.qmap = Tensor<float>({opts.batch_size, k, opts.patch_size, opts.patch_size}, std::move(qmaps), false);
  return b;
}

}  // namespace qgcn::train
