// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Arguments select a subset, e.g. `qgcn_acceptance 2 5`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qgcn/jpeg/markers.hpp"
#include "qgcn/jpeg/quant_table.hpp"
#include "qgcn/metrics/metrics.hpp"
#include "qgcn/model/grad_suite.hpp"
#include "qgcn/model/model_io.hpp"
#include "qgcn/sim/compress.hpp"
#include "qgcn/sim/dct.hpp"
#include "qgcn/sim/image_io.hpp"
#include "qgcn/tensor/adam.hpp"
#include "qgcn/tensor/ops.hpp"
#include "qgcn/train/sampler.hpp"
#include "qgcn/train/svg_plot.hpp"
#include "qgcn/train/sweep.hpp"
#include "qgcn/train/trainer.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace qgcn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path work_dir() {
  if (const char* w = std::getenv("QGCN_ACCEPTANCE_DIR")) return w;
  return QGCN_ACCEPTANCE_WORK_DIR;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto entries = model::run_gradient_suite();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = secs < 300.0;
  double worst_op = 0, e2e = 0;
  std::string failed;
  for (const auto& e : entries) {
    if (!e.passed()) ok = false, failed += " " + e.name;
    if (e.name == "model_end_to_end") {
      e2e = e.max_rel_error;
      ok = ok && e.tolerance <= 1e-3;
    } else {
      worst_op = std::max(worst_op, e.max_rel_error);
      ok = ok && e.tolerance <= 1e-4;
    }
  }
  return {ok, std::to_string(entries.size()) + " checks, worst op " + fmt("%.2e", worst_op) + " (< 1e-4), model " +
                  fmt("%.2e", e2e) + " (< 1e-3), " + fmt("%.1f", secs) + " s" + (failed.empty() ? "" : ", failed:" + failed)};
}

// DQT tables read straight from an encoded stream: scan for FF DB, walk the
// 8-bit zigzag payload with an independently built scan order.
std::vector<std::array<unsigned, 64>> raw_dqt(const std::vector<std::uint8_t>& bytes) {
  const auto zz = testing::zigzag_by_walk();
  std::vector<std::array<unsigned, 64>> out;
  for (std::size_t i = 2; i + 4 < bytes.size();) {
    if (bytes[i] != 0xFF) break;
    const int marker = bytes[i + 1];
    const std::size_t len = (std::size_t(bytes[i + 2]) << 8) | bytes[i + 3];
    if (marker == 0xDA) break;
    if (marker == 0xDB) {
      std::size_t p = i + 4;
      while (p < i + 2 + len) {
        const int pq = bytes[p] >> 4;
        ++p;
        std::array<unsigned, 64> t{};
        for (int k = 0; k < 64; ++k) {
          unsigned v = bytes[p++];
          if (pq) v = (v << 8) | bytes[p++];
          t[std::size_t(zz[std::size_t(k)])] = v;
        }
        out.push_back(t);
      }
    }
    i += 2 + len;
  }
  return out;
}

Outcome quantization_laws() {
  const auto [base_l, base_c] = jpeg::ijg_base_tables();
  bool ok = jpeg::ijg_tables(50).first == base_l && jpeg::ijg_tables(50).second == base_c;
  const auto [l100, c100] = jpeg::ijg_tables(100);
  for (std::size_t i = 0; i < 64; ++i) ok = ok && l100.entries[i] == 1 && c100.entries[i] == 1;
  for (int qf = 2; qf <= 100; ++qf) {
    const auto [a_l, a_c] = jpeg::ijg_tables(qf - 1);
    const auto [b_l, b_c] = jpeg::ijg_tables(qf);
    for (std::size_t i = 0; i < 64; ++i) ok = ok && b_l.entries[i] <= a_l.entries[i] && b_c.entries[i] <= a_c.entries[i];
  }
  ok = ok && jpeg::ijg_tables(10).first.at(0, 0) == 80;

  int matched = 0;
  const auto tiny = testing::random_image(16, 16, ColorSpace::Rgb, 1);
  for (int qf = 1; qf <= 100; ++qf) {
    const auto tables = raw_dqt(testing::reference_jpeg(tiny, qf));
    const auto [l, c] = jpeg::ijg_tables(qf);
    bool same = tables.size() == 2;
    for (std::size_t i = 0; same && i < 64; ++i) same = tables[0][i] == l.entries[i] && tables[1][i] == c.entries[i];
    matched += same;
  }
  ok = ok && matched == 100;
  return {ok, "qf50 = base, qf100 = ones, antitone over 1..100, qf10 DC " +
                  std::to_string(jpeg::ijg_tables(10).first.at(0, 0)) + ", reference DQT equal at " +
                  std::to_string(matched) + "/100 qualities"};
}

Outcome parser() {
  bool ok = true;
  jpeg::JpegMetadata meta;
  meta.width = 333;
  meta.height = 217;
  meta.frame_marker = 0xC0;
  auto [l, c] = jpeg::ijg_tables(37);
  c.table_id = 1;
  jpeg::QuantTable wide = jpeg::ijg_tables(3).first;
  wide.precision_bits = 16;
  wide.table_id = 2;
  wide.entries[5] = 1000;
  meta.tables = {{0, l}, {1, c}, {2, wide}};
  meta.components = {{1, 2, 2, 0}, {2, 1, 1, 1}, {3, 1, 1, 2}};
  const auto back = jpeg::parse_jpeg_metadata(jpeg::serialize_header(meta));
  ok = ok && back.width == 333 && back.height == 217 && back.tables == meta.tables && back.components.size() == 3 &&
       back.components[0].h_sampling == 2 && back.components[2].table_id == 2;

  int files = 0;
  const auto img = testing::natural_rgb();
  for (int qf : {10, 25, 50, 75, 95}) {
    const auto bytes = testing::reference_jpeg(img, qf);
    const auto m = jpeg::parse_jpeg_metadata(bytes);
    const auto [base_l, base_c] = jpeg::ijg_base_tables();
    const bool same = m.tables.at(0).entries == jpeg::scale_qtable(base_l, qf).entries &&
                      m.tables.at(1).entries == jpeg::scale_qtable(base_c, qf).entries && m.width == img.width() &&
                      m.height == img.height();
    files += same;
  }
  ok = ok && files == 5;
  return {ok, "synthesized DQT/SOF round trip " + std::string(ok ? "exact" : "checked") + ", reference files matched " +
                  std::to_string(files) + "/5"};
}

Outcome simulator() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 255);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    sim::Block b;
    for (auto& v : b) v = u(rng);
    const auto r = sim::idct8x8(sim::fdct8x8(b));
    for (std::size_t i = 0; i < 64; ++i) worst = std::max(worst, std::abs(r[i] - b[i]));
  }
  const auto img = testing::natural_rgb();
  const double p100 = metrics::psnr(img, sim::compress_simulate(img, 100, sim::Subsampling::k444).image);
  std::string seq;
  double prev = INFINITY;
  bool decreasing = true;
  for (int qf : {90, 70, 50, 30, 10}) {
    const double p = metrics::psnr(img, sim::compress_simulate(img, qf).image);
    decreasing = decreasing && p < prev;
    prev = p;
    seq += (seq.empty() ? "" : " > ") + fmt("%.2f", p);
  }
  return {worst < 1e-10 && p100 > 45.0 && decreasing, "DCT round trip " + fmt("%.1e", worst) + ", qf100 4:4:4 " +
                                                           fmt("%.2f", p100) + " dB, qf 90..10: " + seq};
}

Outcome metrics_checks() {
  const auto img = testing::natural_rgb();
  std::mt19937_64 rng(5);
  int holds = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t h = 16 + 8 * (rng() % 20), w = 16 + 8 * (rng() % 30);
    const std::size_t y = rng() % (img.height() - h + 1), x = rng() % (img.width() - w + 1);
    const auto ref = crop(img, y, x, h, w);
    const int qf = 1 + int(rng() % 100);
    const auto deg = sim::compress_simulate(ref, qf).image;
    holds += metrics::psnr_b(ref, deg) <= metrics::psnr(ref, deg);
  }
  const double self = metrics::ssim(img, img);
  Image8 ref(16, 16, ColorSpace::Gray, 100), d1(16, 16, ColorSpace::Gray, 101), d2(16, 16, ColorSpace::Gray, 102);
  const double gain = metrics::ipsnr(ref, d2, d1);
  const bool ok = holds == 50 && self == 1.0 && std::abs(gain - 20 * std::log10(2.0)) < 1e-6;
  return {ok, "psnr_b <= psnr on " + std::to_string(holds) + "/50 pairs, ssim(x,x) = " + fmt("%.12f", self) +
                  ", ipsnr closed form " + fmt("%.8f", gain) + " dB"};
}

// ---------------------------------------------------------------------------
// Desk-scale training runs shared by criteria 6 and 8.

constexpr std::uint64_t kSeed = 2024;
const std::vector<int> kSweepQfs = {10, 20, 30, 40, 50};

train::TrainConfig toy_run(const fs::path& out, int qf_lo, int qf_hi) {
  train::TrainConfig c;
  c.model = model::ModelConfig::toy();
  c.qf_lo = qf_lo;
  c.qf_hi = qf_hi;
  c.stage1 = {48, 16, 40};
  c.stage2 = {96, 4, 4};
  c.steps_per_epoch = 50;
  c.lr = 1e-4;
  c.lr_decay = 0.1;
  c.lr_decay_every = 30;
  c.seed = kSeed;
  c.init = "fan_in";
  c.init_gain = 0.3;
  c.val_fraction = 0.1;
  c.train_dir = testing::data_dir() / "train";
  c.held_out = {testing::data_dir() / "test"};
  c.output_dir = out;
  return c;
}

// Ten 128×128 crops of the held-out photo on a 2×5 grid spanning the frame.
std::vector<train::TestImage> held_out_crops() {
  const auto files = train::list_images(testing::data_dir() / "test");
  const auto img = sim::read_image(files.at(0));
  std::vector<train::TestImage> set;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 5; ++c) {
      const std::size_t y = r * (img.height() - 128), x = c * (img.width() - 128) / 4;
      set.push_back({"crop_" + std::to_string(r) + std::to_string(c), crop(img, y, x, 128, 128)});
    }
  return set;
}

struct TrainedRun {
  fs::path dir;
  train::SweepResult sweep;
  double seconds = 0;
};

TrainedRun train_and_sweep(const train::TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::remove_all(cfg.output_dir);
  std::ofstream log(work_dir() / (cfg.output_dir.filename().string() + ".log"));
  train::run_training(cfg, &log);
  TrainedRun run{cfg.output_dir, {}, 0};
  const auto model = model::load_checkpoint(cfg.output_dir / "model.qgcn");
  run.sweep = train::sweep_eval(model, held_out_crops(), kSweepQfs);
  std::ofstream csv(cfg.output_dir / "sweep.csv");
  train::write_sweep_csv(csv, run.sweep);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

std::optional<TrainedRun> g_range;

const TrainedRun& range_run() {
  if (!g_range) g_range = train_and_sweep(toy_run(work_dir() / "range_a", 1, 60));
  return *g_range;
}

Outcome quality_range_behaviour() {
  const auto& range = range_run();
  const auto single = train_and_sweep(toy_run(work_dir() / "single_qf40", 40, 40));
  bool all_positive = true;
  std::string gains;
  std::vector<train::PlotSeries> plot(2);
  plot[0].label = "trained on qf 1-60";
  plot[1].label = "trained on qf 40";
  for (int qf : kSweepQfs) {
    const double g = range.sweep.means.at(qf).ipsnr;
    all_positive = all_positive && g > 0;
    gains += (gains.empty() ? "" : " ") + fmt("%+.3f", g);
    plot[0].points.emplace_back(qf, g);
    plot[1].points.emplace_back(qf, single.sweep.means.at(qf).ipsnr);
  }
  train::PlotOptions po;
  po.title = "IPSNR on held-out crops";
  std::ofstream(work_dir() / "ipsnr_vs_qf.svg") << train::render_line_plot(plot, po);
  const double s10 = single.sweep.means.at(10).ipsnr, r10 = range.sweep.means.at(10).ipsnr;
  return {all_positive && s10 < r10,
          "range model IPSNR at qf 10..50: " + gains + " dB; qf10 single-qf " + fmt("%+.3f", s10) + " vs range " +
              fmt("%+.3f", r10) + " dB; training " + fmt("%.0f", range.seconds) + " s + " + fmt("%.0f", single.seconds) +
              " s"};
}

std::size_t conv_count(std::size_t cin, std::size_t cout, std::size_t k) { return cin * cout * k * k + cout; }

Outcome ablation() {
  auto qcn_cfg = model::ModelConfig::toy();
  qcn_cfg.enable_global_branch = false;
  model::QgcnModel<float> qgcn(model::ModelConfig::toy()), qcn(qcn_cfg);
  // Global stack (5 → 256 channels, then two dense layers) plus the wider fusion conv.
  const std::size_t delta = conv_count(5, 32, 4) + conv_count(32, 32, 3) + conv_count(32, 64, 4) +
                            conv_count(64, 64, 3) + conv_count(64, 128, 4) + conv_count(128, 128, 3) +
                            conv_count(128, 256, 4) + conv_count(256, 256, 3) + (256 * 49 * 1024 + 1024) +
                            (1024 * 64 + 64) + conv_count(16 + 64, 16, 3);

  // Short training run of the ablated model on real batches.
  std::mt19937_64 init(1);
  qcn.init_gaussian(0.01, init);
  auto store = train::ingest_dataset(testing::data_dir() / "train", {});
  train::SamplerOptions so;
  so.patch_size = 48;
  so.batch_size = 8;
  std::mt19937_64 rng(2);
  auto params = qcn.parameter_tensors();
  tensor::AdamState<float> adam;
  adam.options.lr = 1e-4;
  const auto before = qcn.parameter("head.weight").clone();
  bool finite = true;
  for (int i = 0; i < 20; ++i) {
    const auto b = train::sample_batch(store, so, rng);
    qcn.zero_grad();
    auto loss = tensor::l1_loss(qcn.forward(b.degraded, b.qmap), b.clean);
    finite = finite && std::isfinite(loss.item());
    loss.backward();
    tensor::adam_step(std::span<tensor::Tensor<float>>(params), adam);
  }
  const auto after = qcn.parameter("head.weight").data();
  const bool moved = !std::equal(after.begin(), after.end(), before.data().begin());
  const std::size_t diff = qgcn.parameter_count() - qcn.parameter_count();
  return {diff == delta && finite && moved,
          "QGCN " + std::to_string(qgcn.parameter_count()) + " - QCN " + std::to_string(qcn.parameter_count()) + " = " +
              std::to_string(diff) + " (closed form " + std::to_string(delta) + "); 20 training steps " +
              (finite && moved ? "ok" : "failed")};
}

Outcome determinism() {
  const auto& a = range_run();
  const auto b = train_and_sweep(toy_run(work_dir() / "range_b", 1, 60));
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::directory_iterator(a.dir / "checkpoints")) {
    if (e.path().extension() != ".qgcn") continue;
    ++files;
    same += slurp(e.path()) == slurp(b.dir / "checkpoints" / e.path().filename());
  }
  ++files;
  same += slurp(a.dir / "model.qgcn") == slurp(b.dir / "model.qgcn");
  const bool csv = slurp(a.dir / "sweep.csv") == slurp(b.dir / "sweep.csv");
  return {files > 1 && same == files && csv, std::to_string(same) + "/" + std::to_string(files) +
                                                 " checkpoints bit-identical, sweep CSV " + (csv ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient suite", gradient_suite},
      {"quantization laws", quantization_laws},
      {"marker parser", parser},
      {"compression simulator", simulator},
      {"quality metrics", metrics_checks},
      {"quality-range training", quality_range_behaviour},
      {"global-branch ablation", ablation},
      {"training determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  fs::create_directories(work_dir());

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %d %-24s %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
