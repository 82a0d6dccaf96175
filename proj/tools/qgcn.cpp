// qgcn: command-line front end for quantization tables, the JPEG simulator,
// quality metrics and the restoration network.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qgcn/jpeg/markers.hpp"
#include "qgcn/jpeg/quant_map.hpp"
#include "qgcn/jpeg/quant_table.hpp"
#include "qgcn/metrics/metrics.hpp"
#include "qgcn/model/grad_suite.hpp"
#include "qgcn/model/model_io.hpp"
#include "qgcn/sim/compress.hpp"
#include "qgcn/sim/image_io.hpp"
#include "qgcn/tensor/checkpoint.hpp"
#include "qgcn/train/sweep.hpp"
#include "qgcn/train/svg_plot.hpp"
#include "qgcn/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qgcn;

namespace {

// Failure reported to the user as one JSON line on stderr.
struct CliError : std::runtime_error {
  std::string kind;
  CliError(std::string k, const std::string& msg) : std::runtime_error(msg), kind(std::move(k)) {}
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", one_line(message)}}}}.dump() << std::endl;
  return code;
}

json table_json(const jpeg::QuantTable& t) {
  json rows = json::array();
  for (int r = 0; r < 8; ++r) {
    json row = json::array();
    for (int c = 0; c < 8; ++c) row.push_back(t.at(r, c));
    rows.push_back(row);
  }
  return {{"id", t.table_id}, {"precision", t.precision_bits}, {"entries", rows}};
}

void print_tables_csv(std::ostream& out, const std::vector<jpeg::QuantTable>& tables) {
  out << "table,row,c0,c1,c2,c3,c4,c5,c6,c7\n";
  for (const auto& t : tables) {
    for (int r = 0; r < 8; ++r) {
      out << t.table_id << ',' << r;
      for (int c = 0; c < 8; ++c) out << ',' << t.at(r, c);
      out << '\n';
    }
  }
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CliError("io", "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

jpeg::JpegMetadata inspect_file(const fs::path& p) {
  const auto bytes = read_bytes(p);
  return jpeg::parse_jpeg_metadata(bytes);
}

const char* frame_name(std::uint8_t marker) {
  switch (marker) {
    case 0xC0: return "baseline";
    case 0xC1: return "extended";
    case 0xC2: return "progressive";
    case 0xC3: return "lossless";
    default: return "other";
  }
}

json metadata_json(const jpeg::JpegMetadata& m) {
  json comps = json::array(), tables = json::array();
  for (const auto& c : m.components) {
    comps.push_back({{"id", c.id}, {"h_sampling", c.h_sampling}, {"v_sampling", c.v_sampling}, {"table_id", c.table_id}});
  }
  for (const auto& [id, t] : m.tables) tables.push_back(table_json(t));
  char marker[8];
  std::snprintf(marker, sizeof marker, "0x%02X", m.frame_marker);
  return {{"width", m.width},
          {"height", m.height},
          {"sample_precision", m.sample_precision},
          {"frame_marker", marker},
          {"frame_type", frame_name(m.frame_marker)},
          {"progressive", m.progressive()},
          {"components", comps},
          {"tables", tables}};
}

json db_json(double v) { return std::isinf(v) ? metrics::kPsnrSentinel : v; }

json report_json(const metrics::QualityReport& r) {
  json j = {{"psnr", db_json(r.psnr)},
            {"exact_match", std::isinf(r.psnr)},
            {"ssim", r.ssim},
            {"psnr_b", db_json(r.psnr_b)}};
  if (r.ipsnr) j["ipsnr"] = db_json(*r.ipsnr);
  return j;
}

metrics::Channels parse_channels(const std::string& s) {
  if (s == "all") return metrics::Channels::All;
  if (s == "luma") return metrics::Channels::Luma;
  throw CliError("usage", "--channels must be all or luma");
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("io", "cannot write " + p.string());
  out << text;
}

// Tables for restore/qmap: parsed from a JPEG, or the standard pair at a qf.
std::pair<jpeg::QuantTable, std::optional<jpeg::QuantTable>> tables_from(const std::optional<int>& qf,
                                                                         const std::string& jpeg_path) {
  if (!jpeg_path.empty()) return inspect_file(jpeg_path).luma_chroma();
  if (!qf) throw CliError("usage", "one of --qf or --jpeg is required");
  auto [l, c] = jpeg::ijg_tables(*qf);
  return {l, c};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JPEG artifact removal with quantization-table conditioning"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  app.add_option("--format", format, "Tabular output format")->check(CLI::IsMember({"json", "csv"}));

  // qtable
  auto* qtable = app.add_subcommand("qtable", "Print the IJG-scaled luma and chroma tables");
  int qt_qf = 50;
  qtable->add_option("--qf", qt_qf, "Quality factor")->required()->check(CLI::Range(1, 100));

  // qmap
  auto* qmap = app.add_subcommand("qmap", "Write quantization-map planes");
  std::optional<int> qm_qf;
  std::string qm_jpeg, qm_out;
  std::size_t qm_w = 0, qm_h = 0;
  bool qm_gray = false;
  qmap->add_option("--qf", qm_qf, "Quality factor")->check(CLI::Range(1, 100));
  qmap->add_option("--jpeg", qm_jpeg, "Take tables (and default size) from this JPEG")->check(CLI::ExistingFile);
  qmap->add_option("--width", qm_w, "Map width");
  qmap->add_option("--height", qm_h, "Map height");
  qmap->add_flag("--gray", qm_gray, "Single luma plane");
  qmap->add_option("output", qm_out, "Output prefix; writes PREFIX_luma.png [PREFIX_chroma.png], or a .json file")
      ->required();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print JPEG frame header and quantization tables");
  std::string in_path;
  inspect->add_option("file", in_path, "JPEG file")->required()->check(CLI::ExistingFile);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Apply simulated JPEG compression");
  int sim_qf = 0;
  std::string sim_in, sim_out, sim_sub = "420";
  bool sim_gray = false;
  simulate->add_option("--qf", sim_qf, "Quality factor")->required()->check(CLI::Range(1, 100));
  simulate->add_option("--subsampling", sim_sub, "Chroma subsampling")->check(CLI::IsMember({"420", "444"}));
  simulate->add_flag("--gray", sim_gray, "Convert to grayscale first");
  simulate->add_option("input", sim_in)->required()->check(CLI::ExistingFile);
  simulate->add_option("output", sim_out)->required();

  // metrics
  auto* metr = app.add_subcommand("metrics", "Score TEST against REF");
  std::string m_ref, m_test, m_deg, m_channels = "all";
  metr->add_option("ref", m_ref)->required()->check(CLI::ExistingFile);
  metr->add_option("test", m_test)->required()->check(CLI::ExistingFile);
  metr->add_option("--degraded", m_deg, "Pre-restoration image, enables IPSNR")->check(CLI::ExistingFile);
  metr->add_option("--channels", m_channels, "all or luma");

  // train
  auto* trn = app.add_subcommand("train", "Two-stage training from a JSON config");
  std::string t_config, t_output;
  std::optional<std::uint64_t> t_seed;
  bool t_quiet = false;
  trn->add_option("--config", t_config, "Training config (JSON)")->required()->check(CLI::ExistingFile);
  trn->add_option("--output", t_output, "Override output_dir");
  trn->add_option("--seed", t_seed, "Override the config seed");
  trn->add_flag("--quiet", t_quiet, "No per-epoch log on stderr");

  // restore
  auto* rst = app.add_subcommand("restore", "Remove artifacts from a decoded JPEG image");
  std::string r_model, r_in, r_out, r_jpeg;
  std::optional<int> r_qf;
  rst->add_option("--model", r_model, "Checkpoint (config sidecar alongside)")->required()->check(CLI::ExistingFile);
  rst->add_option("--qf", r_qf, "Quality factor the image was compressed at")->check(CLI::Range(1, 100));
  rst->add_option("--jpeg", r_jpeg, "Original JPEG whose tables produced IN")->check(CLI::ExistingFile);
  rst->add_option("input", r_in, "Decoded pixels (PNG/PNM)")->required()->check(CLI::ExistingFile);
  rst->add_option("output", r_out)->required();

  // sweep
  auto* swp = app.add_subcommand("sweep", "Quality-factor sweep with IPSNR");
  std::vector<std::string> s_models, s_labels;
  std::string s_test, s_qfs = "10,20,30,40,50", s_csv, s_svg, s_sub = "420", s_channels = "all";
  std::size_t s_res = 1;
  swp->add_option("--model", s_models, "Checkpoint; repeat to compare models")->required()->check(CLI::ExistingFile);
  swp->add_option("--label", s_labels, "Legend label per --model");
  swp->add_option("--test", s_test, "Test image or directory")->required()->check(CLI::ExistingPath);
  swp->add_option("--qfs", s_qfs, "Comma-separated quality factors");
  swp->add_option("--resolution", s_res, "Downscale test images by this factor per side")->check(CLI::Range(1, 4));
  swp->add_option("--subsampling", s_sub)->check(CLI::IsMember({"420", "444"}));
  swp->add_option("--channels", s_channels, "all or luma");
  swp->add_option("--csv", s_csv, "Also write the CSV here");
  swp->add_option("--svg", s_svg, "Plot mean IPSNR vs qf here");

  // gradcheck
  auto* gck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  std::uint64_t g_seed = 7;
  gck->add_option("--seed", g_seed, "Seed for the random test tensors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  const bool csv = format == "csv";
  try {
    if (*qtable) {
      auto [l, c] = jpeg::ijg_tables(qt_qf);
      if (csv) {
        print_tables_csv(std::cout, {l, c});
      } else {
        std::cout << json{{"qf", qt_qf}, {"tables", {table_json(l), table_json(c)}}}.dump(2) << '\n';
      }
    } else if (*qmap) {
      auto [luma, chroma] = tables_from(qm_qf, qm_jpeg);
      if (!qm_jpeg.empty() && (qm_w == 0 || qm_h == 0)) {
        const auto meta = inspect_file(qm_jpeg);
        if (qm_w == 0) qm_w = meta.width;
        if (qm_h == 0) qm_h = meta.height;
      }
      if (qm_w == 0 || qm_h == 0) throw CliError("usage", "--width and --height are required without --jpeg");
      if (qm_gray || !chroma) chroma.reset();
      const auto qm = jpeg::build_qmap(qm_w, qm_h, luma, chroma);
      json files = json::array();
      if (fs::path(qm_out).extension() == ".json") {
        json planes = json::array();
        for (std::size_t k = 0; k < qm.planes(); ++k) {
          json rows = json::array();
          for (std::size_t y = 0; y < qm.height(); ++y) {
            json row = json::array();
            for (std::size_t x = 0; x < qm.width(); ++x) row.push_back(qm.at(y, x, k));
            rows.push_back(row);
          }
          planes.push_back(rows);
        }
        write_text(qm_out, json{{"width", qm_w}, {"height", qm_h}, {"planes", planes}}.dump() + "\n");
        files.push_back(qm_out);
      } else {
        const char* names[] = {"luma", "chroma"};
        for (std::size_t k = 0; k < qm.planes(); ++k) {
          Image8 plane(qm.height(), qm.width(), ColorSpace::Gray);
          for (std::size_t y = 0; y < qm.height(); ++y) {
            for (std::size_t x = 0; x < qm.width(); ++x) plane.at(y, x) = round_to_u8(qm.at(y, x, k));
          }
          const std::string path = qm_out + "_" + names[k] + ".png";
          sim::write_image(path, plane);
          files.push_back(path);
        }
      }
      std::cout << json{{"width", qm_w}, {"height", qm_h}, {"planes", qm.planes()}, {"files", files}}.dump() << '\n';
    } else if (*inspect) {
      const auto meta = inspect_file(in_path);
      if (csv) {
        std::vector<jpeg::QuantTable> tables;
        for (const auto& [id, t] : meta.tables) tables.push_back(t);
        print_tables_csv(std::cout, tables);
      } else {
        std::cout << metadata_json(meta).dump(2) << '\n';
      }
    } else if (*simulate) {
      Image8 img = sim::read_image(sim_in);
      if (sim_gray) img = to_gray(img);
      const auto res = sim::compress_simulate(img, sim_qf, sim::parse_subsampling(sim_sub));
      sim::write_image(sim_out, res.image);
      std::cout << json{{"qf", sim_qf},
                        {"subsampling", sim_sub},
                        {"output", sim_out},
                        {"psnr", db_json(metrics::psnr(img, res.image))}}
                       .dump()
                << '\n';
    } else if (*metr) {
      const Image8 ref = sim::read_image(m_ref), test = sim::read_image(m_test);
      std::optional<Image8> deg;
      if (!m_deg.empty()) deg = sim::read_image(m_deg);
      const auto r = metrics::evaluate(ref, test, deg ? &*deg : nullptr, parse_channels(m_channels));
      if (csv) {
        std::cout << "path,psnr,ssim,psnr_b,ipsnr\n"
                  << m_test << ',' << metrics::format_db(r.psnr) << ',' << r.ssim << ','
                  << metrics::format_db(r.psnr_b) << ',' << (r.ipsnr ? metrics::format_db(*r.ipsnr) : "") << '\n';
      } else {
        std::cout << report_json(r).dump() << '\n';
      }
    } else if (*trn) {
      auto cfg = train::load_train_config(t_config);
      if (!t_output.empty()) cfg.output_dir = t_output;
      if (t_seed) cfg.seed = *t_seed;
      if (cfg.output_dir.empty()) throw CliError("config", "output_dir is required (config or --output)");
      const auto result = train::run_training(cfg, t_quiet ? nullptr : &std::cerr);
      json j = {{"model", (cfg.output_dir / "model.qgcn").string()}, {"steps", result.curve.size()}};
      if (!result.curve.empty()) {
        j["first_loss"] = result.curve.front().loss;
        j["final_loss"] = result.curve.back().loss;
      }
      std::cout << j.dump() << '\n';
    } else if (*rst) {
      if (r_qf && !r_jpeg.empty()) throw CliError("usage", "--qf and --jpeg are mutually exclusive");
      const auto model = model::load_checkpoint(r_model);
      Image8 img = sim::read_image(r_in);
      if (!r_jpeg.empty()) {
        const auto meta = inspect_file(r_jpeg);
        if (meta.width != img.width() || meta.height != img.height()) {
          throw CliError("input", "decoded image is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                      " but the JPEG frame is " + std::to_string(meta.width) + "x" +
                                      std::to_string(meta.height));
        }
      }
      if (!model.config().color() && img.channels() == 3) img = to_gray(img);
      auto [luma, chroma] = tables_from(r_qf, r_jpeg);
      if (model.config().color() && !chroma) throw CliError("input", "color model needs a chroma table");
      const Image8 out = train::restore_image(model, img, luma, chroma.value_or(luma));
      sim::write_image(r_out, out);
      std::cout << json{{"output", r_out}, {"width", out.width()}, {"height", out.height()}}.dump() << '\n';
    } else if (*swp) {
      if (!s_labels.empty() && s_labels.size() != s_models.size()) {
        throw CliError("usage", "--label must be given once per --model");
      }
      const auto qfs = train::parse_qf_list(s_qfs);
      const auto testset = train::rescale_testset(train::load_testset(s_test), s_res);
      train::SweepOptions opts{sim::parse_subsampling(s_sub), parse_channels(s_channels)};
      std::ostringstream table;
      std::vector<train::PlotSeries> series;
      json all = json::array();
      for (std::size_t i = 0; i < s_models.size(); ++i) {
        const std::string label = s_labels.empty() ? fs::path(s_models[i]).stem().string() : s_labels[i];
        const auto model = model::load_checkpoint(s_models[i]);
        const auto res = train::sweep_eval(model, testset, qfs, opts);
        std::ostringstream one;
        train::write_sweep_csv(one, res);
        if (s_models.size() == 1) {
          table << one.str();
        } else {
          std::istringstream lines(one.str());
          std::string line;
          std::getline(lines, line);
          if (i == 0) table << "model," << line << '\n';
          while (std::getline(lines, line)) table << label << ',' << line << '\n';
        }
        std::ostringstream js;
        train::write_sweep_json(js, res);
        all.push_back({{"model", label}, {"result", json::parse(js.str())}});
        train::PlotSeries s{label, {}};
        for (const auto& [qf, m] : res.means) s.points.emplace_back(qf, m.ipsnr);
        series.push_back(std::move(s));
      }
      if (!s_csv.empty()) write_text(s_csv, table.str());
      if (!s_svg.empty()) {
        train::PlotOptions po;
        po.title = "Mean IPSNR per quality factor";
        if (s_res > 1) po.title += " (1/" + std::to_string(s_res) + " resolution)";
        write_text(s_svg, train::render_line_plot(series, po));
      }
      if (csv) {
        std::cout << table.str();
      } else {
        std::cout << (s_models.size() == 1 ? all[0]["result"] : all).dump(2) << '\n';
      }
    } else if (*gck) {
      const auto suite = model::run_gradient_suite(g_seed);
      bool ok = true;
      json rows = json::array();
      if (csv) std::cout << "name,max_rel_error,tolerance,entries,passed\n";
      for (const auto& e : suite) {
        ok = ok && e.passed();
        if (csv) {
          std::cout << e.name << ',' << e.max_rel_error << ',' << e.tolerance << ',' << e.entries << ','
                    << (e.passed() ? "true" : "false") << '\n';
        } else {
          rows.push_back({{"name", e.name},
                          {"max_rel_error", e.max_rel_error},
                          {"tolerance", e.tolerance},
                          {"entries", e.entries},
                          {"passed", e.passed()},
                          {"worst", e.worst}});
        }
      }
      if (!csv) std::cout << json{{"passed", ok}, {"checks", rows}}.dump(2) << '\n';
      if (!ok) return report_error("gradcheck", "one or more gradient checks exceeded tolerance", 1);
    }
  } catch (const CliError& e) {
    return report_error(e.kind, e.what(), e.kind == "usage" ? 2 : 1);
  } catch (const sim::ImageIoError& e) {
    return report_error("io", e.what(), 1);
  } catch (const jpeg::JpegParseError& e) {
    return report_error("jpeg", e.what(), 1);
  } catch (const tensor::CheckpointError& e) {
    return report_error("checkpoint", e.what(), 1);
  } catch (const train::TrainingDiverged& e) {
    return report_error("diverged", e.what(), 1);
  } catch (const std::invalid_argument& e) {
    return report_error("invalid", e.what(), 1);
  } catch (const std::out_of_range& e) {
    return report_error("range", e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), 1);
  }
  return 0;
}
