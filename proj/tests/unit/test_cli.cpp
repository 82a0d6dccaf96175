#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "qgcn/jpeg/quant_table.hpp"
#include "test_support.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(QGCN_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

}  // namespace

TEST_CASE("qtable at qf 50 prints the base tables") {
  const auto r = run("qtable --qf 50");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["qf"] == 50);
  const auto [luma, chroma] = qgcn::jpeg::ijg_tables(50);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(j["tables"][0]["entries"][i / 8][i % 8] == luma.entries[i]);
    CHECK(j["tables"][1]["entries"][i / 8][i % 8] == chroma.entries[i]);
  }
}

TEST_CASE("inspect reports the tables a reference encoder wrote") {
  const auto dir = std::filesystem::temp_directory_path() / "qgcn_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "q30.jpg";
  qgcn::testing::write_bytes(path, qgcn::testing::reference_jpeg(qgcn::testing::natural_rgb(), 30));
  const auto r = run("inspect " + path.string());
  REQUIRE(r.status == 0);
  const auto meta = nlohmann::json::parse(r.out);
  const auto table = nlohmann::json::parse(run("qtable --qf 30").out);
  CHECK(meta["tables"] == table["tables"]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("metrics of an image against itself") {
  const auto img = (qgcn::testing::data_dir() / "camera.png").string();
  const auto r = run("metrics " + img + " " + img);
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["psnr"] == 99.99);
  CHECK(j["ssim"] == 1.0);
}

TEST_CASE("errors are reported as one JSON line with a nonzero exit") {
  auto r = run("qtable --qf 0");
  CHECK(r.status != 0);
  CHECK(nlohmann::json::parse(r.out).contains("error"));
  r = run("metrics /nonexistent/a.png /nonexistent/b.png");
  CHECK(r.status == 2);
  // A readable file that is not an image fails at run time.
  const auto cmake = std::string(QGCN_SOURCE_DIR) + "/CMakeLists.txt";
  r = run("metrics " + cmake + " " + cmake);
  CHECK(r.status == 1);
  CHECK(nlohmann::json::parse(r.out)["error"].contains("message"));
  r = run("bogus");
  CHECK(r.status == 2);
}
