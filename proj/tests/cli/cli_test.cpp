#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "afkan/afkan.hpp"
#include "properties.hpp"

namespace afkan {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(AFKAN_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string value_of(const std::string& out, const std::string& key) {
  std::istringstream is(out);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

class SyntheticMnist : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "afkan_cli_test_data";
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "mnist");
    write_split(afkan::testing::synthetic_dataset(200, 16, 10, 1), "train");
    write_split(afkan::testing::synthetic_dataset(80, 16, 10, 2), "t10k");
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static void write_split(const Dataset& ds, const std::string& prefix) {
    IdxImages img;
    img.count = static_cast<std::uint32_t>(ds.size());
    img.rows = 4;
    img.cols = 4;
    for (double v : ds.images.data()) img.pixels.push_back(static_cast<std::uint8_t>(std::lround(v * 255)));
    img.pixels[0] = 255;
    std::vector<std::uint8_t> labels(ds.labels.begin(), ds.labels.end());
    write_bytes(dir_ / "mnist" / (prefix + "-images-idx3-ubyte"), serialize_idx_images(img));
    write_bytes(dir_ / "mnist" / (prefix + "-labels-idx1-ubyte"), serialize_idx_labels(labels));
  }

  static std::string data_flag() { return "--data-dir " + dir_.string(); }

  static fs::path dir_;
};

fs::path SyntheticMnist::dir_;

TEST(Cli, ParamsTotalsForReferenceModels) {
  EXPECT_EQ(value_of(run("params").out, "total_params"), "52626");
  EXPECT_EQ(value_of(run("params --mode spatial_attn").out, "total_params"), "52636");
  EXPECT_EQ(value_of(run("params --mode multistep").out, "total_params"), "52624");
  EXPECT_EQ(value_of(run("params --variant mlp").out, "total_params"), "52512");
  EXPECT_EQ(value_of(run("params --variant relukan").out, "total_params"), "315146");
  EXPECT_EQ(value_of(run("params --variant relukan --widths 784,9,10").out, "total_params"), "52411");
}

TEST(Cli, ParamsOutputIsDeterministic) {
  const Result a = run("params --variant basis_kan --batch 8");
  const Result b = run("params --variant basis_kan --batch 8");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(value_of(a.out, "flops_batch"), "8");
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("params --variant transformer").code, 2);
  EXPECT_EQ(run("params --grid 0").code, 2);
  EXPECT_EQ(run("gradcheck --eps 1").code, 2);
  EXPECT_EQ(run("plot-basis --basis nope").code, 2);
}

TEST(Cli, MissingDataExitsThree) {
  EXPECT_EQ(run("train --data-dir /nonexistent/afkan --runs 1 --epochs 1").code, 3);
}

TEST(Cli, CorruptGradcheckExitsFour) {
  const Result r = run("gradcheck --corrupt-backward");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, PlotBasisRowsAndPeak) {
  const Result r = run("plot-basis --basis relu_kan --grid 5 --order 3 --resolution 221");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,i,value");
  std::size_t rows = 0;
  double peak = 0;
  while (std::getline(is, line)) {
    ++rows;
    peak = std::max(peak, std::stod(line.substr(line.rfind(',') + 1)));
  }
  EXPECT_EQ(rows, 221u * 8u);
  EXPECT_NEAR(peak, 1.0, 1e-9);
}

TEST_F(SyntheticMnist, TrainWritesLogAndCheckpoint) {
  const fs::path log = dir_ / "log.jsonl";
  const fs::path ckpt = dir_ / "m.ckpt";
  const Result r = run("train " + data_flag() + " --widths 16,8,10 --epochs 2 --runs 1 --log " +
                       log.string() + " --checkpoint " + ckpt.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream is(log);
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(is, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0]["epoch"], 0);
  EXPECT_EQ(records[1]["epoch"], 1);
  EXPECT_TRUE(records[1]["train_acc"].is_number());
  EXPECT_TRUE(records[2]["aggregate"].get<bool>());
  const Model m = load_checkpoint(ckpt);
  EXPECT_EQ(m.spec().widths, (std::vector<std::size_t>{16, 8, 10}));
}

TEST_F(SyntheticMnist, TrainMatchesLibraryRun) {
  const Result r = run("train " + data_flag() +
                       " --widths 16,8,10 --epochs 1 --runs 1 --skip-train-eval --checkpoint '' --log -");
  ASSERT_EQ(r.code, 0);
  const auto rec = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_TRUE(rec["train_acc"].is_null());

  const Dataset train = load_dataset(dir_, DatasetName::kMnist, Split::kTrain);
  const Dataset test = load_dataset(dir_, DatasetName::kMnist, Split::kTest);
  TrainConfig cfg;
  cfg.model.widths = {16, 8, 10};
  cfg.epochs = 1;
  cfg.eval_train = false;
  const auto res = multi_run(cfg, train, test, 1);
  EXPECT_EQ(rec["val_acc"].get<double>(), res.histories[0].epochs[0].val_acc);
  EXPECT_EQ(rec["train_loss"].get<double>(), res.histories[0].epochs[0].train_loss);
}

TEST_F(SyntheticMnist, CompareTabulatesEveryVariant) {
  const Result r = run("compare " + data_flag() +
                       " --widths 16,8,10 --epochs 1 --runs 2 --variants mlp,relukan,afkan:multistep");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("variant,grid,order,params", 0), 0u);
  std::vector<std::string> labels;
  while (std::getline(is, line)) {
    labels.push_back(line.substr(0, line.find(',')));
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "ok");
  }
  EXPECT_EQ(labels, (std::vector<std::string>{"mlp", "relukan", "afkan:multistep"}));
}

TEST_F(SyntheticMnist, GridSweepExpandsGriddedVariants) {
  const Result r = run("compare " + data_flag() +
                       " --widths 16,8,10 --epochs 1 --runs 1 --variants relukan,mlp --grid-sweep 1..2");
  ASSERT_EQ(r.code, 0);
  std::size_t rows = 0;
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3u);
}

}  // namespace
}  // namespace afkan
