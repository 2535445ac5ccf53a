#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "vsim/image.hpp"
#include "vsim/raster_io.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

// End-to-end tests of the installed binary.  ctest exports VSIM_CLI; when the
// test runs outside ctest without it, the suite is skipped.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* env = std::getenv("VSIM_CLI");
    if (env == nullptr || *env == '\0') GTEST_SKIP() << "VSIM_CLI not set";
    cli_ = env;
    dir_ = fs::temp_directory_path() / ("vsim_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }

  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  CliResult run(const std::string& args) {
    const fs::path log = dir_ / "cli_output.txt";
    const std::string cmd = "\"" + cli_ + "\" " + args + " > \"" + log.string() +
                            "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
  }

  static std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      const size_t eq = line.find('=');
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
  }

  std::string write_frame(const std::string& name, int size, double value) {
    vsim::Image2D img(size, size);
    for (double& p : img.pixels) p = value;
    const fs::path path = dir_ / name;
    fs::create_directories(path.parent_path());
    vsim::write_image_png16(path.string(), img);
    return path.string();
  }

  std::string cli_;
  fs::path dir_;
};

TEST_F(CliTest, NoArgumentsIsAUsageError) {
  EXPECT_EQ(run("").code, 2);
}

TEST_F(CliTest, HelpExitsZeroAndListsSubcommands) {
  CliResult r = run("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("reconstruct"), std::string::npos);
  EXPECT_NE(r.out.find("dataset"), std::string::npos);
}

TEST_F(CliTest, OtfReportsCutoffFrequencies) {
  CliResult r = run("otf --size 32");
  ASSERT_EQ(r.code, 0) << r.out;
  auto kv = parse_kv(r.out);
  ASSERT_TRUE(kv.count("fc_pix"));
  ASSERT_TRUE(kv.count("rayleigh_px"));
  EXPECT_NEAR(std::stod(kv["fc_pix"]), 0.24, 1e-12);
  EXPECT_NEAR(std::stod(kv["rayleigh_px"]), 61.0 / 12.0, 1e-9);
}

TEST_F(CliTest, CheckGradReportsAPassForEachOp) {
  for (const char* op : {"msa", "ca"}) {
    CliResult r = run(std::string("check-grad --op ") + op + " --instances 2");
    ASSERT_EQ(r.code, 0) << r.out;
    auto kv = parse_kv(r.out);
    EXPECT_EQ(kv["op"], op);
    EXPECT_EQ(kv["pass"], "1");
    EXPECT_LT(std::stod(kv["max_rel_err"]), 1e-4);
  }
}

TEST_F(CliTest, CheckGradRejectsUnknownOp) {
  EXPECT_EQ(run("check-grad --op bogus").code, 3);
}

TEST_F(CliTest, ReconstructMissingInputIsAnIoError) {
  const std::string out = (dir_ / "r.png").string();
  EXPECT_EQ(run("reconstruct \"" + (dir_ / "absent.vsim").string() +
                "\" --out \"" + out + "\"")
                .code,
            4);
}

TEST_F(CliTest, DatasetWithoutSourcesIsAConfigError) {
  EXPECT_EQ(run("dataset --out \"" + (dir_ / "ds").string() + "\" --count 1").code, 3);
}

TEST_F(CliTest, DatasetCountZeroWritesAnEmptyManifest) {
  write_frame("src/frame_0.png", 16, 0.5);
  CliResult r = run("dataset --source \"" + (dir_ / "src").string() +
                    "\" --out \"" + (dir_ / "ds").string() + "\" --count 0");
  ASSERT_EQ(r.code, 0) << r.out;
  auto kv = parse_kv(r.out);
  EXPECT_EQ(kv["samples"], "0");
  EXPECT_EQ(kv["failures"], "0");
  EXPECT_TRUE(fs::exists(dir_ / "ds" / "manifest.jsonl"));
}

TEST_F(CliTest, SimulateThenReconstructRoundTrips) {
  const std::string input = write_frame("sample.png", 64, 0.25);
  const std::string stack = (dir_ / "stack.vsim").string();
  CliResult sim = run("simulate --input \"" + input + "\" --out \"" + stack +
                      "\" --seed 3");
  ASSERT_EQ(sim.code, 0) << sim.out;
  auto kv = parse_kv(sim.out);
  EXPECT_EQ(kv["frames"], "9");
  EXPECT_EQ(kv["height"], "64");

  const std::string recon = (dir_ / "recon.png").string();
  CliResult rc = run("reconstruct \"" + stack + "\" --out \"" + recon +
                     "\" --method widefield");
  ASSERT_EQ(rc.code, 0) << rc.out;
  EXPECT_TRUE(fs::exists(recon));
  auto rkv = parse_kv(rc.out);
  EXPECT_EQ(rkv["method"], "widefield");
  EXPECT_EQ(rkv["height"], "64");
}

}  // namespace
