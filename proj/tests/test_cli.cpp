#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sklab/cli.hpp"

using namespace sklab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = cli::run_cli(args, out, err);
  return {rc, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) rows.push_back(cli::split(line, ','));
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("sklab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

const std::vector<std::vector<std::string>> kFastCommands = {
    {"spectrum", "--N", "21", "--V", "0.5*x^2", "--count", "5"},
    {"spectrum", "--N", "9", "--kind", "stochastic", "--count", "3"},
    {"trace-table", "--V", "harmonic", "--t", "1", "--N", "9,21", "--samples", "200"},
    {"fk-kernel", "--mode", "grid", "--N", "9", "--V", "x^2", "--t", "0.5", "--samples", "500"},
    {"fk-kernel", "--mode", "lattice", "--N", "9", "--V", "x^2", "--b", "1", "--samples", "500"},
    {"fk-kernel", "--mode", "continuum", "--V", "harmonic", "--t", "1", "--samples", "300", "--level", "6"},
    {"fk-trace", "--N", "5", "--V", "harmonic", "--samples", "200"},
    {"weak-convergence", "--N", "9,21", "--samples", "2000"},
    {"padic-density", "--p", "2", "--b", "2", "--t", "1", "--m", "-10..10"},
    {"padic-fk", "--p", "2", "--b", "2", "--V", "1*r^1", "--samples", "300", "--level", "4"},
    {"padic-checks", "--p", "3", "--b", "1", "--t", "1"},
};

}  // namespace

TEST(Cli, SpectrumExample) {
  const auto r = run({"spectrum", "--N", "21", "--V", "0.5*x^2", "--count", "5"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "eigenvalue"}));
  EXPECT_NEAR(std::stod(rows[1][1]), 0.5, 1e-3);
}

TEST(Cli, TraceTableColumns) {
  const auto r = run({"trace-table", "--V", "harmonic", "--t", "1", "--N", "9,21,41", "--samples", "300"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"N", "epsilon", "exact_trace", "mc_trace", "mc_stderr", "trace_norm_gap",
                                               "marginal_gap"}));
  double prev = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double gap = std::abs(std::stod(rows[i][2]) - 0.959518);
    EXPECT_LE(gap, prev);
    prev = gap;
  }
}

TEST(Cli, PadicDensityPositive) {
  const auto r = run({"padic-density", "--p", "2", "--b", "2", "--t", "1", "--m", "-10..10"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 22u);
  EXPECT_EQ(rows[0][0], "m");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(std::stod(rows[i][1]), 0.0);
}

TEST(Cli, FloatsRoundTrip) {
  const auto r = run({"padic-density", "--p", "3", "--b", "0.5", "--t", "0.1", "--m", "0..0"});
  const auto rows = parse_csv(r.out);
  const double f = std::stod(rows[1][1]);
  EXPECT_EQ(format_real(f), rows[1][1]);
  EXPECT_EQ(f, padic::radial_density({3, 0.5, 0.1}, 0));
}

TEST(Cli, ByteIdenticalReruns) {
  for (const auto& args : kFastCommands) {
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.status, 0) << args[0] << ": " << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
    EXPECT_FALSE(a.out.empty());
  }
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const std::vector<std::string> base{"fk-trace", "--N", "9", "--V", "harmonic", "--samples", "400"};
  auto with = [&](const std::string& threads) {
    std::vector<std::string> args{"--threads", threads};
    args.insert(args.end(), base.begin(), base.end());
    return run(args).out;
  };
  EXPECT_EQ(with("1"), with("3"));
  std::vector<std::string> seeded{"--seed", "99"};
  seeded.insert(seeded.end(), base.begin(), base.end());
  EXPECT_NE(run(seeded).out, with("1"));
}

TEST(Cli, InvalidInputIsExitTwo) {
  EXPECT_EQ(run({"spectrum", "--bogus", "1"}).status, 2);
  EXPECT_EQ(run({"spectrum", "--N", "20"}).status, 2);
  EXPECT_EQ(run({"spectrum", "--N", "abc"}).status, 2);
  EXPECT_EQ(run({"spectrum", "--V", "x^"}).status, 2);
  EXPECT_EQ(run({"nonsense"}).status, 2);
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"padic-density", "--p", "4"}).status, 2);
  EXPECT_EQ(run({"padic-density", "--m", "3..1"}).status, 2);
  EXPECT_EQ(run({"padic-fk", "--V", "x^2"}).status, 2);
  EXPECT_EQ(run({"padic-fk", "--x", "1/3"}).status, 2);
  EXPECT_EQ(run({"padic-checks", "--k", "1.5", "--b", "1"}).status, 2);
  EXPECT_EQ(run({"--substreams", "0", "spectrum"}).status, 2);
  const auto r = run({"fk-kernel", "--mode", "sideways"});
  EXPECT_EQ(r.status, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, IoFailureIsExitFour) {
  EXPECT_EQ(run({"-o", "/nonexistent-dir/x/out.csv", "spectrum"}).status, 4);
  EXPECT_EQ(run({"--config", "/nonexistent-dir/cfg.json"}).status, 4);
}

TEST(Cli, VersionAndHelp) {
  const auto v = run({"--version"});
  EXPECT_EQ(v.status, 0);
  EXPECT_EQ(v.out, std::string(SKLAB_VERSION) + "\n");
  const auto h = run({"--help"});
  EXPECT_EQ(h.status, 0);
  for (const char* c : {"spectrum", "trace-table", "fk-kernel", "fk-trace", "weak-convergence", "padic-density", "padic-fk",
                        "padic-checks", "selfcheck"})
    EXPECT_NE(h.out.find(c), std::string::npos) << c;
}

TEST(Cli, OutputFileAndManifest) {
  TempDir dir;
  const auto csv = dir / "spec.csv";
  const auto r = run({"--seed", "7", "-o", csv.string(), "spectrum", "--N", "9", "--count", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(csv), run({"spectrum", "--N", "9", "--count", "3"}).out);
  const auto m = nlohmann::json::parse(slurp(csv.string() + ".manifest.json"));
  EXPECT_EQ(m["command"], "spectrum");
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["version"], SKLAB_VERSION);
  EXPECT_EQ(m["exit_status"], 0);
  EXPECT_EQ(m["config"]["N"], "9");
  EXPECT_EQ(m["outputs"][0], csv.string());
  EXPECT_TRUE(m.contains("created"));
}

TEST(Cli, PathsFileFromWeakConvergence) {
  TempDir dir;
  const auto paths = dir / "paths.csv";
  const auto r = run({"weak-convergence", "--N", "9,21", "--samples", "500", "--paths", paths.string(), "--path-count", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_csv(slurp(paths));
  ASSERT_GT(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"path", "N", "time", "state"}));
  EXPECT_EQ(rows[1][2], "0");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir;
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"command": "spectrum", "N": 9, "count": 2, "seed": 3})";
  const auto from_file = run({"--config", cfg.string()});
  ASSERT_EQ(from_file.status, 0) << from_file.err;
  EXPECT_EQ(from_file.out, run({"spectrum", "--N", "9", "--count", "2"}).out);
  const auto overridden = run({"--config", cfg.string(), "spectrum", "--count", "4"});
  ASSERT_EQ(overridden.status, 0) << overridden.err;
  EXPECT_EQ(overridden.out, run({"spectrum", "--N", "9", "--count", "4"}).out);
}

TEST(Cli, ConfigFileRejectsBadContent) {
  TempDir dir;
  const auto unknown = dir / "unknown.json";
  std::ofstream(unknown) << R"({"command": "spectrum", "colour": "blue"})";
  EXPECT_EQ(run({"--config", unknown.string()}).status, 2);
  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  EXPECT_EQ(run({"--config", broken.string()}).status, 2);
  const auto nocmd = dir / "nocmd.json";
  std::ofstream(nocmd) << R"({"N": 9})";
  EXPECT_EQ(run({"--config", nocmd.string()}).status, 2);
}

TEST(Cli, PadicChecksAllPass) {
  const auto r = run({"padic-checks", "--p", "2", "--b", "2", "--t", "0.1"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"check", "parameter", "value", "bound", "pass"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][4], "true") << rows[i][0];
}

TEST(Cli, PadicFkReportsMatrixReference) {
  const auto r = run({"padic-fk", "--p", "2", "--b", "2", "--V", "1*r^1", "--samples", "200", "--level", "4"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows[1][5]), 0.3955, 2e-3);
}

TEST(Cli, SelfcheckFiltered) {
  const auto r = run({"selfcheck", "--filter", "qops", "--quiet"});
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_TRUE(r.err.empty());
  EXPECT_GE(parse_csv(r.out).size(), 2u);
  EXPECT_EQ(run({"selfcheck", "--filter", "no-such-check"}).status, 2);
}
