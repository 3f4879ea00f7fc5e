// Contract tests for the mcpr binary: exit codes, file outputs, seed and
// thread determinism, config round-trip. The binary path arrives in the
// MCPR_BIN environment variable (set by CTest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* bin = std::getenv("MCPR_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("mcpr_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

}  // namespace

TEST_CASE("generate: minimal config produces full observation at eps = 0") {
  const auto dir = fresh_dir("gen_min");
  write(dir / "cfg.ini", "[simulation]\nm = 3\nr = 1\nK = 2\nb = 1\nepsilon = 0\nseed = 5\n");
  REQUIRE(run("generate --config " + (dir / "cfg.ini").string() + " --out " + dir.string()) ==
          0);
  const std::string dataset = slurp(dir / "dataset.txt");
  // header + 2 users x 3 pairs
  CHECK(std::count(dataset.begin(), dataset.end(), '\n') == 7);
  CHECK(dataset.rfind("3 1 2 1 0 5\n", 0) == 0);
}

TEST_CASE("generate: same seed gives identical files, different seed differs") {
  const auto dir = fresh_dir("gen_seed");
  write(dir / "cfg.ini",
        "[simulation]\nm = 12\nr = 2\nK = 6\nb = 2\nepsilon = 0.4\nseed = 9\n");
  const std::string cfg = (dir / "cfg.ini").string();
  REQUIRE(run("generate --config " + cfg + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("generate --config " + cfg + " --out " + (dir / "b").string()) == 0);
  REQUIRE(run("generate --config " + cfg + " --seed 10 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a/dataset.txt") == slurp(dir / "b/dataset.txt"));
  CHECK(slurp(dir / "a/model.txt") == slurp(dir / "b/model.txt"));
  CHECK(slurp(dir / "a/dataset.txt") != slurp(dir / "c/dataset.txt"));
}

TEST_CASE("generate: invalid config exits 2 with a field message") {
  const auto dir = fresh_dir("gen_bad");
  write(dir / "cfg.ini", "[simulation]\nm = 1\nr = 1\nK = 2\nb = 1\nepsilon = 0\nseed = 5\n");
  CHECK(run("generate --config " + (dir / "cfg.ini").string() + " --out " + dir.string()) ==
        2);
  write(dir / "cfg2.ini", "[simulation]\nm = 5\nbogus_key = 3\n");
  CHECK(run("generate --config " + (dir / "cfg2.ini").string() + " --out " + dir.string()) ==
        2);
}

TEST_CASE("run: produces metrics with and without truth; bad dims exit 2") {
  const auto dir = fresh_dir("run");
  write(dir / "cfg.ini",
        "[simulation]\nm = 20\nr = 2\nK = 20\nb = 3\nepsilon = 0.2\nseed = 3\n");
  REQUIRE(run("generate --config " + (dir / "cfg.ini").string() + " --out " + dir.string()) ==
          0);
  REQUIRE(run("run --dataset " + (dir / "dataset.txt").string() + " --truth " +
              (dir / "model.txt").string() + " --out " + (dir / "with").string()) == 0);
  const std::string metrics = slurp(dir / "with/metrics.json");
  CHECK(metrics.find("misclustered_fraction") != std::string::npos);
  CHECK(metrics.find("median_relative_error") != std::string::npos);
  CHECK(fs::exists(dir / "with/clustering.csv"));
  CHECK(fs::exists(dir / "with/cluster_0_scores.csv"));
  CHECK(fs::exists(dir / "with/cluster_1_scores.csv"));

  REQUIRE(run("run --dataset " + (dir / "dataset.txt").string() + " --out " +
              (dir / "without").string()) == 0);
  const std::string bare = slurp(dir / "without/metrics.json");
  CHECK(bare.find("misclustered_fraction") == std::string::npos);
  CHECK(bare.find("iterations") != std::string::npos);

  // mismatched truth: different m
  write(dir / "cfg2.ini",
        "[simulation]\nm = 10\nr = 2\nK = 20\nb = 3\nepsilon = 0.2\nseed = 3\n");
  REQUIRE(run("generate --config " + (dir / "cfg2.ini").string() + " --out " +
              (dir / "other").string()) == 0);
  CHECK(run("run --dataset " + (dir / "dataset.txt").string() + " --truth " +
            (dir / "other/model.txt").string() + " --out " + (dir / "bad").string()) == 2);
}

TEST_CASE("experiment: unknown name exits 2, fig1 writes csv + manifest") {
  const auto dir = fresh_dir("exp");
  CHECK(run("experiment fig9 --out " + dir.string()) == 2);

  write(dir / "cfg.ini", "[fig1]\nm = 20\nb_grid = 0.1,1\ntrials = 3\n");
  REQUIRE(run("experiment fig1 --config " + (dir / "cfg.ini").string() + " --seed 4 --out " +
              (dir / "f1").string()) == 0);
  CHECK(fs::exists(dir / "f1/fig1_angle.csv"));
  CHECK(fs::exists(dir / "f1/fig1_manifest.json"));
  const std::string csv = slurp(dir / "f1/fig1_angle.csv");
  CHECK(csv.rfind("b,mean_cosine,stddev,trials\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("experiment: csv bytes are independent of --threads") {
  const auto dir = fresh_dir("det");
  write(dir / "cfg.ini",
        "[fig3]\nm = 16\nn = 16\nb = 4\nepsilon = 0.4\nr_values = 2\n"
        "r_tilde_min = 1\nr_tilde_max = 3\ntrials = 4\n");
  const std::string cfg = (dir / "cfg.ini").string();
  REQUIRE(run("experiment fig3 --config " + cfg + " --seed 8 --threads 1 --out " +
              (dir / "t1").string()) == 0);
  REQUIRE(run("experiment fig3 --config " + cfg + " --seed 8 --threads 8 --out " +
              (dir / "t8").string()) == 0);
  CHECK(slurp(dir / "t1/fig3_curves.csv") == slurp(dir / "t8/fig3_curves.csv"));
  CHECK(slurp(dir / "t1/fig3_summary.csv") == slurp(dir / "t8/fig3_summary.csv"));
}

TEST_CASE("generate --emit-config round-trips byte-identically") {
  const auto dir = fresh_dir("roundtrip");
  write(dir / "cfg.ini",
        "[simulation]\nm = 8\nr = 2\nK = 4\nb = 1.5\nepsilon = 0.25\nseed = 6\n"
        "[clustering]\nalgorithm = threshold\ntau_constant = 0.5\n"
        "[fig2]\nbudgets = 10,20\nr_values = 2\ntrials = 2\n");
  REQUIRE(run("generate --config " + (dir / "cfg.ini").string() + " --emit-config --out " +
              (dir / "a").string()) == 0);
  // re-feed the emitted config; the second emission must be byte-identical
  REQUIRE(run("generate --config " + (dir / "a/config.ini").string() +
              " --emit-config --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a/config.ini") == slurp(dir / "b/config.ini"));
  // and the generated data under the emitted config matches too
  CHECK(slurp(dir / "a/dataset.txt") == slurp(dir / "b/dataset.txt"));
}

TEST_CASE("selfcheck exits zero") { CHECK(run("selfcheck") == 0); }
