// Drives the built command-line binary end to end.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "imputereg/csv.hpp"
#include "imputereg/simlab.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("imputereg_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + IMPUTEREG_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string fit_config_json() {
  return R"({"command":"fit","y":"y","x":["x1","x2","x3","x4","x5","x6"],"w":["w1","w2","w3","w4","w5","w6","w7","w8"],"z":["z1","z2"]})";
}

}  // namespace

TEST_CASE("cli: version flag") {
  TempDir dir;
  CHECK(run("--version", dir.path / "log") == 0);
  CHECK(slurp(dir.path / "log").find(IMPUTEREG_VERSION) != std::string::npos);
}

TEST_CASE("cli: fit succeeds and writes a JSON report") {
  TempDir dir;
  const auto sim = imputereg::gen_example1(0.0, 2.0, 1.0, 300, 1500, 3);
  imputereg::write_csv(sim.dataset, (dir.path / "data.csv").string());
  write_file(dir.path / "cfg.json", fit_config_json());
  const int code = run("fit --data " + (dir.path / "data.csv").string() + " --config " + (dir.path / "cfg.json").string() +
                           " --out " + (dir.path / "report.json").string(),
                       dir.path / "log");
  REQUIRE(code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir.path / "report.json"));
  CHECK(doc.at("n") == 300);
  CHECK(doc.at("N") == 1500);
  CHECK(doc.contains("w_hat"));
}

TEST_CASE("cli: data errors exit with 2") {
  TempDir dir;
  write_file(dir.path / "data.csv", "y,x1,w1,z1\n1,2,3,0.5\n");
  write_file(dir.path / "cfg.json", R"({"y":"y","x":["x1"],"w":["w1"],"z":["z1"]})");
  CHECK(run("fit --data " + (dir.path / "data.csv").string() + " --config " + (dir.path / "cfg.json").string(),
            dir.path / "log") == 2);
  const std::string log = slurp(dir.path / "log");
  CHECK(log.find("ParseError") != std::string::npos);
  CHECK(log.find("line 2 column 4") != std::string::npos);

  write_file(dir.path / "bad.json", R"({"y":"y","typo":1})");
  CHECK(run("fit --data " + (dir.path / "data.csv").string() + " --config " + (dir.path / "bad.json").string(),
            dir.path / "log") == 2);
  CHECK(run("fit --data " + (dir.path / "missing.csv").string() + " --config " + (dir.path / "cfg.json").string(),
            dir.path / "log") == 2);
}

TEST_CASE("cli: separation exits with 3 and names the column") {
  TempDir dir;
  std::ostringstream csv;
  csv << "y,x1,w1,z1\n";
  for (int i = 0; i < 40; ++i) {
    const double w = -2.0 + 0.1 * i;
    csv << (0.3 * i) << "," << (i % 7) << "," << w << "," << (w > 0 ? 1 : 0) << "\n";
  }
  for (int i = 0; i < 40; ++i) csv << (0.1 * i) << "," << (i % 5) << "," << (0.05 * i - 1.0) << ",\n";
  write_file(dir.path / "data.csv", csv.str());
  write_file(dir.path / "cfg.json", R"({"y":"y","x":["x1"],"w":["w1"],"z":["z1"]})");
  CHECK(run("fit --data " + (dir.path / "data.csv").string() + " --config " + (dir.path / "cfg.json").string(),
            dir.path / "log") == 3);
  const std::string log = slurp(dir.path / "log");
  CHECK(log.find("SeparationDetected") != std::string::npos);
  CHECK(log.find("column 0") != std::string::npos);
}

TEST_CASE("cli: replication threshold abort exits with 4") {
  TempDir dir;
  write_file(dir.path / "cfg.json", R"({"command":"simulate","design":"case2","n":40,"N":400,"B":20})");
  CHECK(run("simulate --config " + (dir.path / "cfg.json").string(), dir.path / "log") == 4);
}

TEST_CASE("cli: simulate output is byte-identical across thread counts and replays from its echo") {
  TempDir dir;
  write_file(dir.path / "cfg.json", R"({"command":"simulate","design":"case1","n":300,"N":1500,"B":8})");
  REQUIRE(run("simulate --config " + (dir.path / "cfg.json").string() + " --threads 1 --out " + (dir.path / "a").string(),
              dir.path / "log") == 0);
  REQUIRE(run("simulate --config " + (dir.path / "cfg.json").string() + " --threads 3 --out " + (dir.path / "b").string(),
              dir.path / "log") == 0);
  CHECK(slurp(dir.path / "log").find("beta1") != std::string::npos);
  for (const char* f : {"metrics_coefficients.csv", "metrics_mse.csv", "metrics.json"}) {
    const std::string a = slurp(dir.path / "a" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(dir.path / "b" / f));
  }

  const auto doc = nlohmann::json::parse(slurp(dir.path / "a" / "metrics.json"));
  write_file(dir.path / "replay.json", doc.at("config").dump());
  REQUIRE(run("simulate --config " + (dir.path / "replay.json").string() + " --out " + (dir.path / "c").string(),
              dir.path / "log") == 0);
  CHECK(slurp(dir.path / "c" / "metrics_coefficients.csv") == slurp(dir.path / "a" / "metrics_coefficients.csv"));
  CHECK(slurp(dir.path / "c" / "metrics.json") == slurp(dir.path / "a" / "metrics.json"));

  // --seed overrides the configured seed and shows up in the echo.
  REQUIRE(run("simulate --config " + (dir.path / "cfg.json").string() + " --seed 99 --out " + (dir.path / "d").string(),
              dir.path / "log") == 0);
  const auto seeded = nlohmann::json::parse(slurp(dir.path / "d" / "metrics.json"));
  CHECK(seeded.at("config").at("seed") == 99);
  CHECK(slurp(dir.path / "d" / "metrics_coefficients.csv") != slurp(dir.path / "a" / "metrics_coefficients.csv"));
}
