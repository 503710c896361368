#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  std::string cmd = std::string(CRNOSC_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                    (dir / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("crnosc_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "base.crn") << testnets::kOscillator3;
    std::ofstream(dir / "add.crn") << testnets::kAdditionsUVW;
    std::ofstream(dir / "bad_add.crn") << "X + W1 <-> W1 ; kf = 1, kr = 1\n";
    std::ofstream(dir / "decay.crn") << "0 <-> X ; kf = 0.2, kr = 2\n";
    std::ofstream(dir / "broken.crn") << "X + -> Y ; k = 1\n";
  }
  ~Workspace() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("cli simulate: writes a CSV and reports drift") {
  Workspace ws;
  auto r = run_cli("simulate " + (ws.dir / "base.crn").string() +
                       " --x0 1,1,1 --t-end 10 --out " + (ws.dir / "traj.csv").string(),
                   ws.dir);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("conservation drift") != std::string::npos);
  std::string csv = slurp(ws.dir / "traj.csv");
  CHECK(csv.rfind("t,X,Z,Y", 0) == 0);  // header in first-appearance order
  CHECK(std::count(csv.begin(), csv.end(), '\n') > 10);

  // --t-end 0: single row at t=0
  auto r0 = run_cli("simulate " + (ws.dir / "base.crn").string() +
                        " --x0 1,1,1 --t-end 0 --out " + (ws.dir / "t0.csv").string(),
                    ws.dir);
  CHECK(r0.exit_code == 0);
  std::string t0 = slurp(ws.dir / "t0.csv");
  CHECK(std::count(t0.begin(), t0.end(), '\n') == 2);
}

TEST_CASE("cli simulate: input validation exit codes") {
  Workspace ws;
  CHECK(run_cli("simulate " + (ws.dir / "broken.crn").string() + " --x0 1 --t-end 1", ws.dir)
            .exit_code == 1);
  // missing value for the third species
  auto r = run_cli("simulate " + (ws.dir / "base.crn").string() + " --x0 1,1 --t-end 1", ws.dir);
  CHECK(r.exit_code == 1);
  CHECK(slurp(ws.dir / "stderr.txt").find("Y") != std::string::npos);
}

TEST_CASE("cli simulate: deterministic output bytes") {
  Workspace ws;
  run_cli("simulate " + (ws.dir / "base.crn").string() + " --x0 1,1,1 --t-end 5 --out " +
              (ws.dir / "a.csv").string(),
          ws.dir);
  run_cli("simulate " + (ws.dir / "base.crn").string() + " --x0 1,1,1 --t-end 5 --out " +
              (ws.dir / "b.csv").string(),
          ws.dir);
  CHECK(slurp(ws.dir / "a.csv") == slurp(ws.dir / "b.csv"));
}

TEST_CASE("cli orbit and floquet") {
  Workspace ws;
  auto r = run_cli("orbit " + (ws.dir / "base.crn").string() + " --x0 1,1,1 --out " +
                       (ws.dir / "orbit.json").string(),
                   ws.dir);
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(slurp(ws.dir / "orbit.json"));
  CHECK(j["schema"] == 1);
  CHECK(j["classification"] == "nondegenerate-stable");
  CHECK(j["period"].get<double>() > 1.0);
  CHECK(j["multipliers_relative"].size() == 3);
  CHECK(fs::exists(ws.dir / "orbit_samples.csv"));

  auto f = run_cli("floquet " + (ws.dir / "base.crn").string() + " --x0 1,1,1", ws.dir);
  CHECK(f.exit_code == 0);
  CHECK(f.stdout_text.find("classification: nondegenerate-stable") != std::string::npos);

  auto none = run_cli("orbit " + (ws.dir / "decay.crn").string() + " --x0 1 --out " +
                          (ws.dir / "no.json").string(),
                      ws.dir);
  CHECK(none.exit_code == 3);
  CHECK(slurp(ws.dir / "stderr.txt").find("converged-to-equilibrium") != std::string::npos);
}

TEST_CASE("cli extend: schedule constants and the rank gate") {
  Workspace ws;
  auto r = run_cli("extend " + (ws.dir / "base.crn").string() + " --add " +
                       (ws.dir / "add.crn").string() + " --eps 0.2 --eta 0.2 --out " +
                       (ws.dir / "ext.crn").string(),
                   ws.dir);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("rank: 2 (m = 2)") != std::string::npos);
  std::string ext = slurp(ws.dir / "ext.crn");
  CHECK(ext.find("Y <-> U + V ; kf = 5, kr = 125") != std::string::npos);
  // complexes serialize with species in declaration order
  CHECK(ext.find("X + U <-> 2 V + W ; kf = 25, kr = 125") != std::string::npos);

  // eta = 1: every added constant collapses to 1/eps
  auto r1 = run_cli("extend " + (ws.dir / "base.crn").string() + " --add " +
                        (ws.dir / "add.crn").string() + " --eps 0.5 --eta 1 --out " +
                        (ws.dir / "ext1.crn").string(),
                    ws.dir);
  CHECK(r1.exit_code == 0);
  std::string ext1 = slurp(ws.dir / "ext1.crn");
  CHECK(ext1.find("Y <-> U + V ; kf = 2, kr = 2") != std::string::npos);

  auto bad = run_cli("extend " + (ws.dir / "base.crn").string() + " --add " +
                         (ws.dir / "bad_add.crn").string() + " --out " +
                         (ws.dir / "nope.crn").string(),
                     ws.dir);
  CHECK(bad.exit_code == 4);
  CHECK(slurp(ws.dir / "stderr.txt").find("rank") != std::string::npos);

  // the emitted network is a valid input for the other subcommands
  auto sim = run_cli("simulate " + (ws.dir / "ext.crn").string() +
                         " --x0 1,1,1,0.1,0.1,1 --t-end 5 --out " + (ws.dir / "ext.csv").string(),
                     ws.dir);
  CHECK(sim.exit_code == 0);
  CHECK(sim.stdout_text.find("conservation drift") != std::string::npos);
}

TEST_CASE("cli verify: worked scenario end to end") {
  Workspace ws;
  auto r = run_cli("verify " + (ws.dir / "base.crn").string() + " --add " +
                       (ws.dir / "add.crn").string() +
                       " --eps 0.2 --y0 0,0,1 --out " + (ws.dir / "report.json").string(),
                   ws.dir);
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(slurp(ws.dir / "report.json"));
  CHECK(j["schema"] == 1);
  CHECK(j["rank_check"]["ok"] == true);
  CHECK(j["orbit"]["classification"] == "nondegenerate-stable");
  CHECK(j["conservation_drift"].get<double>() < 1e-5);
  CHECK(j["hausdorff_old_species"].get<double>() < 0.5);
  CHECK(j["new_species_ranges"]["U"]["peak_to_peak"].get<double>() < 0.5);

  // rank-deficient additions fail fast with exit 4
  auto bad = run_cli("verify " + (ws.dir / "base.crn").string() + " --add " +
                         (ws.dir / "bad_add.crn").string() + " --eps 0.2 --y0 1 --out " +
                         (ws.dir / "r2.json").string(),
                     ws.dir);
  CHECK(bad.exit_code == 4);
}

TEST_CASE("cli verify: eps sweep writes isolated reports") {
  Workspace ws;
  auto r = run_cli("verify " + (ws.dir / "base.crn").string() + " --add " +
                       (ws.dir / "add.crn").string() +
                       " --eps-list 0.2,0.1 --y0 0,0,1 --out " + (ws.dir / "sweep.json").string(),
                   ws.dir);
  CHECK(r.exit_code == 0);
  for (const char* name : {"sweep_eps0.2.json", "sweep_eps0.1.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(ws.dir / name));
    auto j = nlohmann::json::parse(slurp(ws.dir / name));
    CHECK(j["orbit"]["classification"] == "nondegenerate-stable");
  }
}
