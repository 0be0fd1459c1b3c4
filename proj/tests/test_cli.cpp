// End-to-end tests of the hsaicp binary: exit codes, report files, and
// campaign reproducibility.
#include "doctest.h"
#include "hsaicp/cloud_io.hpp"
#include "hsaicp/geometry.hpp"
#include "hsaicp/simulation.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using namespace hsaicp;

namespace {

const std::string kCli = HSAICP_CLI_PATH;
const fs::path kFixtures = HSAICP_FIXTURE_DIR;

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "hsaicp_cli_tests";
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd =
      kCli + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path make_source_cloud() {
  const fs::path path = work_dir() / "source.ply";
  write_cloud(synthetic_surface(800, 5), path, CloudFormat::PlyAscii);
  return path;
}

}  // namespace

TEST_CASE("cli: register of identical clouds succeeds with xi = 1 and no eps") {
  const fs::path cloud = make_source_cloud();
  const fs::path report_path = work_dir() / "report.json";
  const RunResult r = run_cli("register --data " + cloud.string() + " --model " +
                              cloud.string() + " --out " + report_path.string());
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(report_path));
  CHECK(j.at("xi").get<double>() == 1.0);
  CHECK(j.at("converged").get<bool>());
  CHECK_FALSE(j.contains("eps_r"));
  CHECK(j.at("algorithm") == "hsa");
}

TEST_CASE("cli: every algorithm is selectable") {
  const fs::path cloud = make_source_cloud();
  for (const std::string algo : {"icp", "ftricp", "wicp", "cticp"}) {
    CAPTURE(algo);
    const fs::path report_path = work_dir() / ("report_" + algo + ".json");
    const RunResult r = run_cli("register --data " + cloud.string() + " --model " +
                                cloud.string() + " --algo " + algo + " --out " +
                                report_path.string());
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(report_path));
    CHECK(j.at("algorithm") == algo);
  }
  CHECK(run_cli("register --data " + cloud.string() + " --model " + cloud.string() +
                " --algo warp")
            .exit_code == 1);
}

TEST_CASE("cli: unknown flag exits 1 with usage on stderr") {
  const RunResult r = run_cli("register --nonsense 1");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("cli: malformed data file exits 2 naming the location") {
  const fs::path cloud = make_source_cloud();
  const RunResult r =
      run_cli("register --data " + (kFixtures / "count_mismatch.ply").string() +
              " --model " + cloud.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("count_mismatch.ply") != std::string::npos);
  CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("cli: non-convergence exits 3 but still writes the report") {
  const fs::path cloud = make_source_cloud();
  const fs::path moved = work_dir() / "moved.ply";
  RigidTransform shift;
  shift.translation = Point3(0.5, -0.3, 0.2);
  write_cloud(apply_transform(load_cloud(cloud), shift), moved, CloudFormat::PlyAscii);

  const fs::path report_path = work_dir() / "hard_report.json";
  const RunResult r = run_cli("register --data " + cloud.string() + " --model " +
                              moved.string() + " --max-iters 1 --out " +
                              report_path.string());
  CHECK(r.exit_code == 3);
  const auto j = nlohmann::json::parse(slurp(report_path));
  CHECK_FALSE(j.at("converged").get<bool>());
  CHECK(j.at("iterations").get<int>() == 1);
}

TEST_CASE("cli: init file is honored and round-trips through the report") {
  const fs::path data = make_source_cloud();
  const RigidTransform truth = random_perturbation(20.0, 10.0, 0.05, 33);
  const fs::path model = work_dir() / "model.ply";
  write_cloud(apply_transform(load_cloud(data), truth), model, CloudFormat::PlyAscii);

  const fs::path init_path = work_dir() / "init.txt";
  {
    std::ofstream out(init_path);
    out.precision(17);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << truth.rotation(r, c) << ' ';
      out << truth.translation(r) << '\n';
    }
    out << "0 0 0 1\n";
  }

  const fs::path report_path = work_dir() / "init_report.json";
  const RunResult r = run_cli("register --data " + data.string() + " --model " +
                              model.string() + " --init " + init_path.string() +
                              " --out " + report_path.string());
  CHECK(r.exit_code == 0);
  const RegistrationReport report = parse_report(slurp(report_path));
  CHECK((report.transform.rotation - truth.rotation).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((report.transform.translation - truth.translation).norm() <= 1e-9);
}

TEST_CASE("cli: aligned output cloud is written") {
  const fs::path cloud = make_source_cloud();
  const fs::path aligned = work_dir() / "aligned.xyz";
  const RunResult r = run_cli("register --data " + cloud.string() + " --model " +
                              cloud.string() + " --aligned-out " + aligned.string());
  CHECK(r.exit_code == 0);
  CHECK(load_cloud(aligned).size() == 800);
}

TEST_CASE("cli: simulate writes the pair, truth, and meta with xi_true") {
  const fs::path cloud = make_source_cloud();
  const fs::path dir = work_dir() / "simout";
  const RunResult r = run_cli("simulate --source " + cloud.string() +
                              " --n-cut 0 --noise-sigma 0 --seed 3 --out-dir " +
                              dir.string());
  CHECK(r.exit_code == 0);
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  CHECK(meta.at("xi_true").get<double>() == doctest::Approx(0.95));
  CHECK(load_cloud(dir / "data.ply").size() == 760);
  CHECK(load_cloud(dir / "model.ply").size() == 760);
  // truth.json holds a valid transform
  const auto truth = nlohmann::json::parse(slurp(dir / "truth.json"));
  CHECK(truth.at("rotation").size() == 9);
}

TEST_CASE("cli: simulate with an oversized cut exits 2") {
  const fs::path cloud = make_source_cloud();
  const RunResult r = run_cli("simulate --source " + cloud.string() +
                              " --n-cut 500 --out-dir " + (work_dir() / "x").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("n_cut") != std::string::npos);
}

TEST_CASE("cli: bench is reproducible byte for byte") {
  const fs::path cloud = make_source_cloud();
  const fs::path out_a = work_dir() / "camp_a.json";
  const fs::path out_b = work_dir() / "camp_b.json";
  const std::string common = "bench --source " + cloud.string() +
                             " --overlaps 0.9 --trials 2 --algos hsa,icp --seed 17 ";
  const RunResult a = run_cli(common + "--out " + out_a.string());
  const RunResult b = run_cli(common + "--out " + out_b.string());
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);

  const std::string csv_a = slurp(work_dir() / "camp_a.csv");
  const std::string csv_b = slurp(work_dir() / "camp_b.csv");
  CHECK_FALSE(csv_a.empty());
  CHECK(csv_a == csv_b);

  const auto j = nlohmann::json::parse(slurp(out_a));
  CHECK(j.at("campaigns").size() == 1);
  CHECK(j.at("campaigns")[0].at("summaries").size() == 2);
}

TEST_CASE("cli: bench rejects an unknown algorithm with exit 1") {
  const fs::path cloud = make_source_cloud();
  const RunResult r = run_cli("bench --source " + cloud.string() +
                              " --overlaps 0.9 --trials 1 --algos warp --out " +
                              (work_dir() / "nope.json").string());
  CHECK(r.exit_code == 1);
}
