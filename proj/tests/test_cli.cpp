#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#ifndef STABLEWALK_CLI_PATH
#error "STABLEWALK_CLI_PATH must point at the built CLI binary"
#endif

namespace fs = std::filesystem;

namespace {

const char* cli() { return STABLEWALK_CLI_PATH; }

fs::path work_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stablewalk_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& log) {
  std::ostringstream cmd;
  cmd << "\"" << cli() << "\" " << args << " > " << log.string() << " 2>&1";
  const int status = std::system(cmd.str().c_str());
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("limits subcommand writes the closed-form mid-window curve") {
  const auto dir = work_dir("limits");
  const int rc = run("limits --regime r3 --alpha 2 --beta 0 --c 0.5 --t 1 "
                     "--y-grid 0:1:0.05 --out " + dir.string(),
                     dir / "log.txt");
  CHECK(rc == 0);
  const auto csv = slurp(dir / "limits_r3.csv");
  REQUIRE(!csv.empty());

  int rows = 0;
  bool found_half = false;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("y,", 0) == 0) continue;
    ++rows;
    const auto comma = line.find(',');
    const double y = std::stod(line.substr(0, comma));
    const double v = std::stod(line.substr(comma + 1));
    if (std::abs(y - 0.5) < 1e-12) {
      found_half = true;
      CHECK(v == doctest::Approx(0.75).epsilon(1e-13));
    }
    CHECK(std::abs(v - (1.0 - (1.0 - y) * (1.0 - y))) < 1e-12);
  }
  CHECK(rows == 21);
  CHECK(found_half);
}

TEST_CASE("missing required flag exits 1 and names the flag") {
  const auto dir = work_dir("missing_alpha");
  SUBCASE("limits") {
    const int rc = run("limits --regime r3", dir / "log.txt");
    CHECK(rc == 1);
    CHECK(slurp(dir / "log.txt").find("--alpha") != std::string::npos);
  }
  SUBCASE("verify") {
    const int rc = run("verify --budget smoke", dir / "log.txt");
    CHECK(rc == 1);
    CHECK(slurp(dir / "log.txt").find("--alpha") != std::string::npos);
  }
}

TEST_CASE("invalid inputs map to exit code 1") {
  const auto dir = work_dir("invalid");
  CHECK(run("limits --regime r9 --alpha 2", dir / "a.txt") == 1);
  CHECK(run("limits --regime r3 --alpha 2 --y-grid 1:0:0.1", dir / "b.txt") ==
        1);
  CHECK(run("limits --regime r3 --alpha 2 --beta 0.5", dir / "c.txt") == 1);
  CHECK(run("nonsense --alpha 2", dir / "d.txt") == 1);
  CHECK(run("verify --alpha 1.5 --budget smoke", dir / "e.txt") == 1);
}

TEST_CASE("simulate subcommand emits a summary and per-path table") {
  const auto dir = work_dir("simulate");
  const int rc = run("simulate --alpha 2 --beta 0 --c 0.5 --n 64 --x 12 "
                     "--target 50 --windows 32 --seed 9 --out " + dir.string(),
                     dir / "log.txt");
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "simulate_summary.json"));
  const auto csv = slurp(dir / "paths.csv");
  REQUIRE(!csv.empty());
  // Header plus 50 sample rows.
  const auto rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 51);
  CHECK(csv.rfind("endpoint,running_max,weight,weight_h,min_32,", 0) == 0);
}

TEST_CASE("config file supplies defaults that flags override") {
  const auto dir = work_dir("config");
  {
    std::ofstream f(dir / "conf.ini");
    f << "alpha=2\nbeta=0\nc=0.5\nt=1\n";
  }
  // Config provides everything including the required --alpha.
  const int rc1 = run("limits --regime r3 --y-grid 0:1:0.5 --out " +
                          dir.string() + " --config " +
                          (dir / "conf.ini").string(),
                      dir / "log1.txt");
  CHECK(rc1 == 0);
  const auto first = slurp(dir / "limits_r3.csv");
  CHECK(first.find("t=1") != std::string::npos);

  // A flag beats the same key in the file: t = 2 halves the curve's slope.
  const int rc2 = run("limits --regime r3 --t 2 --y-grid 0:1:0.5 --out " +
                          dir.string() + " --config " +
                          (dir / "conf.ini").string(),
                      dir / "log2.txt");
  CHECK(rc2 == 0);
  const auto second = slurp(dir / "limits_r3.csv");
  CHECK(second.find("t=2") != std::string::npos);
  CHECK(first != second);
}

TEST_CASE("sweep subcommand writes both report formats") {
  const auto dir = work_dir("sweep");
  const int rc = run(
      "sweep --regime r3 --alpha 2 --beta 0 --c 0.5 --t 1 "
      "--triples 128:4:64,256:4:128,512:4:256 --budget-per-triple 150 "
      "--seed 77 --label quick --out " + dir.string(),
      dir / "log.txt");
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "quick_sweep.csv"));
  CHECK(fs::exists(dir / "quick_sweep.json"));
  const auto log = slurp(dir / "log.txt");
  CHECK(log.find("ks ladder:") != std::string::npos);
}

TEST_CASE("renewal subcommand reports the fitted growth exponent") {
  const auto dir = work_dir("renewal");
  const int rc = run("renewal --alpha 2 --beta 0 --c 0.5 --direction desc "
                     "--walks 800 --k-start 64 --n-max 256 --seed 5 --out " +
                         dir.string(),
                     dir / "log.txt");
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "renewal_descending.csv"));
  const auto log = slurp(dir / "log.txt");
  CHECK(log.find("exponent") != std::string::npos);
}
