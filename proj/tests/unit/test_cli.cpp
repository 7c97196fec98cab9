#include <doctest.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rsfbm/cli.h"
#include "rsfbm/io.h"

using namespace rsfbm;
using namespace rsfbm::cli;

namespace {

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rsfbm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("rsfbm_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("shortest round-trip doubles") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1e-300) == "1e-300");
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(io::format_double(-INFINITY) == "-inf");
    for (double v : {1.0 / 3.0, 2.0 / 7.0 * 1e17, 5e-324}) {
      const std::string s = io::format_double(v);
      double back = 0.0;
      std::from_chars(s.data(), s.data() + s.size(), back);
      CHECK(back == v);
    }
  }

  TEST_CASE("fnv-1a reference values") {
    CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("csv layout") {
    io::CsvTable t;
    t.comments = {"seed=1"};
    t.columns = {"x", "y"};
    t.rows = {{0.5, 2.0}};
    CHECK(io::to_csv(t) == "# seed=1\nx,y\n0.5,2\n");
  }

  TEST_CASE("overrides and unknown keys") {
    Json c = default_config();
    apply_override(c, "model.rho", "0.3");
    CHECK(c["model"]["rho"] == 0.3);
    apply_override(c, "model.type", "dirac");
    CHECK(c["model"]["type"] == "dirac");
    apply_override(c, "moments.times", "[1, 2]");
    CHECK(c["moments"]["times"].size() == 2);
    CHECK_THROWS_AS(apply_override(c, "model.bogus", "1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "hurst", "abc"), ConfigError);
    CHECK_THROWS_AS(merge_into(c, Json::parse(R"({"space": {"M": 3}})")), ConfigError);
    const std::string h1 = config_hash(c);
    apply_override(c, "seed", "1");
    CHECK(config_hash(c) != h1);
  }

  TEST_CASE("model construction names the violated constraint") {
    Json m = default_config()["model"];
    m["type"] = "generalized_gamma";
    m["nu"] = 0.3;
    CHECK_THROWS_WITH(model_from(m), doctest::Contains("nu"));
    m["type"] = "unknown";
    CHECK_THROWS_AS(model_from(m), ConfigError);
  }

  TEST_CASE("phi-k sweep against Mittag-Leffler, exit 0") {
    const auto dir = fresh_dir("phik");
    const auto r = run_cli({"phi-k", "--beta", "0.5", "-o", dir.string()});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "run_phi_k.csv"));
    const auto side = Json::parse(slurp(dir / "run_phi_k.json"));
    CHECK(side["pass"] == true);
    CHECK(side["config"]["phi_k"]["beta"] == 0.5);
    CHECK(side.contains("config_hash"));
    CHECK(slurp(dir / "run_phi_k.csv").rfind("# command=phi-k\n# config_hash=", 0) == 0);
  }

  TEST_CASE("ito-check with z^2 under a Dirac law") {
    const auto dir = fresh_dir("ito");
    const auto r = run_cli({"ito-check", "--model.type", "dirac", "--n_paths", "2000", "--threads", "1", "-o",
                            dir.string()});
    CHECK(r.code == 0);
    const auto side = Json::parse(slurp(dir / "run_ito_check.json"));
    CHECK(std::abs(side["results"]["quadrature_residual"].get<double>()) < 1e-10);
  }

  TEST_CASE("solve at t = 0 returns the datum samples") {
    const auto dir = fresh_dir("solve0");
    const auto r = run_cli({"solve", "--t", "0", "--space.N", "256", "-o", dir.string()});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(dir / "run_solve.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
      const auto comma = line.find(',');
      const double x = std::stod(line.substr(0, comma));
      const double u = std::stod(line.substr(comma + 1));
      CHECK(u == std::exp(-0.5 * x * x));
      ++rows;
    }
    CHECK(rows == 256);
  }

  TEST_CASE("exit codes for configuration errors") {
    const auto dir = fresh_dir("bad");
    auto r = run_cli({"phi-k", "--no-such-key", "1", "-o", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("no_such_key") != std::string::npos);
    r = run_cli({"frobnicate", "-o", dir.string()});
    CHECK(r.code == 2);
    r = run_cli({"moments", "--hurst", "0.3", "--integrand.type", "power_law", "--integrand.beta", "0.5", "-o",
                 dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("constant") != std::string::npos);
    r = run_cli({"solve", "--model.type", "bender_butko", "--method", "fk", "-o", dir.string()});
    CHECK(r.code == 2);
  }

  TEST_CASE("tolerance failures exit with 1") {
    const auto dir = fresh_dir("tol");
    const auto r = run_cli({"phi-k", "--tolerance", "1e-30", "-o", dir.string()});
    CHECK(r.code == 1);
  }

  TEST_CASE("artifacts do not depend on the thread count") {
    const auto d1 = fresh_dir("repro1");
    const auto d2 = fresh_dir("repro2");
    const std::vector<std::string> common{"simulate", "--model.type", "generalized_gamma", "--model.rho", "2", "--n_paths", "300",
                                          "--time.steps", "32"};
    auto a = common;
    a.insert(a.end(), {"--threads", "1", "-o", d1.string()});
    auto b = common;
    b.insert(b.end(), {"--threads", "2", "-o", d2.string()});
    REQUIRE(run_cli(a).code == 0);
    REQUIRE(run_cli(b).code == 0);
    int compared = 0;
    for (const auto& e : std::filesystem::directory_iterator(d1)) {
      const auto name = e.path().filename().string();
      if (name.find("timing") != std::string::npos) continue;
      CHECK(slurp(e.path()) == slurp(d2 / name));
      ++compared;
    }
    CHECK(compared >= 2);
  }
}
