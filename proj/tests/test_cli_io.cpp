#include "aks/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace aks;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("aksflow_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AKS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status >= 0 ? (status >> 8) & 0xff : -1;
}

}  // namespace

TEST_CASE("random_initial is deterministic and valid") {
  SUBCASE("same seed, same element") {
    const LoopElement a = random_initial(2, 2, 1234);
    const LoopElement b = random_initial(2, 2, 1234);
    CHECK(distance(a, b) == 0.0);
    CHECK(serialize(a) == serialize(b));
    const LoopElement c = random_initial(2, 2, 1235);
    CHECK(distance(a, c) > 0.0);
  }

  SUBCASE("validation sweep") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const LoopElement x = random_initial(2, 1 + seed % 3, seed);
      CHECK(validate(x).all_pass);
      CHECK(x.max_abs() <= 1.0);
    }
  }

  SUBCASE("d = 0 spans degrees 0 and 1 only") {
    const LoopElement x = random_initial(3, 0, 7);
    CHECK(x.lo() == 0);
    CHECK(x.hi() == 1);
    CHECK(x.size() == 6);
  }
}

TEST_CASE("config round-trips through parse and serialize") {
  RunConfig cfg;
  cfg.n = 2;
  cfg.d = 2;
  cfg.rule = Rule::Admissible;
  cfg.z0 = 1.25;
  cfg.h = 2e-3;
  cfg.seed = 99;
  cfg.init = InitKind::Explicit;
  cfg.grid_min = {0.0, 0.0};
  cfg.grid_max = {0.3, 0.2};
  cfg.spacing = {0.1, 0.1};
  cfg.periods = {{0.1, 0.0}, {0.0, 0.2}};
  RMatrix x1 = RMatrix::Zero(4, 4);
  x1(0, 2) = 1.0;
  x1(2, 0) = -1.0;
  cfg.matrices[1] = x1;
  cfg.matrices[-1] = 0.5 * x1;

  const std::string text = serialize_config(cfg);
  const RunConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.matrices.size() == 2);
  CHECK(back.periods.size() == 2);
  CHECK(back.rule == Rule::Admissible);
}

TEST_CASE("config parse errors carry line diagnostics") {
  SUBCASE("unknown key") {
    try {
      parse_config("n = 2\nbogus = 1\n");
      FAIL("expected throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("negative d is rejected") {
    CHECK_THROWS(parse_config("d = -1\n"));
  }

  SUBCASE("bad clifford radii are rejected") {
    CHECK_THROWS(parse_config("init = clifford\nclifford_a = 0.6\nclifford_b = 0.9\n"));
  }

  SUBCASE("unterminated matrix block") {
    CHECK_THROWS(parse_config("matrix X[1] 4 4\n0 0 0 0\n"));
  }

  SUBCASE("misaligned grid") {
    const RunConfig cfg = parse_config("grid_min = 0 0\ngrid_max = 1 1\nspacing = 0.3 0.3\n");
    CHECK_THROWS(cfg.grid());
  }
}

TEST_CASE("explicit initial condition honors the matrix blocks") {
  RunConfig cfg;
  cfg.init = InitKind::Explicit;
  cfg.d = 1;
  RMatrix x1 = RMatrix::Zero(4, 4);
  x1(0, 2) = 2.0;
  x1(2, 0) = -2.0;
  cfg.matrices[1] = x1;
  const LoopElement x = cfg.initial_condition();
  CHECK(x.lo() == -1);
  CHECK(x.hi() == 1);
  CHECK(x.coeff(1).real()(0, 2) == 2.0);
  CHECK(validate(x).all_pass);
}

TEST_CASE("run drivers produce deterministic artifacts") {
  const auto dir = fresh_dir("drivers");
  RunConfig cfg;
  cfg.n = 2;
  cfg.d = 1;
  cfg.rule = Rule::Simple;
  cfg.h = 2e-3;
  cfg.seed = 5;
  cfg.grid_min = {0.0, 0.0};
  cfg.grid_max = {0.2, 0.1};
  cfg.spacing = {0.05, 0.05};
  cfg.out = (dir / "a").string();

  REQUIRE(run_flow(cfg) == 0);
  CHECK(std::filesystem::exists(dir / "a" / "flow_residuals.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "flow_elements.txt"));

  cfg.out = (dir / "b").string();
  REQUIRE(run_flow(cfg) == 0);
  CHECK(read_file(dir / "a" / "flow_residuals.csv") ==
        read_file(dir / "b" / "flow_residuals.csv"));
  CHECK(read_file(dir / "a" / "flow_elements.txt") ==
        read_file(dir / "b" / "flow_elements.txt"));

  SUBCASE("frame driver") {
    cfg.out = (dir / "frame").string();
    REQUIRE(run_frame(cfg) == 0);
    const std::string csv = read_file(dir / "frame" / "immersion.csv");
    CHECK(csv.rfind("t1,t2,f1,f2,f3,f4,imm_det,omega_residual,eta_residual\n", 0) == 0);
    CHECK(std::filesystem::exists(dir / "frame" / "mesh.txt"));
  }

  SUBCASE("spectral driver") {
    cfg.out = (dir / "spec").string();
    REQUIRE(run_spectral(cfg) == 0);
    const std::string report = read_file(dir / "spec" / "spectral_report.txt");
    CHECK(report.find("c_0:") != std::string::npos);
    CHECK(report.find("regular:") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "spec" / "spectral_drift.csv"));
  }

  SUBCASE("period driver") {
    cfg.out = (dir / "period").string();
    cfg.periods = {{0.1, 0.0}};
    REQUIRE(run_period(cfg) == 0);
    const std::string report = read_file(dir / "period" / "period_0.txt");
    CHECK(report.find("kind ") != std::string::npos);
  }

  std::filesystem::remove_all(dir);
}

TEST_CASE("cli end to end") {
  const auto dir = fresh_dir("cli");
  const auto config_path = dir / "run.cfg";

  RunConfig cfg;
  cfg.grid_max = {0.1, 0.05};
  cfg.spacing = {0.05, 0.05};
  cfg.h = 5e-3;
  cfg.out = (dir / "out").string();
  {
    std::ofstream os(config_path, std::ios::binary);
    os << serialize_config(cfg);
  }

  SUBCASE("validate-config echoes the canonical form") {
    CHECK(run_cli("validate-config --config " + config_path.string()) == 0);
  }

  SUBCASE("flow subcommand writes artifacts and exits 0") {
    CHECK(run_cli("flow --config " + config_path.string()) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "flow_residuals.csv"));
  }

  SUBCASE("seed override changes the output") {
    CHECK(run_cli("flow --config " + config_path.string() + " --out " +
                  (dir / "s1").string() + " --seed 11") == 0);
    CHECK(run_cli("flow --config " + config_path.string() + " --out " +
                  (dir / "s2").string() + " --seed 12") == 0);
    CHECK(read_file(dir / "s1" / "flow_elements.txt") !=
          read_file(dir / "s2" / "flow_elements.txt"));
  }

  SUBCASE("step-size and z0 overrides are honored") {
    CHECK(run_cli("flow --config " + config_path.string() + " --out " +
                  (dir / "h1").string() + " --h 0.005") == 0);
    CHECK(run_cli("flow --config " + config_path.string() + " --out " +
                  (dir / "h2").string() + " --h 0.0025") == 0);
    // different integrator error, different residual table
    CHECK(read_file(dir / "h1" / "flow_residuals.csv") !=
          read_file(dir / "h2" / "flow_residuals.csv"));
    CHECK(run_cli("frame --config " + config_path.string() + " --out " +
                  (dir / "z1").string() + " --z0 1.5") == 0);
    CHECK(run_cli("frame --config " + config_path.string() + " --out " +
                  (dir / "z2").string() + " --z0 0.5") == 0);
    CHECK(read_file(dir / "z1" / "mesh.txt") != read_file(dir / "z2" / "mesh.txt"));
  }

  SUBCASE("malformed config exits 2") {
    const auto bad = dir / "bad.cfg";
    {
      std::ofstream os(bad, std::ios::binary);
      os << "d = -1\n";
    }
    CHECK(run_cli("flow --config " + bad.string()) == 2);
  }

  SUBCASE("missing subcommand exits 2") {
    CHECK(run_cli("") == 2);
  }

  SUBCASE("clifford golden subcommand") {
    const auto cc = dir / "clifford.cfg";
    {
      RunConfig c;
      c.init = InitKind::Clifford;
      c.grid_min = {0.0, 0.0};
      c.grid_max = {0.62831853071795862, 0.62831853071795862};
      c.spacing = {0.062831853071795864, 0.062831853071795864};
      c.h = 1e-3;
      c.out = (dir / "cliff").string();
      std::ofstream os(cc, std::ios::binary);
      os << serialize_config(c);
    }
    CHECK(run_cli("clifford --config " + cc.string()) == 0);
    CHECK(std::filesystem::exists(dir / "cliff" / "mesh.txt"));
    const std::string mesh = read_file(dir / "cliff" / "mesh.txt");
    CHECK(mesh.rfind("mesh 11 11 4\n", 0) == 0);
  }

  std::filesystem::remove_all(dir);
}
