#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cutform/cli.hpp"

using namespace cutform;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cutform_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "cfg.json";
  std::ofstream(p) << text;
  return p;
}

int lines(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("configuration errors exit with 3") {
  const auto dir = scratch("config");
  CHECK(run_cli({}) == ConfigurationError);
  CHECK(run_cli({"frobnicate"}) == ConfigurationError);
  CHECK(run_cli({"verify", "--mesh", "abc"}) == ConfigurationError);
  CHECK(run_cli({"verify", "--config", (dir / "missing.json").string()}) == ConfigurationError);
  CHECK(run_cli({"verify", "--config", write_config(dir, "{\"bogus\": 1}").string()}) == ConfigurationError);
  CHECK(run_cli({"verify", "--config", write_config(dir, "{\"meshes\": \"many\"}").string()}) ==
        ConfigurationError);
  CHECK(run_cli({"verify", "--config", write_config(dir, "{not json").string()}) == ConfigurationError);
  CHECK(run_cli({"hessian-check", "--geometry", "hexagon", "--out", dir.string()}) == ConfigurationError);
  CHECK(run_cli({"verify", "--threads", "0", "--out", dir.string()}) == ConfigurationError);
}

TEST_CASE("verify writes its tables and the resolved config") {
  const auto dir = scratch("verify");
  const auto cfg = write_config(dir, R"({"geometries": ["circle"], "meshes": [16]})");
  REQUIRE(run_cli({"verify", "--config", cfg.string(), "--out", (dir / "run").string()}) == Success);
  const auto table = read(dir / "run" / "verify.csv");
  CHECK(lines(table) == 5);
  CHECK(table.find("N/A") != std::string::npos);
  const auto resolved = read(dir / "run" / "config.json");
  CHECK(resolved.find("\"tol_exact\"") != std::string::npos);
  CHECK(resolved.find("16") != std::string::npos);
  CHECK(fs::exists(dir / "run" / "gradients"));

  // Identical configuration gives byte-identical tables.
  REQUIRE(run_cli({"verify", "--config", cfg.string(), "--out", (dir / "again").string()}) == Success);
  CHECK(read(dir / "again" / "verify.csv") == table);
}

TEST_CASE("tolerance breach exits with 2 and still writes the table") {
  const auto dir = scratch("breach");
  const auto cfg = write_config(dir, R"({"geometries": ["circle"], "meshes": [16], "tol_exact": 1e-30,
                                         "functionals": ["J1"], "write_gradients": false})");
  CHECK(run_cli({"verify", "--config", cfg.string(), "--out", dir.string()}) == ToleranceBreach);
  CHECK(fs::exists(dir / "verify.csv"));
}

TEST_CASE("CUTFORM_OUT overrides --out") {
  const auto dir = scratch("env");
  ::setenv("CUTFORM_OUT", (dir / "from_env").string().c_str(), 1);
  const int code = run_cli({"hessian-check", "--mesh", "16", "--out", (dir / "from_flag").string()});
  ::unsetenv("CUTFORM_OUT");
  CHECK(code == Success);
  CHECK(fs::exists(dir / "from_env" / "config.json"));
  CHECK(fs::exists(dir / "from_env" / "hessian.csv"));
  CHECK(!fs::exists(dir / "from_flag"));
}

TEST_CASE("isovol, reinit and evolve commands") {
  const auto dir = scratch("demos");
  CHECK(run_cli({"isovol", "--out", (dir / "isovol").string()}) == Success);
  CHECK(fs::exists(dir / "isovol" / "isovol.vtk"));
  CHECK(fs::exists(dir / "isovol" / "parts.csv"));
  CHECK(read(dir / "isovol" / "isovol.vtk").rfind("# vtk DataFile Version 3.0", 0) == 0);

  CHECK(run_cli({"reinit", "--mesh", "32", "--out", (dir / "reinit").string()}) == Success);
  CHECK(fs::exists(dir / "reinit" / "reinit.csv"));

  const auto cfg = write_config(dir, R"({"steps": 10})");
  CHECK(run_cli({"evolve", "--config", cfg.string(), "--mesh", "32", "--out", (dir / "evolve").string()}) ==
        Success);
  CHECK(lines(read(dir / "evolve" / "encroachment.csv")) == 3);
}

TEST_CASE("optimize writes a history row per iteration") {
  const auto dir = scratch("optimize");
  const auto cfg = write_config(dir, R"({"problem": "volume", "max_iters": 12, "vtk_every": 5})");
  const int code = run_cli({"optimize", "--config", cfg.string(), "--mesh", "24", "--out", dir.string()});
  CHECK((code == Success || code == ToleranceBreach));
  const auto history = read(dir / "history.csv");
  CHECK(lines(history) == 1 + 12);
  CHECK(fs::exists(dir / "final.vtk"));
  CHECK(fs::exists(dir / "snapshots"));
  CHECK(fs::exists(dir / "summary.csv"));

  CHECK(run_cli({"optimize", "--config", write_config(dir, R"({"problem": "bridge"})").string(), "--out",
                 dir.string()}) == ConfigurationError);
}

TEST_CASE("numerical failure exits with 4") {
  const auto dir = scratch("failure");
  const auto cfg = write_config(dir, R"({"problem": "volume", "max_iters": 60, "rho0": 1e308, "rho_max": 1e308})");
  CHECK(run_cli({"optimize", "--config", cfg.string(), "--mesh", "16", "--out", dir.string()}) == NumericalError);
  CHECK(fs::exists(dir / "failure.txt"));
}
