#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ounls/config.hpp"
#include "ounls/io.hpp"

using namespace ounls;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ounls_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config resolves to the documented defaults") {
  const auto cfg = parse_config("");
  CHECK(cfg.scenario == "simulate");
  CHECK(cfg.model.model == Model::NonDiv);
  CHECK(cfg.model.d == 1);
  CHECK(cfg.model.p == 4);
  CHECK(cfg.grid.n_x == 256);
  CHECK(cfg.grid.n_alpha == 64);
  const auto j = config_to_json(cfg);
  CHECK(j["grid"]["box_half_length"].get<double>() == doctest::Approx(16.0 * kPi));
  const auto cfg2 = parse_config("[model]\nd = 2\n");
  CHECK(config_to_json(cfg2)["grid"]["box_half_length"].get<double>() == doctest::Approx(8.0 * kPi));
}

TEST_CASE("config text, comments, units and overrides") {
  const auto cfg = parse_config(
      "# comment\n[model]\nmodel = div  # trailing\np = 2 ; also\nsign = focusing\n; another\n"
      "[grid]\nbox_half_length = 4pi\n[run]\nhorizon = 2.5\npairs = 6:6, 4:inf\n",
      {"grid.n_x=128", "dt=0.002"});
  CHECK(cfg.model.model == Model::Div);
  CHECK(cfg.model.p == 2);
  CHECK(cfg.model.sign == Sign::Focusing);
  CHECK(cfg.grid.box_half_length == doctest::Approx(4.0 * kPi));
  CHECK(cfg.grid.n_x == 128);
  CHECK(cfg.dt == doctest::Approx(0.002));
  REQUIRE(cfg.pairs.size() == 2);
  CHECK(std::isinf(cfg.pairs[1].r));
}

TEST_CASE("config errors name the problem") {
  CHECK(error_of("[model]\np = 3\n").find("p must be a positive even integer, got 3") != std::string::npos);
  CHECK(error_of("", {"model.p=0"}).find("positive even integer") != std::string::npos);
  CHECK(error_of("", {"run.scenario=strichartz", "model.d=2", "run.pairs=2:inf"}) != "");
  CHECK(error_of("", {"run.scenario=strichartz", "model.d=1", "run.pairs=4:4"}) != "");
  CHECK(error_of("[model]\ncolour = red\n").find("unknown key") != std::string::npos);
  CHECK(error_of("[physics]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("", {"seed=3"}).find("ambiguous") != std::string::npos);
  CHECK(error_of("", {"initial.seed=3"}).find("random") != std::string::npos);
  CHECK(error_of("", {"grid.n_x=100"}) != "");
  CHECK(error_of("", {"run.dt=abc"}) != "");
  CHECK_THROWS_AS(parse_config_file("/nonexistent/ounls.cfg"), ConfigError);
}

TEST_CASE("random initial seed defaults to the run seed") {
  const auto cfg = parse_config("[initial]\nkind = random\n", {"run.seed=42"});
  CHECK(std::get<RandomRecipe>(cfg.initial).seed == 42);
  const auto keys = config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "run.ladder") != keys.end());
}

TEST_CASE("diagnostics CSV header, rows and special values") {
  std::vector<DiagnosticsRecord> recs(2);
  recs[0].mass = 1.0;
  recs[1].time = 0.5;
  recs[1].virial = std::numeric_limits<double>::quiet_NaN();
  recs[1].energy = -std::numeric_limits<double>::infinity();
  const auto csv = diagnostics_csv(recs);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kDiagnosticsHeader);
  std::getline(in, line);
  CHECK(line == "0,1,0,0,0,0,0,0,0,0");
  std::getline(in, line);
  CHECK(line == "0.5,0,-inf,0,nan,0,0,0,0,0");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(diagnostics_csv({}), std::invalid_argument);
}

TEST_CASE("report JSON lines carry checks and ensembles") {
  ScenarioReport rep;
  rep.scenario = "demo";
  rep.checks.push_back({"a", true, 1.0, 2.0, ""});
  rep.ensembles.push_back({"k0", {}, {}, std::numeric_limits<double>::infinity(), 0.15, false});
  const auto text = report_jsonl(rep);
  std::istringstream in(text);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(nlohmann::json::parse(l1)["check"] == "a");
  CHECK(nlohmann::json::parse(l2)["relative_change"] == "inf");
  CHECK_FALSE(rep.pass());
}

TEST_CASE("git blob hashes match git hash-object") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("snapshot round trip") {
  const auto dir = scratch("snapshot");
  DiscretizationSpec s;
  s.n_x = 16;
  s.n_alpha = 4;
  const Discretization disc(ModelSpec{Model::NonDiv, 2, 2, Sign::Defocusing, 1.0}, s);
  Field f = disc.make_field();
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = {0.5 * i, -1.0 / (i + 1.0)};
  const auto shape = snapshot_shape(disc);
  CHECK(shape == std::vector<std::uint64_t>{16, 16, 4});
  write_snapshot(dir / "u.bin", f, shape);
  const auto snap = read_snapshot(dir / "u.bin");
  CHECK(snap.shape == shape);
  CHECK(snap.data == f.data);
  CHECK(fs::file_size(dir / "u.bin") == 16 + 8 + 24 + 16 * f.data.size());
  write_atomic(dir / "bad.bin", "OUNLS-FIELD-v1");
  CHECK_THROWS_AS(read_snapshot(dir / "bad.bin"), IoError);
}

TEST_CASE("unwritable destinations raise IoError") {
  const auto dir = scratch("unwritable");
  write_atomic(dir / "file", "x");
  CHECK_THROWS_AS(write_atomic(dir / "file" / "sub" / "out.csv", "y"), IoError);
}

TEST_CASE("emitted reports are byte-identical across reruns") {
  auto cfg = parse_config("", {"run.scenario=simulate", "grid.n_x=128", "grid.box_half_length=8pi",
                               "grid.n_alpha=8", "run.horizon=0.1", "run.dt=0.01", "run.samples=2"});
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const auto ma = emit_report(run_scenario(cfg), cfg, a, "t0");
  const auto mb = emit_report(run_scenario(cfg), cfg, b, "t0");
  REQUIRE(ma.outputs.size() == mb.outputs.size());
  for (std::size_t i = 0; i < ma.outputs.size(); ++i) {
    CHECK(ma.outputs[i] == mb.outputs[i]);
    CHECK(slurp(a / ma.outputs[i].first) == slurp(b / mb.outputs[i].first));
    CHECK(git_blob_hash(slurp(a / ma.outputs[i].first)) == ma.outputs[i].second);
  }
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["tool_version"] == kToolVersion);
  CHECK(manifest["config"]["scenario"] == "simulate");
  CHECK(fs::exists(a / "diagnostics.csv"));
}
