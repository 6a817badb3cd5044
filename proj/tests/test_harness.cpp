#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "layerpot/cli.hpp"
#include "test_support.hpp"

using namespace layerpot;
using namespace layerpot::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("layerpot_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string config_path(const std::string& name) { return std::string(LAYERPOT_CONFIG_DIR) + "/" + name; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LAYERPOT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

TEST(Config, MinimalDiskDefaults) {
  const RunConfig c = parse_config(R"({"components": [{"kind": "circle", "radius": 1.0}]})");
  ASSERT_EQ(c.curves.size(), 1u);
  EXPECT_EQ(c.nodes, std::vector<Index>{128});
  EXPECT_EQ(c.tolerance, 1e-7);
  EXPECT_FALSE(c.problem.has_value());
  EXPECT_FALSE(c.alpha.has_value());
  EXPECT_EQ(c.curves[0].orientation, Orientation::positive);
}

TEST(Config, FullSchema) {
  const RunConfig c = parse_config(R"({
    "nodes": 64,
    "components": [
      {"kind": "ellipse", "center": [1, 0], "semi_axes": [3, 2], "nodes": 96},
      {"kind": "fourier", "x_cos": [0, 0.5], "y_sin": [0, 0.4], "center": [1, 0], "orientation": "negative"}
    ],
    "problem": "dirichlet-ext", "data": "fourier:3", "tolerance": 1e-8, "alpha": 0.5, "output": "out"})");
  EXPECT_EQ(c.nodes, (std::vector<Index>{96, 64}));
  EXPECT_EQ(c.curves[0].kind, CurveKind::ellipse);
  EXPECT_EQ(c.curves[0].semi_a, 3.0);
  EXPECT_EQ(c.curves[1].orientation, Orientation::negative);
  EXPECT_EQ(*c.problem, Problem::dirichlet_ext);
  EXPECT_EQ(c.data->kind, DataSpec::Kind::fourier);
  EXPECT_EQ(c.data->index, 3);
  EXPECT_EQ(c.tolerance, 1e-8);
  EXPECT_EQ(*c.alpha, 0.5);
  EXPECT_EQ(c.output, "out");
  const BoundaryMesh m = build_mesh(c.curves, c.nodes);
  EXPECT_EQ(topology_of(m).kappa_minus, 1);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
      return e.what();
    }
    ADD_FAILURE() << "accepted: " << text;
    return {};
  };
  EXPECT_NE(message(R"({"components": [{"kind": "circle", "radius": 1, "orientation": "clockwise"}]})")
                .find("components[0].orientation"),
            std::string::npos);
  EXPECT_NE(message(R"({"components": [{"kind": "circle"}]})").find("radius"), std::string::npos);
  EXPECT_NE(message(R"({"components": [{"kind": "spline"}]})").find("kind"), std::string::npos);
  EXPECT_NE(message(R"({"components": []})").find("components"), std::string::npos);
  EXPECT_NE(message(R"({"components": [{"kind": "circle", "radius": 1}], "alpha": 1.5})").find("alpha"),
            std::string::npos);
  EXPECT_NE(message("{not json").find("parse error"), std::string::npos);
  EXPECT_ERROR_KIND(load_config("/nonexistent/layerpot.json"), ErrorKind::ConfigError);
}

TEST(Config, HadamardOnlyWithInteriorProblems) {
  EXPECT_ERROR_KIND(parse_config(R"({"components": [{"kind": "circle", "radius": 1}],
                                     "problem": "dirichlet-ext", "data": "hadamard:6"})"),
                    ErrorKind::ConfigError);
  RunConfig c = parse_config(R"({"components": [{"kind": "circle", "radius": 1}], "data": "hadamard:6"})");
  c.problem = Problem::neumann_ext;
  EXPECT_ERROR_KIND(validate(c), ErrorKind::ConfigError);
  c.problem = Problem::neumann_int;
  EXPECT_NO_THROW(validate(c));
  c.problem = Problem::dirichlet_int;
  EXPECT_NO_THROW(validate(c));
}

TEST(DataSpecs, Parsing) {
  EXPECT_EQ(parse_data_spec("constant:2.5").value, 2.5);
  EXPECT_EQ(parse_data_spec("indicator:1").kind, DataSpec::Kind::indicator);
  EXPECT_EQ(parse_data_spec("csv:/tmp/x.csv").path, "/tmp/x.csv");
  EXPECT_ERROR_KIND(parse_data_spec("fourier"), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(parse_data_spec("fourier:x"), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(parse_data_spec("fourier:2x"), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(parse_data_spec("wave:2"), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(parse_data_spec("hadamard:0"), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(parse_problem("robin"), ErrorKind::ConfigError);
}

TEST(DataSpecs, Generation) {
  const BoundaryMesh m = build_mesh(annulus(), 32);
  EXPECT_EQ(make_data(m, parse_data_spec("indicator:1")), curve_indicator(m, 1));
  EXPECT_ERROR_KIND(make_data(m, parse_data_spec("indicator:2")), ErrorKind::ConfigError);
  const GridFunction f = make_data(m, parse_data_spec("fourier:2"));
  EXPECT_NEAR(f[3], std::cos(2 * polar_angle(m.node(3))), 1e-15);
  const GridFunction h = make_data(m, parse_data_spec("hadamard:2"));
  const double t = polar_angle(m.node(5));
  EXPECT_NEAR(h[5], std::cos(2 * t) + std::cos(4 * t) / 4, 1e-15);

  const fs::path dir = scratch_dir("csv_data");
  std::ostringstream csv;
  csv << "node,value\n";
  for (Index i = 0; i < 64; ++i) csv << i << ',' << 0.5 * i << '\n';
  const fs::path good = write_file(dir / "g.csv", csv.str());
  const GridFunction g = make_data(m, parse_data_spec("csv:" + good.string()));
  EXPECT_EQ(g[10], 5.0);
  const fs::path bad = write_file(dir / "b.csv", "value\n1\n2\n");
  EXPECT_ERROR_KIND(make_data(m, parse_data_spec("csv:" + bad.string())), ErrorKind::ConfigError);
}

TEST(FieldCsv, ConstantFieldAndEmptyCells) {
  const auto ops = make_operators(build_mesh({unit_circle()}, 64));
  HarmonicField c;
  c.mesh = ops->mesh_ptr();
  c.constant = 1.25;
  const fs::path dir = scratch_dir("field");
  const GridSpec grid = default_grid(ops->mesh(), Region::interior);
  write_field_csv(c, grid, (dir / "c.csv").string());
  const auto rows = read_field_csv((dir / "c.csv").string());
  ASSERT_EQ(rows.size(), 41u * 41u);
  int filled = 0, empty = 0;
  for (const auto& r : rows) {
    if (r.u) {
      ++filled;
      EXPECT_EQ(*r.u, 1.25);
      EXPECT_LT(std::hypot(r.x, r.y), 1.0);
    } else {
      ++empty;
      if (std::hypot(r.x, r.y) < 0.8) ADD_FAILURE() << "interior point left empty";
    }
  }
  EXPECT_GT(filled, 0);
  EXPECT_GT(empty, 0);
  std::ifstream in(dir / "c.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x,y,u");
}

TEST(FieldCsv, RoundTrip) {
  const auto ops = make_operators(build_mesh({ellipse21()}, 128));
  const SolveReport r = dirichlet_exterior(*ops, make_data(ops->mesh(), parse_data_spec("fourier:1")));
  const fs::path dir = scratch_dir("roundtrip");
  const GridSpec grid = default_grid(ops->mesh(), Region::exterior);
  write_field_csv(r.solution, grid, (dir / "f.csv").string());
  int checked = 0;
  for (const auto& row : read_field_csv((dir / "f.csv").string())) {
    if (!row.u) continue;
    EXPECT_NEAR(*row.u, r.solution(Point(row.x, row.y)), 1e-15 * std::max(1.0, std::abs(*row.u)));
    if (++checked == 50) break;
  }
  EXPECT_EQ(checked, 50);
  EXPECT_ERROR_KIND(write_field_csv(r.solution, grid, "/nonexistent/dir/f.csv"), ErrorKind::IoError);
}

TEST(Serialization, PairDistributionRoundTrip) {
  DensityGenerator gen(3);
  const BoundaryMesh m = build_mesh({ellipse21()}, 32);
  const PairDistribution t = gen.pair(m, Side::minus);
  const PairDistribution back = pair_from_json(nlohmann::json::parse(to_json(t).dump()));
  EXPECT_EQ(back.side, Side::minus);
  EXPECT_EQ(back.mu0, t.mu0);
  EXPECT_EQ(back.mu1, t.mu1);
  EXPECT_ERROR_KIND(pair_from_json({{"side", "left"}, {"mu0", {1}}, {"mu1", {1}}}), ErrorKind::ConfigError);
}

TEST(Serialization, SolveReportJson) {
  const auto ops = make_operators(build_mesh({unit_circle()}, 64));
  const SolveReport r = dirichlet_exterior(*ops, GridFunction::Ones(64));
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["problem"], "dirichlet-ext");
  EXPECT_EQ(j["region"], "exterior");
  EXPECT_NEAR(j["value_at_infinity"].get<double>(), 1.0, 1e-10);
  EXPECT_EQ(j["densities"]["eta"].size(), 64u);
}

TEST(SolveCommand, DiskNeumannWritesReportAndField) {
  const fs::path dir = scratch_dir("solve_disk");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = config_path("disk.json");
  a.out = dir.string();
  ASSERT_EQ(cmd_solve(a, out, err), kExitOk) << err.str();
  const nlohmann::json j = read_json(dir / "report.json");
  EXPECT_EQ(j["problem"], "neumann-int");
  EXPECT_LE(j["equation_residual"].get<double>(), 1e-7);
  EXPECT_EQ(j["nodes"], 128);
  const auto rows = read_field_csv((dir / "field.csv").string());
  EXPECT_EQ(rows.size(), 41u * 41u);
  // u = r cos(theta) + c: compare differences against x.
  std::optional<FieldRow> ref;
  for (const auto& r : rows) {
    if (!r.u) continue;
    if (!ref) ref = r;
    EXPECT_NEAR(*r.u - *ref->u, r.x - ref->x, 1e-7);
  }
}

TEST(SolveCommand, IncompatibleDataExitsThree) {
  const fs::path dir = scratch_dir("solve_incompat");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = config_path("disk.json");
  a.data = "constant:1";
  a.out = dir.string();
  EXPECT_EQ(cmd_solve(a, out, err), kExitIncompatible);
  EXPECT_NE(err.str().find("pairings <g, chi>: 6.28318530717958"), std::string::npos) << err.str();
  EXPECT_FALSE(fs::exists(dir / "report.json"));
}

TEST(SolveCommand, AnnulusDirichletLogsCrossCheck) {
  const fs::path dir = scratch_dir("solve_annulus");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = config_path("annulus.json");
  a.out = dir.string();
  a.dump_operators = (dir / "ops").string();
  ASSERT_EQ(cmd_solve(a, out, err), kExitOk) << err.str();
  EXPECT_NE(out.str().find("cross-solver check"), std::string::npos);
  const nlohmann::json j = read_json(dir / "report.json");
  EXPECT_LE(j["cross_check"].get<double>(), 1e-6);
  for (const char* name : {"V", "W", "Wt", "Splus", "Sminus"}) EXPECT_TRUE(fs::exists(dir / "ops" / (std::string(name) + ".csv")));
}

TEST(SolveCommand, ConfigErrorsExitTwo) {
  std::ostringstream out, err;
  SolveArgs a;
  a.config = config_path("disk.json");
  a.problem = "dirichlet-ext";
  a.data = "hadamard:6";
  a.out = scratch_dir("solve_cfg").string();
  EXPECT_EQ(cmd_solve(a, out, err), kExitConfig);
  a.problem = "verify";
  a.data = "constant:0";
  EXPECT_EQ(cmd_solve(a, out, err), kExitConfig);
  a.problem.reset();
  a.nodes = 15;
  EXPECT_EQ(cmd_solve(a, out, err), kExitConfig);
  a.config = "/nonexistent.json";
  EXPECT_EQ(cmd_solve(a, out, err), kExitConfig);
}

TEST(SolveCommand, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::ConfigError), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::InvalidGeometry), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::IncompatibleData), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::SingularSystem), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::NumericalFailure), 4);
}

TEST(Verify, DiskAndAnnulusPass) {
  const VerifyReport rep = run_verify({stock_geometries()[0], stock_geometries()[2]});
  EXPECT_TRUE(rep.pass());
  for (const auto& row : rep.rows) {
    EXPECT_TRUE(row.pass) << row.geometry << " " << row.name << " " << row.residual << " " << row.detail;
    if (row.geometry == "disk") EXPECT_LE(row.residual, 1e-6) << row.name;
    if (row.geometry == "annulus" && row.name == "nullspace-dims")
      EXPECT_NE(row.detail.find("kappa+=1 kappa-=1 dims 1/1/1/1"), std::string::npos) << row.detail;
  }
  EXPECT_EQ(rep.rows.size(), 36u);
}

TEST(Verify, DeterministicBitForBit) {
  VerifyOptions o;
  o.nodes = 128;
  const auto geo = std::vector<StockGeometry>{stock_geometries()[1]};
  const std::string a = to_json(run_verify(geo, o)).dump();
  const std::string b = to_json(run_verify(geo, o)).dump();
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"seed\":20240611"), std::string::npos);
}

TEST(Verify, BrokenSignHookFails) {
  std::ostringstream out, err;
  VerifyArgs a;
  a.config = config_path("disk.json");
  a.nodes = 64;
  a.flip_diagonal_sign = true;
  EXPECT_EQ(cmd_verify(a, out, err), kExitVerifyFailed);
  EXPECT_NE(out.str().find("FAIL disk"), std::string::npos);
  EXPECT_NE(out.str().find("overall: FAIL"), std::string::npos);
  bool w1_failed = false;
  std::istringstream lines(out.str());
  for (std::string line; std::getline(lines, line);)
    if (line.find("W1-half") != std::string::npos) w1_failed = line.rfind("FAIL", 0) == 0;
  EXPECT_TRUE(w1_failed);
}

TEST(Verify, ConfigGeometryWritesReport) {
  const fs::path dir = scratch_dir("verify_kite");
  std::ostringstream out, err;
  VerifyArgs a;
  a.config = config_path("kite.json");
  a.nodes = 256;
  a.out = dir.string();
  EXPECT_EQ(cmd_verify(a, out, err), kExitOk) << out.str();
  const nlohmann::json j = read_json(dir / "verify_report.json");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["checks"].size(), 18u);
  EXPECT_EQ(j["checks"][0]["geometry"], "kite");
}

TEST(Hadamard, SingleModeRecovery) {
  const HadamardReport r = demo_hadamard(1, 64);
  EXPECT_LE(r.recovery_error, 1e-6);
}

TEST(Hadamard, EnergyTable) {
  const HadamardReport r = demo_hadamard(4, 256);
  ASSERT_EQ(r.energy.size(), 4u);
  const double expect[] = {2 * kPi, kPi * (2 + 4.0 / 16), kPi * (2 + 4.0 / 16 + 8.0 / 81),
                           kPi * (2 + 4.0 / 16 + 8.0 / 81 + 16.0 / 256)};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(r.energy[k].analytic, expect[k], 1e-10 * expect[k]);
    EXPECT_NEAR(r.energy[k].steklov_form, expect[k], 1e-10 * expect[k]);
    EXPECT_EQ(r.energy[k].required_nodes, 8 << (k + 1));
  }
  EXPECT_TRUE(r.energy_monotone());
  EXPECT_LE(r.recovery_error, 1e-5);
}

TEST(Hadamard, ResolutionGuard) {
  EXPECT_ERROR_KIND(demo_hadamard(6, 64), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(demo_hadamard(0, 64), ErrorKind::ConfigError);
  std::ostringstream out, err;
  HadamardArgs a;
  a.terms = 6;
  a.nodes = 64;
  EXPECT_EQ(cmd_demo_hadamard(a, out, err), kExitConfig);
}

TEST(Hadamard, CommandWritesFiles) {
  const fs::path dir = scratch_dir("hadamard");
  std::ostringstream out, err;
  HadamardArgs a;
  a.terms = 3;
  a.out = dir.string();
  ASSERT_EQ(cmd_demo_hadamard(a, out, err), kExitOk);
  EXPECT_EQ(read_json(dir / "hadamard_report.json")["nodes"], 256);
  std::ifstream csv(dir / "hadamard_energy.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "k,energy_analytic,energy_steklov,required_nodes");
}

TEST(Executable, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("solve --config " + config_path("disk.json") + out), 0);
  EXPECT_EQ(run_cli("solve --config " + config_path("disk.json") + " --data constant:1" + out), 3);
  EXPECT_EQ(run_cli("solve --config " + config_path("kite.json") + " --problem dirichlet-ext --data hadamard:6" + out),
            2);
  EXPECT_EQ(run_cli("solve --config /nonexistent.json --problem dirichlet-int --data constant:1"), 2);
  EXPECT_EQ(run_cli("solve --config " + config_path("two_disks.json") + " --n 64" + out), 0);
  EXPECT_EQ(run_cli("demo-hadamard --terms 6 --n 64"), 2);
  EXPECT_EQ(run_cli("demo-hadamard --terms 2 --n 64"), 0);
  EXPECT_EQ(run_cli("verify --config " + config_path("disk.json") + " --n 64 --flip-diagonal-sign"), 1);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("bogus"), 2);
}

}  // namespace
