#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgtopo/cli_io.hpp"

using namespace dgtopo;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / ("dgtopo_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(DGTOPO_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, PresetPopulatesTheBenchmark) {
  const RunConfig c = parse_config_text(R"({"problem": {"preset": "double-pipe"}})");
  EXPECT_DOUBLE_EQ(c.spec.gamma, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.spec.alpha_bar, 2.5e4);
  EXPECT_DOUBLE_EQ(c.spec.q, 0.1);
  EXPECT_EQ(c.preset, "double-pipe");
}

TEST(Config, OutOfRangeValuesAreRejected) {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe", "gamma": 1.5}})").find("problem.gamma"),
            std::string::npos);
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe", "sigma": -1}})").find("problem.sigma"),
            std::string::npos);
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe", "colour": 1}})").find("problem.colour"),
            std::string::npos);
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe"}, "extra": 1})").find("extra"), std::string::npos);
  EXPECT_NE(message(R"({"problem": {"Lx": 1, "Ly": 1, "gamma": 0.3, "alpha_bar": 1, "q": 0.1, "nu": 1}})")
                .find("problem.sigma"),
            std::string::npos);
  EXPECT_NE(message(R"({"mesh": {"nx": 4}})").find("problem"), std::string::npos);
  EXPECT_NE(message("{\n  \"problem\": {\n    \"preset\": \"double-pipe\",\n  }\n}").find("line 4"),
            std::string::npos);
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe"}, "mesh": {"nx": 2.5}})").find("mesh.nx"),
            std::string::npos);
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe"}, "seeds": ["spiral"]})").find("seeds"),
            std::string::npos);
  EXPECT_NE(message(R"({"problem": {"preset": "double-pipe"}, "solver": {"continuation": [10, 100]}})")
                .find("solver.continuation"),
            std::string::npos);
}

TEST(Config, DecimalLiteralsRoundTripExactly) {
  const RunConfig c = parse_config_text(
      R"({"problem": {"preset": "double-pipe", "nu": 0.1, "gamma": 0.30000000000000004}, "mesh": {"nx": 12, "ny": 8}})");
  EXPECT_EQ(c.spec.nu, 0.1);
  EXPECT_EQ(c.spec.gamma, 0.30000000000000004);
  const RunConfig again = parse_config_text(c.canonical());
  EXPECT_EQ(again.canonical(), c.canonical());
  EXPECT_EQ(again.hash(), c.hash());
  RunConfig changed = c;
  changed.spec.sigma = 11.0;
  EXPECT_NE(changed.hash(), c.hash());
}

TEST(Config, ShippedConfigParses) {
  const RunConfig c = parse_config(fs::path(DGTOPO_SOURCE_DIR) / "configs" / "double-pipe.json");
  EXPECT_EQ(c.canonical(), double_pipe_config().canonical());
}

TEST(Csv, EmptyTableIsHeaderOnly) {
  const fs::path p = scratch_dir() / "empty.csv";
  CsvTable t;
  t.columns = {"h", "branch", "div_norm"};
  write_csv(t, p, {"config_hash 0", "nu 1"});
  EXPECT_EQ(read_file(p), "# config_hash 0\n# nu 1\nh,branch,div_norm\n");
}

TEST(Csv, SchemasAndPrecision) {
  DivRow r;
  r.h = 0.044194173824159216;
  r.branch = "channels";
  r.div_norm = 1.0 / 3.0;
  const fs::path p = scratch_dir() / "div.csv";
  write_csv(div_table({r}), p, provenance_comments(double_pipe_config()));
  const auto lines = lines_of(read_file(p));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0].rfind("# config_hash ", 0), 0u);
  EXPECT_EQ(lines[1], "# nu 1");
  EXPECT_EQ(lines[3], "h,branch,div_norm");
  EXPECT_EQ(lines[4], "0.044194173824159216,channels,0.33333333333333331");
  EXPECT_EQ(std::stod("0.33333333333333331"), 1.0 / 3.0);

  ConvergenceTable ct;
  EXPECT_EQ(convergence_table(ct).columns,
            (std::vector<std::string>{"h", "err_u_H1g", "err_rho_L2", "err_p_L2", "order_u", "order_rho", "order_p"}));
}

TEST(Csv, ErrorsAreReported) {
  CsvTable t;
  t.columns = {"a", "b"};
  t.rows.push_back({1.0});
  EXPECT_THROW(write_csv(t, scratch_dir() / "ragged.csv", {}), std::invalid_argument);
  t.rows.clear();
  EXPECT_THROW(write_csv(t, "/proc/no/such/dir/x.csv", {}), std::runtime_error);
}

TEST(Vtk, TwoCellMesh) {
  auto mesh = std::make_shared<const Mesh>(Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}));
  auto V = std::make_shared<const BdmSpace>(mesh);
  const CellField rho(mesh, Eigen::Vector2d(0.0, 1.0));
  const CellField p(mesh, Eigen::Vector2d(0.1, -0.1));
  const VelocityField u(V, interpolate_bdm1(*V, [](const Vec2&) { return Vec2(1.0, 0.0); }));
  const fs::path path = scratch_dir() / "two.vtk";
  write_vtk(*mesh, rho, p, u, path, "two cells");
  const std::string text = read_file(path);
  EXPECT_NE(text.find("CELL_DATA 2\nSCALARS rho double 1\nLOOKUP_TABLE default\n0\n1\n"), std::string::npos);
  std::istringstream in(text.substr(text.find("VECTORS u double\n") + 17));
  for (int c = 0; c < 2; ++c) {
    double x, y, z;
    in >> x >> y >> z;
    EXPECT_NEAR(x, 1.0, 1e-14);
    EXPECT_NEAR(y, 0.0, 1e-14);
    EXPECT_EQ(z, 0.0);
  }
  EXPECT_NE(text.find("SCALARS p double 1\nLOOKUP_TABLE default\n0.10000000000000001\n-0.10000000000000001\n"),
            std::string::npos);
}

TEST(Vtk, ValuesRoundTrip) {
  auto mesh = std::make_shared<const Mesh>(generate_rect_mesh(3, 2, 1.5, 1.0));
  auto V = std::make_shared<const BdmSpace>(mesh);
  CellField rho(mesh), p(mesh);
  for (int c = 0; c < mesh->num_cells(); ++c) {
    rho.values[c] = std::sin(c + 0.3) * std::sin(c + 0.3);
    p.values[c] = std::exp(0.37 * c) - 2.0;
  }
  const VelocityField u(V, interpolate_bdm1(*V, [](const Vec2& x) { return Vec2(x.y() / 3.0, -x.x() / 7.0); }));
  const fs::path path = scratch_dir() / "rt.vtk";
  write_vtk(*mesh, rho, p, u, path, "round trip");
  std::istringstream in(read_file(path));
  std::string tok;
  while (in >> tok && tok != "rho") {}
  in >> tok >> tok >> tok >> tok;  // double 1 LOOKUP_TABLE default
  for (int c = 0; c < mesh->num_cells(); ++c) {
    double v;
    in >> v;
    EXPECT_EQ(v, rho.values[c]);
  }
  while (in >> tok && tok != "u") {}
  in >> tok;
  for (int c = 0; c < mesh->num_cells(); ++c) {
    double x, y, z;
    in >> x >> y >> z;
    const Vec2 ref = u.value(c, mesh->centroid(c));
    EXPECT_EQ(x, ref.x());
    EXPECT_EQ(y, ref.y());
    EXPECT_EQ(z, 0.0);
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir();
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("meshcheck --bogus 1"), 2);
  EXPECT_EQ(run_cli("meshcheck --sigma -1"), 2);
  EXPECT_EQ(run_cli("meshcheck --config /no/such/file.json"), 2);
  EXPECT_EQ(run_cli("converge --levels 1 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("meshcheck --levels 2 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "meshcheck.csv"));
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
  const fs::path a = scratch_dir() / "run_a";
  const fs::path b = scratch_dir() / "run_b";
  ASSERT_EQ(run_cli("forward-mms --levels 2 --out " + a.string()), 0);
  ASSERT_EQ(run_cli("forward-mms --levels 2 --out " + b.string()), 0);
  EXPECT_EQ(read_file(a / "mms.csv"), read_file(b / "mms.csv"));
  EXPECT_FALSE(read_file(a / "mms.csv").empty());
}
