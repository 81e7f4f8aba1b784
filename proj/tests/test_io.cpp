#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "vkplate/io.hpp"
#include "vkplate/stepper.hpp"

using namespace vkplate;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vkplate_test_" + name);
}

/// Numeric block following a header line of the legacy VTK file.
std::vector<double> vtk_block(const std::string& text, const std::string& header, int count, int skip_lines = 0) {
  std::istringstream in(text.substr(text.find(header)));
  std::string line;
  std::getline(in, line);
  for (int i = 0; i < skip_lines; ++i) std::getline(in, line);
  std::vector<double> out(count);
  for (double& x : out) in >> x;
  return out;
}

}  // namespace

TEST(LedgerCsv, EmptyLedgerIsHeaderOnly) {
  EXPECT_EQ(ledger_csv({}), std::string(kLedgerHeader) + "\n");
}

TEST(LedgerCsv, RowPerSnapshotAndExactRoundTrip) {
  const PlateMesh m = build_grid(3, 3, 1, 1, EdgeSet{Edge::left});
  Loads loads;
  loads.f2d = constant_field(0.1);
  SimParams p;
  p.dt = 0.1;
  p.t_end = 0.3;
  const MaterialSet mat = make_material_set(make_isotropic_c3(1, 0), make_isotropic_c3(0.1, 0), Eigen::Matrix3d::Zero(),
                                            1.0, Eigen::Matrix3d::Identity(), 0.0, 4.0);
  const Trajectory t = run(m, mat, loads, InitialConditions{}, p);
  const auto path = temp_file("ledger.csv");
  export_csv(t.ledger, path.string());
  const std::string text = slurp(path);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
  const CsvTable table = read_csv(path.string());
  ASSERT_EQ(table.rows.size(), 4u);
  ASSERT_EQ(table.header.size(), 7u);
  EXPECT_EQ(table.header[5], "balance_residual");
  for (std::size_t k = 0; k < t.ledger.size(); ++k) {
    const LedgerRow& r = t.ledger[k];
    const std::vector<double> expect{r.t, r.elastic, r.visc_diss_cum, r.cpl_work_cum, r.ext_work_cum,
                                     r.balance_residual, r.min_mu};
    EXPECT_EQ(table.rows[k], expect);
  }
  std::filesystem::remove(path);
}

TEST(FormatDouble, RoundTripsRandomValues) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(u(rng), static_cast<int>(u(rng)));
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(KornCsv, FirstPairSlopeIsNan) {
  KornStudy s;
  s.rows = {{0.4, 2.0, 0.7}, {0.2, 0.5, 1.4, -1.0}};
  const CsvTable t = parse_csv(korn_csv(s));
  EXPECT_EQ(t.header.size(), 4u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(std::isnan(t.rows[0][3]));
  EXPECT_EQ(t.rows[1][3], -1.0);
}

TEST(Csv, MalformedRowsRejected) {
  EXPECT_THROW(parse_csv("a,b\n1\n"), IoError);
  EXPECT_THROW(parse_csv("a,b\n1,x\n"), IoError);
  EXPECT_THROW(read_csv("/nonexistent/dir/file.csv"), IoError);
}

TEST(Vtk, PointCountAndZeroState) {
  const PlateMesh m = build_grid(2, 2, 1, 1, EdgeSet{Edge::left});
  const std::string text = state_vtk(m, PlateState::zero(m));
  EXPECT_NE(text.find("DIMENSIONS 3 3 1"), std::string::npos);
  EXPECT_NE(text.find("POINTS 9 double"), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  for (double x : vtk_block(text, "VECTORS u", 27)) EXPECT_EQ(x, 0.0);
  for (double x : vtk_block(text, "SCALARS v", 9, 1)) EXPECT_EQ(x, 0.0);
  for (double x : vtk_block(text, "SCALARS mu", 9, 1)) EXPECT_EQ(x, 0.0);
}

TEST(Vtk, FieldsMatchNodalValues) {
  const PlateMesh m = build_grid(3, 2, 1.5, 1, EdgeSet{Edge::left});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  PlateState s = PlateState::zero(m, 0.7);
  for (int i = 0; i < s.u.size(); ++i) s.u(i) = n(rng);
  for (int i = 0; i < s.v.size(); ++i) s.v(i) = n(rng);
  for (int i = 0; i < s.mu.size(); ++i) s.mu(i) = n(rng);
  const std::string text = state_vtk(m, s);
  const int nn = m.grid.num_nodes();
  const auto pts = vtk_block(text, "POINTS", 3 * nn);
  const auto u = vtk_block(text, "VECTORS u", 3 * nn);
  const auto v = vtk_block(text, "SCALARS v", nn, 1);
  const auto mu = vtk_block(text, "SCALARS mu", nn, 1);
  for (int k = 0; k < nn; ++k) {
    EXPECT_EQ(pts[3 * k], m.grid.node_xy(k)(0));
    EXPECT_EQ(pts[3 * k + 1], m.grid.node_xy(k)(1));
    EXPECT_EQ(u[3 * k], s.u(DofLayout::u_dof(k, 0)));
    EXPECT_EQ(u[3 * k + 1], s.u(DofLayout::u_dof(k, 1)));
    EXPECT_EQ(u[3 * k + 2], 0.0);
    EXPECT_EQ(v[k], s.v(DofLayout::v_dof(k, 0)));
    EXPECT_EQ(mu[k], s.mu(k));
  }
}

TEST(Io, UnwritablePathThrows) {
  EXPECT_THROW(write_text("/nonexistent/dir/out.csv", "x"), IoError);
  const PlateMesh m = build_grid(2, 2, 1, 1, EdgeSet{Edge::left});
  EXPECT_THROW(export_vtk(m, PlateState::zero(m), "/nonexistent/dir/s.vtk"), IoError);
}
