#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "vkplate/grid.hpp"

using namespace vkplate;

TEST(Grid, CountsForTwoByTwoLeftClamped) {
  const PlateMesh m = build_grid(2, 2, 1, 1, EdgeSet{Edge::left});
  EXPECT_EQ(m.grid.num_nodes(), 9);
  EXPECT_EQ(m.grid.num_elements(), 4);
  int u_fixed = 0, v_fixed = 0;
  for (int n = 0; n < 9; ++n) {
    for (int c = 0; c < 2; ++c) u_fixed += m.dofs.mech_constrained[m.dofs.mech_u(n, c)];
    for (int k = 0; k < 4; ++k) v_fixed += m.dofs.mech_constrained[m.dofs.mech_v(n, k)];
  }
  EXPECT_EQ(u_fixed, 6);
  EXPECT_EQ(v_fixed, 12);
  EXPECT_EQ(m.dofs.num_mu(), 9);
}

TEST(Grid, MuDofsOnePerNode) {
  for (auto [nx, ny] : {std::pair{2, 3}, std::pair{5, 2}, std::pair{7, 7}}) {
    const PlateMesh m = build_grid(nx, ny, 2.0, 0.5, EdgeSet{Edge::bottom});
    EXPECT_EQ(m.dofs.num_mu(), (nx + 1) * (ny + 1));
  }
}

TEST(Grid, Errors) {
  EXPECT_THROW(build_grid(1, 2, 1, 1, EdgeSet{Edge::left}), ValidationError);
  EXPECT_THROW(build_grid(2, 1, 1, 1, EdgeSet{Edge::left}), ValidationError);
  EXPECT_THROW(build_grid(2, 2, 0, 1, EdgeSet{Edge::left}), ValidationError);
  EXPECT_THROW(build_grid(2, 2, 1, -1, EdgeSet{Edge::left}), ValidationError);
  try {
    build_grid(2, 2, 1, 1, EdgeSet{});
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("not well-posed"), std::string::npos);
  }
}

TEST(Grid, ParseEdge) {
  EXPECT_EQ(parse_edge("left"), Edge::left);
  EXPECT_EQ(parse_edge("top"), Edge::top);
  EXPECT_THROW(parse_edge("middle"), ValidationError);
}

TEST(Grid, DofPartitionIsBijection) {
  const PlateMesh m = build_grid(4, 3, 1.5, 1, EdgeSet{Edge::left, Edge::top});
  const DofLayout& d = m.dofs;
  std::set<int> seen;
  for (int f = 0; f < d.num_free(); ++f) {
    const int g = d.free_to_mech[f];
    EXPECT_EQ(d.mech_to_free[g], f);
    EXPECT_FALSE(d.mech_constrained[g]);
    seen.insert(g);
  }
  for (int g = 0; g < d.num_mech(); ++g) {
    if (d.mech_constrained[g]) {
      EXPECT_EQ(d.mech_to_free[g], -1);
      seen.insert(g);
    }
  }
  EXPECT_EQ(static_cast<int>(seen.size()), d.num_mech());
  EXPECT_TRUE(std::is_sorted(d.free_to_mech.begin(), d.free_to_mech.end()));
}

TEST(Grid, ConstrainedExactlyOnTaggedEdges) {
  const PlateMesh m = build_grid(3, 4, 1, 2, EdgeSet{Edge::right, Edge::bottom});
  for (int n = 0; n < m.grid.num_nodes(); ++n) {
    const bool tagged = m.grid.node_i(n) == 3 || m.grid.node_j(n) == 0;
    for (int k = 0; k < 4; ++k) EXPECT_EQ(m.dofs.mech_constrained[m.dofs.mech_v(n, k)], tagged);
    for (int c = 0; c < 2; ++c) EXPECT_EQ(m.dofs.mech_constrained[m.dofs.mech_u(n, c)], tagged);
  }
}

TEST(Grid, ConnectivityLexicographicAndAffine) {
  const PlateMesh m = build_grid(3, 2, 3, 1, EdgeSet::all());
  const Grid2D& g = m.grid;
  EXPECT_EQ(g.element_nodes(0), (std::array<int, 4>{0, 1, 5, 4}));
  EXPECT_EQ(g.element_nodes(5), (std::array<int, 4>{6, 7, 11, 10}));
  const Eigen::Matrix2d j = g.element_jacobian();
  EXPECT_EQ(j(0, 0), 0.5);
  EXPECT_EQ(j(1, 1), 0.25);
  EXPECT_EQ(j(0, 1), 0.0);
  for (int e = 0; e < g.num_elements(); ++e) {
    const auto nodes = g.element_nodes(e);
    EXPECT_TRUE(g.node_xy(nodes[0]).isApprox(g.element_origin(e)) || g.element_origin(e).isZero());
    EXPECT_NEAR(g.node_xy(nodes[2])(0) - g.node_xy(nodes[0])(0), g.hx(), 1e-15);
    EXPECT_NEAR(g.node_xy(nodes[2])(1) - g.node_xy(nodes[0])(1), g.hy(), 1e-15);
  }
}
