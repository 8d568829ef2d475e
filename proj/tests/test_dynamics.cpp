#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "crowdsim/dynamics.hpp"
#include "crowdsim/errors.hpp"

using namespace crowdsim;

namespace {

Domain corridor(BoundaryX bx = BoundaryX::periodic) {
  Domain d;
  d.length = 20.0;
  d.width = 4.0;
  d.boundary_x = bx;
  return d;
}

std::shared_ptr<const PorosityGrid> open_grid(const Domain& d, std::size_t nx, std::size_t ny) {
  return std::make_shared<const PorosityGrid>(nx, ny, d.length / nx, std::vector<double>(nx * ny, 1.0));
}

std::vector<double> gaussian_rho(const PorosityGrid& g, Vec2 c, double w) {
  std::vector<double> rho(g.cell_count());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const Vec2 r = g.center(k) - c;
    rho[k] = std::exp(-dot(r, r) / (2 * w * w));
  }
  return rho;
}

double center_x(const MacroField& f) {
  double m = 0.0, mx = 0.0;
  for (std::size_t c = 0; c < f.grid().cell_count(); ++c) {
    m += f.cell_mass(c);
    mx += f.cell_mass(c) * f.grid().center(c).x;
  }
  return mx / m;
}

VelocityModel free_model() {
  VelocityModel m;
  m.kernels.F_opp = m.kernels.F_own = m.kernels.F_w = 0.0;
  return m;
}

}  // namespace

TEST(AdvancePosition, EulerWrapReflect) {
  const auto d = corridor();
  auto p = advance_position({0.5, 1.0}, {1.34, 0}, d, 0.1);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->x, 0.634, 1e-15);
  p = advance_position({19.99, 1}, {1.34, 0}, d, 0.1);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->x, 0.124, 1e-12);
  p = advance_position({5, 0.01}, {0, -1}, d, 0.1);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->y, 0.09, 1e-15);
  p = advance_position({5, 3.99}, {0, 1}, d, 0.1);
  EXPECT_NEAR(p->y, 3.91, 1e-12);
}

TEST(AdvancePosition, OpenBoundaryRemovesAgent) {
  const auto d = corridor(BoundaryX::open);
  EXPECT_FALSE(advance_position({19.99, 1}, {1.34, 0}, d, 0.1));
  EXPECT_FALSE(advance_position({0.01, 1}, {-1.34, 0}, d, 0.1));
}

TEST(AdvancePosition, MirrorsOutOfObstacle) {
  auto d = corridor();
  d.obstacles.push_back(Rect{10.0, 1.0, 11.0, 3.0});
  const auto p = advance_position({9.95, 2.0}, {1.0, 0.0}, d, 0.1);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->x, 9.95, 1e-12);
  EXPECT_TRUE(d.walkable(*p));
}

TEST(AdvancePosition, UnrecoverableThrows) {
  auto d = corridor();
  d.obstacles.push_back(Rect{10.0, 1.0, 11.0, 3.0});
  d.obstacles.push_back(Rect{8.5, 1.0, 9.9, 3.0});
  // Mirrored out of the first block straight into the second one.
  EXPECT_THROW(advance_position({9.95, 2.0}, {4.5, 0.0}, d, 0.1), SimulationError);
}

TEST(MacroStep, UniformFieldUnchanged) {
  const auto d = corridor();
  const auto g = open_grid(d, 80, 16);
  MacroField f(g, std::vector<double>(g->cell_count(), 0.7));
  const std::vector<Vec2> v(g->cell_count(), Vec2{1.34, 0.0});
  const auto next = macro_step(f, v, d, 0.05);
  for (std::size_t c = 0; c < g->cell_count(); ++c) EXPECT_NEAR(next.rho(c), 0.7, 1e-14);
}

TEST(MacroStep, ZeroVelocityExactlyUnchanged) {
  const auto d = corridor();
  const auto g = open_grid(d, 80, 16);
  MacroField f(g, gaussian_rho(*g, {7, 2}, 1.0));
  const auto next = macro_step(f, std::vector<Vec2>(g->cell_count()), d, 0.05);
  EXPECT_EQ(next.rho(), f.rho());
}

TEST(MacroStep, GaussianTranslates) {
  const auto d = corridor();
  const auto g = open_grid(d, 80, 16);
  MacroField f(g, gaussian_rho(*g, {6, 2}, 1.0));
  const double m0 = macro_mass(f);
  const double x0 = center_x(f);
  const std::vector<Vec2> v(g->cell_count(), Vec2{1.0, 0.0});
  for (int k = 0; k < 20; ++k) f = macro_step(f, v, d, 0.05);
  EXPECT_NEAR(macro_mass(f), m0, 1e-12 * m0);
  EXPECT_NEAR(center_x(f) - x0, 1.0, g->h());
  for (double r : f.rho()) EXPECT_GE(r, 0.0);
}

TEST(MacroStep, SolidCellsNeverReceiveMass) {
  auto d = corridor();
  d.obstacles.push_back(Rect{10.0, 1.0, 12.0, 3.0});
  const auto g = std::make_shared<const PorosityGrid>(build_porosity_grid(d, 80, 16, 4));
  std::vector<double> rho = gaussian_rho(*g, {8, 2}, 1.0);
  for (std::size_t c = 0; c < rho.size(); ++c) if (g->phi(c) == 0.0) rho[c] = 0.0;
  MacroField f(g, rho);
  const double m0 = macro_mass(f);
  const std::vector<Vec2> v(g->cell_count(), Vec2{1.34, 0.0});
  for (int k = 0; k < 60; ++k) {
    f = macro_step(f, v, d, 0.05);
    for (std::size_t c = 0; c < rho.size(); ++c) if (g->phi(c) == 0.0) ASSERT_EQ(f.rho(c), 0.0);
  }
  EXPECT_NEAR(macro_mass(f), m0, 1e-12 * m0);
}

TEST(MacroStep, OpenBoundaryOnlyLosesMass) {
  const auto d = corridor(BoundaryX::open);
  const auto g = open_grid(d, 80, 16);
  MacroField f(g, gaussian_rho(*g, {18, 2}, 1.0));
  double prev = macro_mass(f);
  const std::vector<Vec2> v(g->cell_count(), Vec2{1.34, 0.0});
  for (int k = 0; k < 40; ++k) {
    f = macro_step(f, v, d, 0.05);
    EXPECT_LE(macro_mass(f), prev + 1e-12);
    prev = macro_mass(f);
  }
  EXPECT_LT(prev, 0.5 * macro_mass(MacroField(g, gaussian_rho(*g, {18, 2}, 1.0))));
}

TEST(MacroStep, SubsteppingKeepsLargeStepsStable) {
  const auto d = corridor();
  const auto g = open_grid(d, 80, 16);
  MacroField f(g, gaussian_rho(*g, {6, 2}, 1.0));
  const std::vector<Vec2> v(g->cell_count(), Vec2{3.0, 1.0});
  const auto next = macro_step(f, v, d, 0.5);
  for (double r : next.rho()) EXPECT_GE(r, 0.0);
  EXPECT_NEAR(macro_mass(next), macro_mass(f), 1e-12 * macro_mass(f));
}

TEST(CoupledStep, FreeAgentsTranslate) {
  const auto d = corridor();
  TwoScaleState s(open_grid(d, 80, 16));
  for (AgentId k = 0; k < 5; ++k) {
    s.pops[0].micro.agents.push_back({k, {1.0 + k, 1.0}});
    s.pops[1].micro.agents.push_back({AgentId(5 + k), {1.0 + k, 3.0}});
  }
  StepConfig cfg;
  const auto model = free_model();
  const auto r = coupled_step(s, model, d, cfg);
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t k = 0; k < 5; ++k) {
      const Vec2 expected = s.pops[p].micro.agents[k].position + cfg.dt * model.v_des[p];
      EXPECT_NEAR(r.state.pops[p].micro.agents[k].position.x, std::fmod(expected.x + 20.0, 20.0), 1e-12);
      EXPECT_EQ(r.state.pops[p].micro.agents[k].position.y, expected.y);
    }
  }
  EXPECT_DOUBLE_EQ(r.state.time, cfg.dt);
}

TEST(CoupledStep, PureMacroReducesToAdvection) {
  const auto d = corridor();
  const auto g = open_grid(d, 80, 16);
  TwoScaleState s(g);
  for (std::size_t p = 0; p < 2; ++p) {
    s.pops[p].theta = 0.0;
    s.pops[p].macro = MacroField(g, gaussian_rho(*g, {p == 0 ? 5.0 : 15.0, 2.0}, 1.0));
  }
  const auto model = free_model();
  StepConfig cfg;
  const auto r = coupled_step(s, model, d, cfg);
  for (std::size_t p = 0; p < 2; ++p) {
    const auto expected = macro_step(s.pops[p].macro, std::vector<Vec2>(g->cell_count(), model.v_des[p]), d, cfg.dt, cfg.cfl);
    EXPECT_EQ(r.state.pops[p].macro.rho(), expected.rho());
  }
}

TEST(CoupledStep, CountsConserved) {
  const auto d = corridor();
  TwoScaleState s(open_grid(d, 80, 16));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0, 20), uy(0.2, 3.8);
  for (AgentId k = 0; k < 20; ++k) {
    s.pops[0].micro.agents.push_back({k, {ux(rng), uy(rng)}});
    s.pops[1].micro.agents.push_back({AgentId(20 + k), {ux(rng), uy(rng)}});
  }
  VelocityModel model;
  model.speed_cap = 2.68;
  const auto r = coupled_step(s, model, d, StepConfig{});
  EXPECT_EQ(r.state.pops[0].micro.size(), 20u);
  EXPECT_EQ(r.state.pops[1].micro.size(), 20u);
  EXPECT_EQ(r.diagnostics.mass[0], 20.0);
  EXPECT_EQ(r.diagnostics.mass[1], 20.0);
}

TEST(StepConfigTest, RejectsBadValues) {
  StepConfig c;
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.cfl = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(TestFields, GradientsMatchFiniteDifferences) {
  for (const auto& name : test_field_names()) {
    const auto psi = make_test_field(name, 20.0, 4.0);
    for (Vec2 p : {Vec2{3.1, 0.7}, Vec2{10.0, 2.0}, Vec2{17.3, 3.2}}) {
      constexpr double e = 1e-6;
      const double gx = (psi.value(p + Vec2{e, 0}) - psi.value(p - Vec2{e, 0})) / (2 * e);
      const double gy = (psi.value(p + Vec2{0, e}) - psi.value(p - Vec2{0, e})) / (2 * e);
      EXPECT_NEAR(psi.gradient(p).x, gx, 1e-6) << name;
      EXPECT_NEAR(psi.gradient(p).y, gy, 1e-6) << name;
    }
  }
  EXPECT_THROW(make_test_field("nope", 20, 4), ValidationError);
}

TEST(WeakForm, StaticStateHasZeroResidual) {
  const auto d = corridor();
  TwoScaleState s(open_grid(d, 80, 16));
  s.pops[0].micro.agents.push_back({0, {10, 2}});
  auto model = free_model();
  model.v_des = {Vec2{}, Vec2{}};
  std::vector<TwoScaleState> traj(5, s);
  for (std::size_t k = 0; k < traj.size(); ++k) traj[k].time = 0.1 * static_cast<double>(k);
  const auto psi = make_test_field("bump", 20, 4);
  for (double r : weak_form_residual(traj, psi, 0, model, d)) EXPECT_LE(std::abs(r), 1e-12);
}

TEST(WeakForm, FreeAgentLinearFieldIsExact) {
  const auto d = corridor();
  TwoScaleState s(open_grid(d, 80, 16));
  s.pops[0].micro.agents.push_back({0, {2, 2}});
  const auto model = free_model();
  StepConfig cfg;
  cfg.dt = 0.05;
  std::vector<TwoScaleState> traj{s};
  for (int k = 0; k < 10; ++k) traj.push_back(coupled_step(traj.back(), model, d, cfg).state);
  const auto psi = make_test_field("linear_x", 20, 4);
  const auto res = weak_form_residual(traj, psi, 0, model, d);
  ASSERT_EQ(res.size(), 9u);
  for (double r : res) EXPECT_LE(std::abs(r), 1e-10);
}

TEST(WeakForm, TooFewSamplesIsContractViolation) {
  const auto d = corridor();
  TwoScaleState s(open_grid(d, 80, 16));
  const std::vector<TwoScaleState> traj(2, s);
  EXPECT_THROW(weak_form_residual(traj, make_test_field("bump", 20, 4), 0, free_model(), d), ContractViolation);
}
