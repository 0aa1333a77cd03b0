#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hermite_cfm/error.hpp"
#include "hermite_cfm/solver.hpp"

using namespace hcfm;

namespace {

// Quadratic plane wave g(x - t) with g(s) = s^2, split into separable terms:
// (x - t)^2 = x^2 - 2 x t + t^2.
void add_wave(SeparableField& f, int comp, double sign) {
  f.add(comp, make_space_function([sign](const auto& x, const auto&) { return sign * x * x; }),
        constant_time_function(1.0));
  f.add(comp, make_space_function([sign](const auto& x, const auto&) { return -2.0 * sign * x; }),
        make_time_function([](const auto& t) { return t; }));
  f.add(comp, constant_space_function(sign), make_time_function([](const auto& t) { return t * t; }));
}

ProblemSpec plane_wave(int dim, BcKind bc, bool cross) {
  ProblemSpec p = dim == 1 ? standing_wave_1d() : standing_wave_2d(5.0, bc, cross);
  p.name = "plane-wave";
  p.bc = bc;
  p.tf = 0.2;
  auto f = std::make_shared<SeparableField>(dim == 1 ? 2 : 3);
  if (dim == 1) {
    add_wave(*f, 0, 1.0);  // H
    add_wave(*f, 1, 1.0);  // E
  } else {
    add_wave(*f, 1, -1.0);  // Hy
    add_wave(*f, 2, 1.0);   // Ez
  }
  p.exact = f;
  return p;
}

GridState random_state(const Solver& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  GridState st = s.state();
  for (std::size_t id : s.mesh().active_nodes())
    for (double& v : st.node(id)) v = u(rng);
  return st;
}

}  // namespace

TEST(Solver, DefaultCflTable) {
  EXPECT_EQ(default_cfl(1, 1), 0.9);
  EXPECT_EQ(default_cfl(1, 3), 0.5);
  EXPECT_EQ(default_cfl(1, 5), 0.25);
  EXPECT_EQ(default_cfl(2, 2), 0.5);
  EXPECT_EQ(default_cfl(2, 3), 0.25);
  EXPECT_THROW(default_cfl(1, 6), InvalidArgument);
}

TEST(Solver, StepSizeAndDefaults) {
  SolverParams p;
  p.m = 2;
  Solver s(standing_wave_2d(), 30, p);
  EXPECT_EQ(s.q(), 10);
  EXPECT_DOUBLE_EQ(s.cfl(), 0.5);
  EXPECT_NEAR(s.dt(), 0.5 / 30.0, 1e-15);
}

TEST(Solver, RunLandsOnFinalTime) {
  SolverParams p;
  Solver s(standing_wave_1d(), 20, p);
  std::size_t calls = 0;
  const auto d = s.run(-1.0, [&](const Solver&, std::size_t) { ++calls; });
  EXPECT_DOUBLE_EQ(s.state().time(), 1.0);
  EXPECT_EQ(calls, d.steps);
  EXPECT_LE(d.final_dt, d.dt + 1e-15);
  EXPECT_GT(d.final_dt, 0.0);
  EXPECT_NEAR((d.steps - 1) * d.dt + d.final_dt, 1.0, 1e-12);
}

TEST(Solver, RejectsMisalignedResolution) {
  EXPECT_THROW(Solver(standing_wave_2d(5.0, BcKind::PEC, true), 20, SolverParams{}), InvalidArgument);
}

// Quadratic plane waves lie in every local polynomial space, so the whole
// scheme (interior update and boundary closure) reproduces them.
TEST(Solver, ReproducesQuadraticPlaneWave) {
  for (BcKind bc : {BcKind::PEC, BcKind::PMC, BcKind::Impedance}) {
    {
      Solver s(plane_wave(1, bc, false), 20, SolverParams{});
      s.run();
      EXPECT_LT(s.error_max(), 1e-11) << "1-D " << to_string(bc);
    }
    for (bool cross : {false, true}) {
      Solver s(plane_wave(2, bc, cross), 15, SolverParams{});
      s.run();
      EXPECT_LT(s.error_max(), 1e-11) << "2-D " << to_string(bc) << (cross ? " cross" : "");
      EXPECT_LT(s.divergence_l2(), 1e-10);
    }
  }
}

TEST(Solver, ZeroPreservation) {
  for (BcKind bc : {BcKind::PEC, BcKind::PMC, BcKind::Impedance}) {
    {
      Solver s(zero_problem(1, bc), 20, SolverParams{});
      for (int k = 0; k < 1000; ++k) s.step(s.dt());
      EXPECT_LE(s.max_abs(), 1e-13);
    }
    for (bool cross : {false, true}) {
      Solver s(zero_problem(2, bc, cross), 12, SolverParams{});
      for (int k = 0; k < 1000; ++k) s.step(s.dt());
      EXPECT_LE(s.max_abs(), 1e-13) << to_string(bc);
    }
  }
}

TEST(Solver, Linearity) {
  const double a = 0.7, b = -1.9;
  for (int dim : {1, 2}) {
    for (BcKind bc : {BcKind::PEC, BcKind::Impedance}) {
      SolverParams p;
      p.m = 2;
      Solver s(zero_problem(dim, bc, dim == 2), 12, p);
      const GridState u = random_state(s, 1), v = random_state(s, 2);
      GridState w = u;
      for (std::size_t i = 0; i < w.dofs().size(); ++i) w.dofs()[i] = a * u.dofs()[i] + b * v.dofs()[i];
      auto advance = [&](const GridState& in) {
        s.set_state(in);
        s.step(s.dt());
        s.step(s.dt());
        return std::vector<double>(s.state().dofs().begin(), s.state().dofs().end());
      };
      const auto su = advance(u), sv = advance(v), sw = advance(w);
      double scale = 0.0, diff = 0.0;
      for (std::size_t i = 0; i < sw.size(); ++i) {
        scale = std::max(scale, std::abs(sw[i]));
        diff = std::max(diff, std::abs(sw[i] - a * su[i] - b * sv[i]));
      }
      EXPECT_LE(diff, 1e-12 * scale) << "dim=" << dim;
    }
  }
}

TEST(Solver, ErrorDecreasesWithRefinement1d) {
  double prev = 1e9;
  for (int n : {20, 40, 80}) {
    Solver s(standing_wave_1d(), n, SolverParams{});
    s.run();
    const double e = s.error_max();
    EXPECT_LT(e, prev / 5.0);
    prev = e;
  }
}

TEST(Solver, ThrowsOnBlowup) {
  SolverParams p;
  p.blowup = 1e-3;
  Solver s(standing_wave_1d(), 20, p);
  EXPECT_THROW(s.run(), InstabilityError);
}

TEST(Solver, FieldErrorsAndDivergence) {
  Solver s(standing_wave_2d(), 15, SolverParams{});
  EXPECT_LT(s.error_max(), 1e-14);
  EXPECT_EQ(s.field_errors().size(), 3u);
  s.run();
  const auto e = s.field_errors();
  EXPECT_DOUBLE_EQ(s.error_max(), *std::max_element(e.begin(), e.end()));
  EXPECT_GT(s.divergence_l2(), 0.0);
}
