#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hermite_cfm/error.hpp"
#include "hermite_cfm/harness.hpp"

using namespace hcfm;

TEST(FitRate, RecoversPowerLaw) {
  const std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e;
  for (double v : h) e.push_back(3.0 * std::pow(v, 4.5));
  const auto f = fit_rate(h, e);
  EXPECT_NEAR(f.slope, 4.5, 1e-12);
  ASSERT_EQ(f.pair_rates.size(), 3u);
  for (double r : f.pair_rates) EXPECT_NEAR(r, 4.5, 1e-12);
}

TEST(FitRate, UsesFinestPairsOnly) {
  // coarsest point is polluted; the two finest pairs are clean rate 3
  const std::vector<double> h = {0.0125, 0.1, 0.025, 0.05};
  const std::vector<double> e = {std::pow(0.0125, 3), 1.0, std::pow(0.025, 3), std::pow(0.05, 3)};
  EXPECT_NEAR(fit_rate(h, e).slope, 3.0, 1e-12);
  EXPECT_FALSE(std::isfinite(fit_rate(std::vector<double>{0.1}, std::vector<double>{1.0}).slope));
  EXPECT_FALSE(std::isfinite(fit_rate(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 0.0}).slope));
}

TEST(ConvergenceStudy, RowsSortedAndRated) {
  SolverParams p;
  const std::vector<int> ns = {40, 20};
  const auto r = convergence_study(standing_wave_1d(), p, ns, 1);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_GT(r.rows[0].h, r.rows[1].h);
  EXPECT_GT(r.rate.slope, 2.5);
  EXPECT_EQ(r.k, 2);
  EXPECT_EQ(r.bc, "pec");
  const std::vector<int> one = {20};
  EXPECT_FALSE(std::isfinite(convergence_study(standing_wave_1d(), p, one).rate.slope));
  const std::vector<int> none;
  EXPECT_THROW(convergence_study(standing_wave_1d(), p, none), InvalidArgument);
  EXPECT_THROW(convergence_study(zero_problem(1, BcKind::PEC), p, one), InvalidArgument);
}

TEST(ConvergenceStudy, NamesFailingMesh) {
  SolverParams p;
  p.blowup = 1e-3;
  const std::vector<int> ns = {20};
  try {
    convergence_study(standing_wave_1d(), p, ns);
    FAIL();
  } catch (const MeshInstabilityError& e) {
    EXPECT_EQ(e.resolution(), 20);
    EXPECT_NE(std::string(e.what()).find("n=20"), std::string::npos);
  }
}

TEST(SelfConvergence, RejectsNonNestedMeshes) {
  const std::vector<int> ns = {30};
  EXPECT_THROW(self_convergence(standing_wave_1d(), SolverParams{}, ns, 80), InvalidArgument);
}

TEST(SelfConvergence, ConvergesForSmoothProblem) {
  const std::vector<int> ns = {10, 20};
  const auto r = self_convergence(standing_wave_1d(), SolverParams{}, ns, 160);
  EXPECT_GT(r.rate.slope, 2.5);
}

// The assembled matrix reproduces the one-step map.
TEST(GlobalMatrix, EqualsStepMap) {
  for (int m = 1; m <= 3; ++m)
    for (BcKind bc : {BcKind::PEC, BcKind::PMC, BcKind::Impedance}) {
      SolverParams p;
      p.m = m;
      Solver s(zero_problem(1, bc), 20, p);
      const auto a = assemble_global_matrix(s, s.dt());
      ASSERT_EQ(a.rows(), 2u * 21 * (m + 1));
      std::mt19937_64 rng(m * 10 + static_cast<int>(bc));
      std::uniform_real_distribution<double> u(-1, 1);
      const double h = s.mesh().dx();
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(a.rows());
        for (double& v : w) v = u(rng);
        // scaled -> raw DOFs
        GridState st = s.state();
        for (std::size_t i = 0; i < w.size(); ++i)
          st.dofs()[i] = w[i] / std::pow(h, static_cast<int>(i % (m + 1)));
        s.set_state(st);
        s.step(s.dt());
        const auto aw = a.multiply(w);
        double scale = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
          const double out = s.state().dofs()[i] * std::pow(h, static_cast<int>(i % (m + 1)));
          scale = std::max(scale, std::abs(aw[i]));
          diff = std::max(diff, std::abs(out - aw[i]));
        }
        EXPECT_LE(diff, 1e-12 * scale);
      }
    }
}

TEST(GlobalMatrix, RejectsInhomogeneousAndLarge) {
  Solver s(standing_wave_1d(), 20, SolverParams{});
  EXPECT_THROW(assemble_global_matrix(s, s.dt()), InvalidArgument);
  Solver z(zero_problem(2, BcKind::PEC), 30, SolverParams{});
  EXPECT_THROW(assemble_global_matrix(z, z.dt()), InvalidArgument);
}

// Spectral verdicts agree with long-run random-data verdicts in 1-D.
TEST(Stability, SpectrumMatchesLongRun) {
  struct Case {
    int m;
    double cfl;
  };
  for (const Case c : {Case{1, 0.9}, Case{2, 0.9}, Case{3, 0.5}, Case{5, 0.9}, Case{5, 0.25}}) {
    SolverParams p;
    p.m = c.m;
    p.cfl = c.cfl;
    const auto prob = zero_problem(1, BcKind::PEC);
    const auto spectrum = stability_spectrum(prob, p, 20);
    const auto run = stability_longrun(prob, p, 20, 10000, 42, 1000);
    EXPECT_EQ(spectrum.stable, run.bounded) << "m=" << c.m << " cfl=" << c.cfl << " rho=" << spectrum.rho;
  }
}

TEST(Stability, LongRunIsDeterministicPerSeed) {
  SolverParams p;
  const auto prob = zero_problem(2, BcKind::PEC, true);
  const auto a = stability_longrun(prob, p, 6, 50, 9, 10);
  const auto b = stability_longrun(prob, p, 6, 50, 9, 10);
  const auto c = stability_longrun(prob, p, 6, 50, 10, 10);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i], b.history[i]);
  EXPECT_NE(a.initial, c.initial);
  EXPECT_LE(a.initial, 10 * std::numeric_limits<double>::epsilon());
  EXPECT_EQ(a.history.back().first, 50u);
}

TEST(Stability, OverflowReportsStep) {
  SolverParams p;
  p.m = 5;
  p.cfl = 0.9;
  const auto r = stability_longrun(zero_problem(1, BcKind::PEC), p, 20, 100000, 1, 100);
  EXPECT_FALSE(r.bounded);
  EXPECT_GT(r.overflow_step, 0);
}

TEST(Conditioning, GrowsAsMeshAndWeightShrink) {
  SolverParams p;
  const std::vector<double> ns = {20, 40, 80};
  const auto h = cond_study(zero_problem(1, BcKind::PEC), p, SweepKind::MeshSize, ns);
  EXPECT_LT(h.slope, -0.5);
  EXPECT_NEAR(h.rows.front().value, 0.05, 1e-15);
  const std::vector<double> ch = {1, 0.1, 0.01};
  const auto c = cond_study(zero_problem(1, BcKind::PEC), p, SweepKind::PenaltyWeight, ch, 40);
  EXPECT_LT(c.slope, -0.5);
  EXPECT_STREQ(to_string(SweepKind::Cfl), "cfl");
}
