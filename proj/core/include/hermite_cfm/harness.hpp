#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hermite_cfm/linalg.hpp"
#include "hermite_cfm/solver.hpp"

namespace hcfm {

/// Least-squares slope of log(err) against log(h) over the `pairs` + 1
/// smallest h values, plus the rate of every consecutive pair (largest h
/// first). NaN when fewer than two usable points.
struct RateFit {
  double slope = 0.0;
  std::vector<double> pair_rates;
};

RateFit fit_rate(std::span<const double> h, std::span<const double> err, std::size_t pairs = 2);

struct StudyRow {
  int n = 0;             ///< cells per unit length
  double h = 0.0;
  double dt = 0.0;
  double error = 0.0;
  double divergence = 0.0;  ///< NaN when not applicable
  std::size_t steps = 0;
};

struct StudyResult {
  std::string label;
  std::vector<StudyRow> rows;  ///< decreasing h
  RateFit rate;                ///< of `error`
  RateFit divergence_rate;     ///< of `divergence` (2-D only)
  // metadata
  int m = 0, k = 0;
  double c_h = 1.0, cfl = 0.0;
  std::string bc, domain;
};

/// Runs the problem on every resolution (cells per unit length) and records
/// the max-norm error at tf (and the divergence norm in 2-D). Requires an
/// exact solution. An unstable run aborts with InstabilityError naming the
/// mesh. `threads` = 0 uses the hardware concurrency.
StudyResult convergence_study(const ProblemSpec& problem, const SolverParams& params,
                              std::span<const int> resolutions, unsigned threads = 0);

/// Errors against a reference run at the shared primal nodes. Every
/// resolution must divide `reference`.
StudyResult self_convergence(const ProblemSpec& problem, const SolverParams& params,
                             std::span<const int> resolutions, int reference, unsigned threads = 0);

/// One-step update matrix in the scaled DOF basis (h^alpha d^alpha) over all
/// nodes, built column by column. Requires homogeneous data (no exact
/// solution, no source) and at most `max_dim` unknowns.
DenseMatrix assemble_global_matrix(Solver& solver, double dt, std::size_t max_dim = 4000);

struct SpectrumResult {
  int n = 0;
  double h = 0.0, cfl = 0.0, c_h = 1.0;
  int m = 0;
  std::size_t dimension = 0;
  double rho = 0.0;
  double deviation = 0.0;  ///< |1 - rho|
  bool stable = false;     ///< rho <= 1 + 1e-10
};

SpectrumResult stability_spectrum(const ProblemSpec& homogeneous, const SolverParams& params, int n);

struct LongrunResult {
  std::uint64_t seed = 0;
  double initial = 0.0, final_norm = 0.0;
  std::vector<std::pair<std::size_t, double>> history;  ///< (step, max norm)
  bool bounded = false;      ///< final <= 100 x initial and no overflow
  long overflow_step = -1;   ///< first non-finite step, -1 when none
};

/// Random DOFs uniform in (-10 eps_M, 10 eps_M) on every active node, then
/// `steps` steps of the homogeneous problem; the norm is recorded every
/// `record_every` steps (and at the end).
LongrunResult stability_longrun(const ProblemSpec& homogeneous, const SolverParams& params, int n,
                                std::size_t steps, std::uint64_t seed,
                                std::size_t record_every = 1);

enum class SweepKind { MeshSize, Cfl, PenaltyWeight };

const char* to_string(SweepKind k);

struct CondRow {
  double value = 0.0;  ///< h, CFL or c_H
  double kappa = 0.0;  ///< max over patches of the condition estimate
};

struct CondResult {
  SweepKind kind = SweepKind::MeshSize;
  std::vector<CondRow> rows;
  double slope = 0.0;  ///< least-squares slope of log kappa against log value
};

/// Max condition estimate of the scaled patch matrices over a sweep. For
/// MeshSize the values are resolutions n (h = 1/n); otherwise `n` is fixed.
CondResult cond_study(const ProblemSpec& problem, const SolverParams& params, SweepKind kind,
                      std::span<const double> values, int n = 80);

/// Max condition estimate over the distinct patch matrices of one solver.
double max_patch_condition(Solver& solver);

}  // namespace hcfm
