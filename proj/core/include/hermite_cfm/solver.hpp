#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hermite_cfm/cfm.hpp"
#include "hermite_cfm/fields.hpp"
#include "hermite_cfm/hermite.hpp"
#include "hermite_cfm/mesh.hpp"

namespace hcfm {

/// A test problem: domain, material, boundary condition, time window and the
/// known fields. `exact` (when present) supplies the initial data, the
/// boundary data g = B U_exact and the error reference; otherwise `initial`
/// is used at t0 with homogeneous boundary data.
struct ProblemSpec {
  std::string name;
  int dim = 2;
  Domain domain;
  Material material;
  BcKind bc = BcKind::PEC;
  double t0 = 0.0, tf = 1.0;
  std::shared_ptr<const SeparableField> exact;
  std::shared_ptr<const SeparableField> initial;
  std::shared_ptr<const SeparableField> source;

  const SeparableField& initial_data() const;
};

/// H = sin(w x) sin(w t), E = cos(w x) cos(w t) on [1/3, 4/3], t in [0, 1].
ProblemSpec standing_wave_1d(double omega = 10.0, BcKind bc = BcKind::PEC);

/// Standing TMz mode of angular wavenumber omega*pi per axis on
/// [1/3, 4/3] x [1/6, 7/6] (or the cross inscribed in it), t in [0, 1].
ProblemSpec standing_wave_2d(double omega = 5.0, BcKind bc = BcKind::PEC, bool cross = false);

/// Ez = exp(-r^2 / (2 sigma^2)) about (cx, cy), H = 0 on [0, 1]^2 (or the
/// cross), homogeneous PEC, t in [0, 2].
ProblemSpec gaussian_pulse(double sigma = 0.035, bool cross = false, double cx = 0.5,
                           double cy = 0.5);

/// Manufactured fields with mu = sin(5 pi x y) + 2, eps = 2 exp(x y) and the
/// matching sources on the cross in [0, 1]^2, impedance boundary, t in [0, 1].
ProblemSpec manufactured_varcoef(bool cross = true);

/// Zero fields, unit material, homogeneous boundary data.
ProblemSpec zero_problem(int dim, BcKind bc, bool cross = false);

/// Builds a problem by name: "standing-1d", "standing-2d", "gaussian",
/// "manufactured-varcoef", "zero". Throws ConfigError on unknown names.
ProblemSpec make_problem(const std::string& name, int dim, BcKind bc, bool cross,
                         double omega, double sigma);

/// Default CFL number for a Hermite degree (1-D and 2-D tables).
double default_cfl(int dim, int m);

struct SolverParams {
  int m = 1;
  int q = 0;           ///< Taylor degree; 0 selects dim * (2m + 1)
  double cfl = 0.0;    ///< 0 selects default_cfl
  CfmParams cfm{0};    ///< k = 0 selects 2m
  double blowup = 1e100;
};

struct RunDiagnostics {
  std::size_t steps = 0;
  double dt = 0.0;        ///< full step size
  double final_dt = 0.0;  ///< size of the last step
  double time = 0.0;
  double max_abs = 0.0;   ///< max |field value| over active nodes at the end
};

/// Hermite-Taylor time stepping with the CFM boundary closure.
class Solver {
 public:
  Solver(ProblemSpec problem, int n, SolverParams params);
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  const ProblemSpec& problem() const { return problem_; }
  const StaggeredMesh& mesh() const { return *mesh_; }
  const SolverParams& params() const { return params_; }
  int m() const { return params_.m; }
  int q() const { return params_.q; }
  double dt() const { return dt_; }
  double cfl() const { return params_.cfl; }

  /// Primal state at the current time (node DOFs, raw derivatives).
  const GridState& state() const { return state_; }
  void set_state(GridState s);
  /// Samples the initial data at t0 into every active node.
  void initialize();

  /// Advances one step of size dt from the current time.
  void step(double dt);
  /// Steps to tf (problem tf when negative) with full steps and one
  /// shortened step landing on tf. Throws InstabilityError on overflow.
  RunDiagnostics run(double tf = -1.0,
                     const std::function<void(const Solver&, std::size_t)>& observer = {});

  /// Patches for a given step size (built on demand).
  const std::vector<CfmPatch>& patches(double dt);

  /// max over active nodes and fields of |U - U_exact| (field values).
  double error_max() const;
  /// Per field max errors.
  std::vector<double> field_errors() const;
  /// Discrete L2 norm of dx Hx + dy Hy over the active nodes (2-D, m >= 1).
  double divergence_l2() const;
  /// max |field value| over active nodes.
  double max_abs() const;

 private:
  void ensure_patches(double dt);

  ProblemSpec problem_;
  std::unique_ptr<StaggeredMesh> mesh_;
  SolverParams params_;
  std::unique_ptr<HermiteStepper> stepper_;
  std::vector<PatchDescriptor> descriptors_;
  std::vector<CfmPatch> patches_;
  double patches_dt_ = -1.0;
  PatchCache cache_;
  GridState state_;
  double dt_ = 0.0;
};

}  // namespace hcfm
