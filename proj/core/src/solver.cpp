#include "hermite_cfm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hermite_cfm/error.hpp"

namespace hcfm {

namespace {

constexpr double kPi = std::numbers::pi;

int cells_along(double length, int n) {
  const double c = length * n;
  const int r = static_cast<int>(std::lround(c));
  if (r < 1 || std::abs(c - r) > 1e-8 * std::max(1.0, c)) {
    throw InvalidArgument("mesh resolution " + std::to_string(n) +
                          " does not divide the domain extent");
  }
  return r;
}

}  // namespace

const SeparableField& ProblemSpec::initial_data() const {
  if (exact) return *exact;
  if (initial) return *initial;
  throw InvalidArgument("problem '" + name + "' has neither exact nor initial data");
}

ProblemSpec standing_wave_1d(double omega, BcKind bc) {
  ProblemSpec p;
  p.name = "standing-1d";
  p.dim = 1;
  p.domain = Domain::interval(1.0 / 3.0, 4.0 / 3.0);
  p.bc = bc;
  p.tf = 1.0;
  auto f = std::make_shared<SeparableField>(2);
  const double w = omega;
  f->add(0, make_space_function([w](const auto& x, const auto&) { using std::sin; return sin(w * x); }),
         make_time_function([w](const auto& t) { using std::sin; return sin(w * t); }));
  f->add(1, make_space_function([w](const auto& x, const auto&) { using std::cos; return cos(w * x); }),
         make_time_function([w](const auto& t) { using std::cos; return cos(w * t); }));
  p.exact = f;
  return p;
}

ProblemSpec standing_wave_2d(double omega, BcKind bc, bool cross) {
  ProblemSpec p;
  p.name = "standing-2d";
  p.dim = 2;
  p.domain = cross ? Domain::cross(1.0 / 3.0, 4.0 / 3.0, 1.0 / 6.0, 7.0 / 6.0)
                   : Domain::rectangle(1.0 / 3.0, 4.0 / 3.0, 1.0 / 6.0, 7.0 / 6.0);
  p.bc = bc;
  p.tf = 1.0;
  const double k = omega * kPi, w = std::sqrt(2.0) * omega * kPi, a = 1.0 / std::sqrt(2.0);
  auto f = std::make_shared<SeparableField>(3);
  const auto sin_t = make_time_function([w](const auto& t) { using std::sin; return sin(w * t); });
  f->add(0, make_space_function([k, a](const auto& x, const auto& y) {
           using std::sin; using std::cos;
           return -a * sin(k * x) * cos(k * y);
         }),
         sin_t);
  f->add(1, make_space_function([k, a](const auto& x, const auto& y) {
           using std::sin; using std::cos;
           return a * cos(k * x) * sin(k * y);
         }),
         sin_t);
  f->add(2, make_space_function([k](const auto& x, const auto& y) {
           using std::sin;
           return sin(k * x) * sin(k * y);
         }),
         make_time_function([w](const auto& t) { using std::cos; return cos(w * t); }));
  p.exact = f;
  return p;
}

ProblemSpec gaussian_pulse(double sigma, bool cross, double cx, double cy) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_pulse: sigma must be positive");
  ProblemSpec p;
  p.name = "gaussian";
  p.dim = 2;
  p.domain = cross ? Domain::cross(0.0, 1.0, 0.0, 1.0) : Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  p.bc = BcKind::PEC;
  p.tf = 2.0;
  const double c = 1.0 / (2.0 * sigma * sigma);
  auto f = std::make_shared<SeparableField>(3);
  f->add(2, make_space_function([c, cx, cy](const auto& x, const auto& y) {
           using std::exp;
           return exp(-c * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
         }),
         constant_time_function(1.0));
  p.initial = f;
  return p;
}

ProblemSpec manufactured_varcoef(bool cross) {
  ProblemSpec p;
  p.name = "manufactured-varcoef";
  p.dim = 2;
  p.domain = cross ? Domain::cross(0.0, 1.0, 0.0, 1.0) : Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  p.bc = BcKind::Impedance;
  p.tf = 1.0;
  const double tp = 2.0 * kPi;
  p.material = Material::variable(
      make_space_function([](const auto& x, const auto& y) { using std::sin; return sin(5.0 * kPi * x * y) + 2.0; }),
      make_space_function([](const auto& x, const auto& y) { using std::exp; return 2.0 * exp(x * y); }));

  const auto sin_t = make_time_function([tp](const auto& t) { using std::sin; return sin(tp * t); });
  const auto cos_t = make_time_function([tp](const auto& t) { using std::cos; return cos(tp * t); });
  auto f = std::make_shared<SeparableField>(3);
  f->add(0, make_space_function([](const auto& x, const auto& y) { using std::exp; return -1.0 * x * exp(-1.0 * x * y); }), sin_t);
  f->add(1, make_space_function([](const auto& x, const auto& y) { using std::exp; return y * exp(-1.0 * x * y); }), sin_t);
  f->add(2, make_space_function([tp](const auto& x, const auto& y) { using std::sin; return sin(tp * x * y); }), cos_t);
  p.exact = f;

  auto s = std::make_shared<SeparableField>(3);
  s->add(0, make_space_function([tp](const auto& x, const auto& y) {
           using std::exp; using std::cos; using std::sin;
           const auto u = 1.0 / (sin(5.0 * kPi * x * y) + 2.0);
           return -tp * x * exp(-1.0 * x * y) + u * (tp * x) * cos(tp * x * y);
         }),
         cos_t);
  s->add(1, make_space_function([tp](const auto& x, const auto& y) {
           using std::exp; using std::cos; using std::sin;
           const auto u = 1.0 / (sin(5.0 * kPi * x * y) + 2.0);
           return tp * y * exp(-1.0 * x * y) - u * (tp * y) * cos(tp * x * y);
         }),
         cos_t);
  s->add(2, make_space_function([tp](const auto& x, const auto& y) {
           using std::exp; using std::sin;
           const auto e = 0.5 * exp(-1.0 * x * y);
           return -tp * sin(tp * x * y) + e * (x * x + y * y) * exp(-1.0 * x * y);
         }),
         sin_t);
  p.source = s;
  return p;
}

ProblemSpec zero_problem(int dim, BcKind bc, bool cross) {
  ProblemSpec p;
  p.name = "zero";
  p.dim = dim;
  if (dim == 1) {
    p.domain = Domain::interval(1.0 / 3.0, 4.0 / 3.0);
  } else {
    p.domain = cross ? Domain::cross(0.0, 1.0, 0.0, 1.0) : Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  }
  p.bc = bc;
  p.tf = 1.0;
  p.initial = std::make_shared<SeparableField>(field_count(dim));
  return p;
}

ProblemSpec make_problem(const std::string& name, int dim, BcKind bc, bool cross, double omega,
                         double sigma) {
  if (name == "standing-1d") return standing_wave_1d(omega, bc);
  if (name == "standing-2d") return standing_wave_2d(omega, bc, cross);
  if (name == "gaussian") return gaussian_pulse(sigma, cross);
  if (name == "manufactured-varcoef") return manufactured_varcoef(cross);
  if (name == "zero") return zero_problem(dim, bc, cross);
  throw ConfigError("unknown problem '" + name +
                    "' (allowed: standing-1d, standing-2d, gaussian, manufactured-varcoef, zero)");
}

double default_cfl(int dim, int m) {
  static const double one[] = {0.9, 0.9, 0.5, 0.5, 0.25};
  static const double two[] = {0.9, 0.5, 0.25, 0.5, 0.25};
  if (m < 1 || m > 5) throw InvalidArgument("default_cfl: m must be in 1..5");
  return dim == 1 ? one[m - 1] : two[m - 1];
}

// ---------------------------------------------------------------------------

Solver::Solver(ProblemSpec problem, int n, SolverParams params)
    : problem_(std::move(problem)), params_(params) {
  if (params_.m < 0) throw InvalidArgument("Solver: m must be nonnegative");
  if (n < 1) throw InvalidArgument("Solver: resolution must be positive");
  const Rect b = problem_.domain.bounds();
  if (problem_.dim == 1) {
    mesh_ = std::make_unique<StaggeredMesh>(problem_.domain, cells_along(b.width(), n));
  } else {
    mesh_ = std::make_unique<StaggeredMesh>(problem_.domain, cells_along(b.width(), n),
                                            cells_along(b.height(), n));
  }
  const int dim = problem_.dim;
  if (params_.q <= 0) params_.q = dim * (2 * params_.m + 1);
  if (params_.cfl <= 0.0) params_.cfl = default_cfl(dim, std::max(params_.m, 1));
  if (params_.cfm.k <= 0) params_.cfm.k = 2 * params_.m;
  const double h = dim == 1 ? mesh_->dx() : std::min(mesh_->dx(), mesh_->dy());
  dt_ = params_.cfl * h / problem_.material.max_speed(*mesh_);

  stepper_ = std::make_unique<HermiteStepper>(*mesh_, problem_.material, problem_.source.get(),
                                              params_.m, params_.q);
  descriptors_ = classify_cf_nodes(*mesh_);
  std::vector<char> cells(mesh_->cell_count(), 0), nodes(mesh_->node_count(), 0);
  for (const PatchDescriptor& d : descriptors_) {
    const PatchGeometry g = patch_geometry(d, *mesh_, params_.cfm.beta);
    for (const HermitePiece& p : g.dual_pieces) cells[p.id] = 1;
    for (const HermitePiece& p : g.primal_pieces) nodes[p.id] = 1;
  }
  stepper_->set_store_masks(std::move(cells), std::move(nodes));
  initialize();
}

void Solver::set_state(GridState s) {
  if (s.dim() != problem_.dim || s.m() != params_.m || s.stagger() != Stagger::Primal ||
      s.count() != mesh_->node_count()) {
    throw InvalidArgument("Solver::set_state: state does not match the mesh");
  }
  state_ = std::move(s);
}

void Solver::initialize() {
  const int dim = problem_.dim, nf = field_count(dim);
  state_ = GridState(dim, params_.m, Stagger::Primal, mesh_->node_count(), problem_.t0);
  const SeparableField& init = problem_.initial_data();
  for (std::size_t id : mesh_->active_nodes()) {
    const auto [i, j] = mesh_->node_ij(id);
    const double x = mesh_->node_x(i), y = dim == 1 ? 0.0 : mesh_->node_y(j);
    for (int f = 0; f < nf; ++f) {
      init.space_derivatives(f, dim, params_.m, x, y, problem_.t0, state_.field(id, f));
    }
  }
}

void Solver::ensure_patches(double dt) {
  if (dt == patches_dt_) return;
  cache_ = PatchCache();
  patches_.clear();
  patches_.reserve(descriptors_.size());
  const BoundarySpec bc{problem_.bc, problem_.exact.get()};
  for (const PatchDescriptor& d : descriptors_) {
    patches_.push_back(build_patch(d, *mesh_, problem_.material, bc, problem_.source.get(),
                                   params_.cfm, params_.m, params_.q, dt, &cache_));
  }
  patches_dt_ = dt;
}

const std::vector<CfmPatch>& Solver::patches(double dt) {
  ensure_patches(dt);
  return patches_;
}

void Solver::step(double dt) {
  ensure_patches(dt);
  const double t = state_.time();
  const GridState dual = stepper_->half_step(state_, dt);
  GridState next = stepper_->half_step(dual, dt);
  for (const CfmPatch& p : patches_) {
    const std::vector<double> b = assemble_rhs(p, dual, next, t);
    const std::vector<double> dofs = cfm_node_dofs(p, b);
    std::copy(dofs.begin(), dofs.end(), next.node(p.descriptor.node_id).begin());
  }
  next.polys().clear();
  state_ = std::move(next);
}

RunDiagnostics Solver::run(double tf, const std::function<void(const Solver&, std::size_t)>& observer) {
  if (tf < 0.0) tf = problem_.tf;
  const double t0 = state_.time();
  const double span = tf - t0;
  RunDiagnostics diag;
  diag.dt = dt_;
  if (span < 0.0) throw InvalidArgument("Solver::run: final time precedes the current time");
  auto full = static_cast<std::size_t>(std::floor(span / dt_));
  double rem = span - static_cast<double>(full) * dt_;
  if (rem < 1e-12 * std::max(span, 1.0)) {
    rem = 0.0;
  } else if (dt_ - rem < 1e-12 * std::max(span, 1.0)) {
    ++full;
    rem = 0.0;
  }
  auto check = [&](std::size_t step) {
    for (double v : state_.dofs()) {
      if (!std::isfinite(v) || std::abs(v) > params_.blowup) throw InstabilityError(static_cast<long>(step));
    }
  };
  for (std::size_t s = 1; s <= full; ++s) {
    step(dt_);
    state_.set_time(s == full && rem == 0.0 ? tf : t0 + static_cast<double>(s) * dt_);
    check(s);
    if (observer) observer(*this, s);
  }
  diag.steps = full;
  diag.final_dt = full > 0 ? dt_ : 0.0;
  if (rem > 0.0) {
    step(rem);
    state_.set_time(tf);
    ++diag.steps;
    check(diag.steps);
    diag.final_dt = rem;
    if (observer) observer(*this, diag.steps);
  }
  diag.time = state_.time();
  diag.max_abs = max_abs();
  return diag;
}

std::vector<double> Solver::field_errors() const {
  if (!problem_.exact) throw InvalidArgument("problem '" + problem_.name + "' has no exact solution");
  const int dim = problem_.dim, nf = field_count(dim);
  const double t = state_.time();
  std::vector<double> err(nf, 0.0);
  for (std::size_t id : mesh_->active_nodes()) {
    const auto [i, j] = mesh_->node_ij(id);
    const double x = mesh_->node_x(i), y = dim == 1 ? 0.0 : mesh_->node_y(j);
    for (int f = 0; f < nf; ++f) {
      const double e = std::abs(state_.field(id, f)[0] - problem_.exact->value(f, x, y, t));
      err[f] = std::max(err[f], e);
    }
  }
  return err;
}

double Solver::error_max() const {
  const auto e = field_errors();
  return *std::max_element(e.begin(), e.end());
}

double Solver::divergence_l2() const {
  if (problem_.dim != 2 || params_.m < 1) {
    throw InvalidArgument("divergence_l2 needs a 2-D problem with m >= 1");
  }
  const int m = params_.m;
  double sum = 0.0;
  for (std::size_t id : mesh_->active_nodes()) {
    const auto [i, j] = mesh_->node_ij(id);
    const double w = mesh_->active_cells_around(i, j) / 4.0;
    const double d = state_.field(id, 0)[m + 1] + state_.field(id, 1)[1];
    sum += w * d * d;
  }
  return std::sqrt(mesh_->dx() * mesh_->dy() * sum);
}

double Solver::max_abs() const {
  const int nf = field_count(problem_.dim);
  double best = 0.0;
  for (std::size_t id : mesh_->active_nodes()) {
    for (int f = 0; f < nf; ++f) best = std::max(best, std::abs(state_.field(id, f)[0]));
  }
  return best;
}

}  // namespace hcfm
