#include "hermite_cfm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "hermite_cfm/error.hpp"

namespace hcfm {

namespace {

double ls_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

// Runs fn(i) for i in [0, count) on up to `threads` workers, preserving order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, unsigned threads, F fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<T> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<T>> pending(count);
  std::size_t next = 0, done = 0;
  while (done < count) {
    while (next < count && next - done < threads) {
      pending[next] = std::async(std::launch::async, fn, next);
      ++next;
    }
    out[done] = pending[done].get();
    ++done;
  }
  return out;
}

std::vector<int> sorted_resolutions(std::span<const int> resolutions) {
  std::vector<int> r(resolutions.begin(), resolutions.end());
  if (r.empty()) throw InvalidArgument("at least one resolution is required");
  for (int n : r)
    if (n <= 0) throw InvalidArgument("resolutions must be positive");
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

StudyResult make_result(const ProblemSpec& problem, const SolverParams& params) {
  StudyResult res;
  res.label = problem.name;
  res.m = params.m;
  res.k = params.cfm.k > 0 ? params.cfm.k : 2 * params.m;
  res.c_h = params.cfm.c_h;
  res.cfl = params.cfl > 0.0 ? params.cfl : default_cfl(problem.dim, params.m);
  res.bc = to_string(problem.bc);
  res.domain = problem.domain.is_cross() ? "cross" : (problem.dim == 1 ? "interval" : "rectangle");
  return res;
}

void finish_rates(StudyResult& res, int dim) {
  std::vector<double> h, e, d;
  for (const auto& r : res.rows) {
    h.push_back(r.h);
    e.push_back(r.error);
    d.push_back(r.divergence);
  }
  if (res.rows.size() >= 2) {
    res.rate = fit_rate(h, e);
    if (dim == 2) res.divergence_rate = fit_rate(h, d);
  } else {
    res.rate.slope = std::numeric_limits<double>::quiet_NaN();
    res.divergence_rate.slope = std::numeric_limits<double>::quiet_NaN();
  }
  if (dim != 2) res.divergence_rate.slope = std::numeric_limits<double>::quiet_NaN();
}

RunDiagnostics run_named(Solver& s, int n) {
  try {
    return s.run();
  } catch (const InstabilityError& e) {
    throw MeshInstabilityError(n, e.step());
  }
}

}  // namespace

RateFit fit_rate(std::span<const double> h, std::span<const double> err, std::size_t pairs) {
  if (h.size() != err.size()) throw InvalidArgument("fit_rate: size mismatch");
  RateFit fit;
  fit.slope = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> order(h.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return h[a] > h[b]; });
  auto usable = [&](std::size_t i) { return h[i] > 0.0 && err[i] > 0.0 && std::isfinite(err[i]); };
  for (std::size_t p = 0; p + 1 < order.size(); ++p) {
    const auto a = order[p], b = order[p + 1];
    fit.pair_rates.push_back(usable(a) && usable(b)
                                 ? std::log(err[a] / err[b]) / std::log(h[a] / h[b])
                                 : std::numeric_limits<double>::quiet_NaN());
  }
  if (order.size() < 2 || pairs == 0) return fit;
  const std::size_t take = std::min(order.size(), pairs + 1);
  std::vector<double> lx, ly;
  for (std::size_t p = order.size() - take; p < order.size(); ++p) {
    if (!usable(order[p])) return fit;
    lx.push_back(std::log(h[order[p]]));
    ly.push_back(std::log(err[order[p]]));
  }
  fit.slope = ls_slope(lx, ly);
  return fit;
}

StudyResult convergence_study(const ProblemSpec& problem, const SolverParams& params,
                              std::span<const int> resolutions, unsigned threads) {
  if (!problem.exact) throw InvalidArgument("convergence study needs an exact solution");
  const auto ns = sorted_resolutions(resolutions);
  StudyResult res = make_result(problem, params);
  auto rows = parallel_map<StudyRow>(ns.size(), threads, [&](std::size_t i) {
    Solver s(problem, ns[i], params);
    const auto diag = run_named(s, ns[i]);
    StudyRow row;
    row.n = ns[i];
    row.h = s.mesh().h();
    row.dt = diag.dt;
    row.steps = diag.steps;
    row.error = s.error_max();
    row.divergence =
        problem.dim == 2 ? s.divergence_l2() : std::numeric_limits<double>::quiet_NaN();
    return row;
  });
  res.rows = std::move(rows);
  finish_rates(res, problem.dim);
  return res;
}

StudyResult self_convergence(const ProblemSpec& problem, const SolverParams& params,
                             std::span<const int> resolutions, int reference, unsigned threads) {
  const auto ns = sorted_resolutions(resolutions);
  for (int n : ns)
    if (n >= reference || reference % n != 0)
      throw InvalidArgument("resolution " + std::to_string(n) + " does not nest in reference " +
                            std::to_string(reference));

  // the last job is the reference run
  std::vector<int> jobs = ns;
  jobs.push_back(reference);
  struct Out {
    GridState state;
    RunDiagnostics diag;
    double h = 0.0;
    int nx = 0;
    std::vector<std::size_t> active;
  };
  auto outs = parallel_map<std::shared_ptr<Out>>(jobs.size(), threads, [&](std::size_t i) {
    Solver s(problem, jobs[i], params);
    auto o = std::make_shared<Out>();
    o->diag = run_named(s, jobs[i]);
    o->state = s.state();
    o->h = s.mesh().h();
    o->nx = s.mesh().nx();
    o->active = s.mesh().active_nodes();
    return o;
  });
  const Out& ref = *outs.back();
  const int ref_stride = ref.nx + 1;

  StudyResult res = make_result(problem, params);
  res.label = problem.name + " (self)";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const Out& o = *outs[i];
    const int r = reference / ns[i];
    const int stride = o.nx + 1;
    double err = 0.0;
    for (std::size_t id : o.active) {
      const int ii = static_cast<int>(id % stride), jj = static_cast<int>(id / stride);
      const std::size_t rid = static_cast<std::size_t>(jj * r) * ref_stride + ii * r;
      for (int f = 0; f < o.state.fields(); ++f)
        err = std::max(err, std::abs(o.state.field(id, f)[0] - ref.state.field(rid, f)[0]));
    }
    StudyRow row;
    row.n = ns[i];
    row.h = o.h;
    row.dt = o.diag.dt;
    row.steps = o.diag.steps;
    row.error = err;
    row.divergence = std::numeric_limits<double>::quiet_NaN();
    res.rows.push_back(row);
  }
  finish_rates(res, 1);
  return res;
}

DenseMatrix assemble_global_matrix(Solver& solver, double dt, std::size_t max_dim) {
  const auto& p = solver.problem();
  if (p.exact || p.source) throw InvalidArgument("global matrix needs homogeneous data");
  const GridState base = solver.state();
  const std::size_t nodes = base.count();
  const std::size_t block = base.block();
  const std::size_t dim = nodes * block;
  if (dim > max_dim)
    throw InvalidArgument("global matrix dimension " + std::to_string(dim) + " exceeds " +
                          std::to_string(max_dim));

  const auto& mesh = solver.mesh();
  const int mp1 = solver.m() + 1;
  const std::size_t pf = base.per_field();
  // scale[j]: raw derivative = scaled / scale[j]
  std::vector<double> scale(block);
  for (std::size_t j = 0; j < block; ++j) {
    const std::size_t a = j % pf;
    const int ax = p.dim == 1 ? static_cast<int>(a) : static_cast<int>(a) / mp1;
    const int ay = p.dim == 1 ? 0 : static_cast<int>(a) % mp1;
    scale[j] = std::pow(mesh.dx(), ax) * std::pow(mesh.dy(), ay);
  }
  std::vector<char> active(nodes, 0);
  for (std::size_t id : mesh.active_nodes()) active[id] = 1;

  DenseMatrix a(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    GridState s = base;
    std::fill(s.dofs().begin(), s.dofs().end(), 0.0);
    if (active[col / block]) {
      s.dofs()[col] = 1.0 / scale[col % block];
      solver.set_state(std::move(s));
      solver.step(dt);
      const auto out = solver.state().dofs();
      for (std::size_t row = 0; row < dim; ++row) a(row, col) = out[row] * scale[row % block];
    }
  }
  solver.set_state(base);
  return a;
}

SpectrumResult stability_spectrum(const ProblemSpec& homogeneous, const SolverParams& params, int n) {
  Solver s(homogeneous, n, params);
  const DenseMatrix a = assemble_global_matrix(s, s.dt());
  SpectrumResult r;
  r.n = n;
  r.h = s.mesh().h();
  r.cfl = s.cfl();
  r.c_h = params.cfm.c_h;
  r.m = s.m();
  r.dimension = a.rows();
  r.rho = spectral_radius(a);
  r.deviation = std::abs(1.0 - r.rho);
  r.stable = r.rho <= 1.0 + 1e-10;
  return r;
}

LongrunResult stability_longrun(const ProblemSpec& homogeneous, const SolverParams& params, int n,
                                std::size_t steps, std::uint64_t seed, std::size_t record_every) {
  if (homogeneous.exact || homogeneous.source)
    throw InvalidArgument("long-run test needs homogeneous data");
  if (record_every == 0) record_every = 1;
  Solver s(homogeneous, n, params);
  GridState st = s.state();
  std::mt19937_64 rng(seed);
  const double amp = 10.0 * std::numeric_limits<double>::epsilon();
  std::uniform_real_distribution<double> dist(-amp, amp);
  for (std::size_t id : s.mesh().active_nodes())
    for (double& v : st.node(id)) v = dist(rng);
  s.set_state(std::move(st));

  LongrunResult r;
  r.seed = seed;
  r.initial = s.max_abs();
  r.history.emplace_back(0, r.initial);
  double norm = r.initial;
  for (std::size_t k = 1; k <= steps; ++k) {
    s.step(s.dt());
    norm = s.max_abs();
    if (!std::isfinite(norm) || norm > params.blowup) {
      r.overflow_step = static_cast<long>(k);
      r.history.emplace_back(k, norm);
      r.final_norm = norm;
      r.bounded = false;
      return r;
    }
    if (k % record_every == 0 || k == steps) r.history.emplace_back(k, norm);
  }
  r.final_norm = norm;
  r.bounded = norm <= 100.0 * r.initial;
  return r;
}

const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::MeshSize: return "h";
    case SweepKind::Cfl: return "cfl";
    case SweepKind::PenaltyWeight: return "c_h";
  }
  return "?";
}

double max_patch_condition(Solver& solver) {
  const auto& patches = solver.patches(solver.dt());
  std::set<const PatchOperator*> seen;
  double kappa = 0.0;
  for (const auto& p : patches) {
    if (!seen.insert(p.op.get()).second) continue;
    kappa = std::max(kappa, cond1_estimate(p.op->lu));
  }
  return kappa;
}

CondResult cond_study(const ProblemSpec& problem, const SolverParams& params, SweepKind kind,
                      std::span<const double> values, int n) {
  CondResult res;
  res.kind = kind;
  std::vector<double> lx, ly;
  for (double v : values) {
    SolverParams p = params;
    int cells = n;
    switch (kind) {
      case SweepKind::MeshSize:
        cells = static_cast<int>(std::lround(v));
        break;
      case SweepKind::Cfl:
        p.cfl = v;
        break;
      case SweepKind::PenaltyWeight:
        p.cfm.c_h = v;
        break;
    }
    Solver s(problem, cells, p);
    CondRow row;
    row.value = kind == SweepKind::MeshSize ? s.mesh().h() : v;
    row.kappa = max_patch_condition(s);
    res.rows.push_back(row);
    lx.push_back(std::log(row.value));
    ly.push_back(std::log(row.kappa));
  }
  res.slope = ls_slope(lx, ly);
  return res;
}

}  // namespace hcfm
