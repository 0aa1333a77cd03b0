// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ids...]   (default: all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hermite_cfm/cfm.hpp"
#include "hermite_cfm/error.hpp"
#include "hermite_cfm/harness.hpp"
#include "hermite_cfm/hermite.hpp"
#include "hermite_cfm/jet.hpp"
#include "hermite_cfm/linalg.hpp"
#include "hermite_cfm/polynomial.hpp"

using namespace hcfm;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok) { pass = pass && ok; }
};

std::string num(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

const BcKind kAllBc[] = {BcKind::PEC, BcKind::PMC, BcKind::Impedance};

// 1. 1-D standing wave convergence
void c1(Outcome& o) {
  const double need[] = {2.6, 4.5, 6.4};
  const std::vector<int> ns = {20, 40, 80, 160};
  for (int m = 1; m <= 3; ++m) {
    SolverParams p;
    p.m = m;
    const auto r = convergence_study(standing_wave_1d(10.0), p, ns);
    o.check(r.rate.slope >= need[m - 1]);
    o.detail << "m=" << m << " rate " << num(r.rate.slope) << " (>= " << need[m - 1]
             << ", finest err " << num(r.rows.back().error) << "); ";
  }
}

// 2. 1-D spectral radius
void c2(Outcome& o) {
  const double cfl[] = {0.9, 0.9, 0.5};
  double worst = 0.0;
  int cases = 0;
  for (int m = 1; m <= 3; ++m)
    for (BcKind bc : kAllBc)
      for (int n : {20, 40, 80}) {
        SolverParams p;
        p.m = m;
        p.cfl = cfl[m - 1];
        const auto r = stability_spectrum(zero_problem(1, bc), p, n);
        o.check(r.rho <= 1.0 + 1e-10);
        worst = std::max(worst, r.rho);
        ++cases;
      }
  o.detail << cases << " cases (m=1..3, 3 bc, h=1/20..1/80), max rho - 1 = " << num(worst - 1.0)
           << " (<= 1e-10)";
}

// 3. destabilization trend at m = 5
void c3(Outcome& o) {
  const double cfls[] = {0.9, 0.5, 0.25};
  std::vector<SpectrumResult> rs;
  for (double c : cfls) {
    SolverParams p;
    p.m = 5;
    p.cfl = c;
    rs.push_back(stability_spectrum(zero_problem(1, BcKind::PEC), p, 20));
    o.detail << "cfl " << c << ": |1-rho| " << num(rs.back().deviation) << "; ";
  }
  const bool verdict = !rs.front().stable || (rs.back().stable && rs.back().deviation <= 1e-10);
  bool monotone = true;
  for (std::size_t i = 1; i < rs.size(); ++i) monotone = monotone && rs[i].deviation <= rs[i - 1].deviation;
  o.check(verdict && monotone);
  o.detail << "verdict " << (verdict ? "ok" : "bad") << ", non-increasing " << (monotone ? "yes" : "no");
}

// 4. conditioning scalings
void c4(Outcome& o) {
  for (int m = 1; m <= 2; ++m) {
    SolverParams p;
    p.m = m;
    const std::vector<double> ns = {20, 40, 80, 160};
    const auto h = cond_study(zero_problem(1, BcKind::PEC), p, SweepKind::MeshSize, ns);
    const std::vector<double> ch = {1.0, 0.1, 0.01};
    const auto c = cond_study(zero_problem(1, BcKind::PEC), p, SweepKind::PenaltyWeight, ch, 40);
    const bool ok_h = h.slope >= -1.3 && h.slope <= -0.7;
    const bool ok_c = c.slope >= -1.3 && c.slope <= -0.7;
    o.check(ok_h && ok_c);
    o.detail << "m=" << m << " slope vs h " << num(h.slope) << ", vs c_H " << num(c.slope) << "; ";
  }
  o.detail << "(both in [-1.3, -0.7])";
}

// 5. 2-D square convergence
void c5(Outcome& o) {
  const std::vector<int> ns = {15, 30, 60};
  for (int m = 1; m <= 2; ++m)
    for (BcKind bc : kAllBc) {
      SolverParams p;
      p.m = m;
      const auto r = convergence_study(standing_wave_2d(5.0, bc, false), p, ns);
      const bool ok = r.rate.slope >= 2 * m + 0.6 && r.divergence_rate.slope >= 2 * m - 0.4;
      o.check(ok);
      o.detail << "m=" << m << " " << to_string(bc) << " field " << num(r.rate.slope) << " div "
               << num(r.divergence_rate.slope) << (ok ? "" : " [miss]") << "; ";
    }
  o.detail << "(field >= 2m+0.6, div >= 2m-0.4)";
}

// 6. cross-domain PEC convergence
void c6(Outcome& o) {
  const std::vector<int> ns = {15, 30, 60};
  const auto r = convergence_study(standing_wave_2d(5.0, BcKind::PEC, true), SolverParams{}, ns);
  o.check(r.rate.slope >= 2.6);
  o.detail << "m=1 field rate " << num(r.rate.slope) << " (>= 2.6), pair rates";
  for (double v : r.rate.pair_rates) o.detail << ' ' << num(v);
}

// 7. Gaussian pulse self-convergence
void c7(Outcome& o) {
  const std::vector<int> sq = {25, 50};
  const auto s = self_convergence(gaussian_pulse(0.035, false), SolverParams{}, sq, 200);
  // the cross arms sit at 1/3 and 2/3, so its meshes are multiples of 3
  const std::vector<int> cr = {24, 48};
  const auto c = self_convergence(gaussian_pulse(0.035, true), SolverParams{}, cr, 192);
  o.check(s.rate.slope >= 2.5);
  o.check(c.rate.slope < 1.0);
  o.detail << "square rate " << num(s.rate.slope) << " (>= 2.5, errors " << num(s.rows[0].error)
           << ", " << num(s.rows[1].error) << "); cross rate " << num(c.rate.slope) << " (< 1)";
}

// 8. long-run random data on the cross
void c8(Outcome& o) {
  SolverParams p;
  p.cfl = 0.9;
  for (BcKind bc : kAllBc) {
    const auto r = stability_longrun(zero_problem(2, bc, true), p, 15, 10000, 20240501, 1000);
    o.check(r.bounded);
    o.detail << to_string(bc) << " final/initial " << num(r.final_norm / r.initial) << "; ";
  }
  o.detail << "(<= 100 after 10000 steps)";
}

// 9. variable coefficients on the cross
void c9(Outcome& o) {
  SolverParams p;
  p.m = 2;
  const std::vector<int> ns = {15, 30, 60};
  const auto r = convergence_study(manufactured_varcoef(true), p, ns);
  o.check(r.rate.slope >= 4.4 && r.divergence_rate.slope >= 3.6);
  o.detail << "field rate " << num(r.rate.slope) << " (>= 4.4), div rate "
           << num(r.divergence_rate.slope) << " (>= 3.6)";
}

// ---- 10. property suites ---------------------------------------------------

double falling(int a, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= a - i;
  return r;
}

double prop_reproduction() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int m = 0; m <= 3; ++m) {
    const int P = 2 * m + 1;
    std::vector<double> c((P + 1) * (P + 1));
    for (double& v : c) v = u(rng);
    auto deriv = [&](double x, double y, int ax, int ay) {
      double s = 0.0;
      for (int a = ax; a <= P; ++a)
        for (int b = ay; b <= P; ++b)
          s += c[a * (P + 1) + b] * falling(a, ax) * falling(b, ay) * std::pow(x, a - ax) *
               std::pow(y, b - ay);
      return s;
    };
    const Rect cell{0.2, 0.3, -0.1, 0.0};
    const double cx[] = {cell.x0, cell.x1, cell.x0, cell.x1};
    const double cy[] = {cell.y0, cell.y0, cell.y1, cell.y1};
    std::array<std::vector<double>, 4> data;
    for (int k = 0; k < 4; ++k)
      for (int ax = 0; ax <= m; ++ax)
        for (int ay = 0; ay <= m; ++ay) data[k].push_back(deriv(cx[k], cy[k], ax, ay));
    const std::array<std::span<const double>, 4> corners = {data[0], data[1], data[2], data[3]};
    const auto p2 = hermite_interpolate_2d(corners, cell, m);
    std::vector<double> l, r;
    for (int k = 0; k <= m; ++k) {
      l.push_back(deriv(cell.x0, 0.0, k, 0));
      r.push_back(deriv(cell.x1, 0.0, k, 0));
    }
    const auto p1 = hermite_interpolate_1d(l, r, cell.x0, cell.x1, m);
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; j <= 8; ++j) {
        const double x[] = {cell.x0 + 0.1 * i / 8, cell.y0 + 0.1 * j / 8};
        worst = std::max(worst, std::abs(poly_eval(p2, x, 0.0) - deriv(x[0], x[1], 0, 0)));
        if (j == 0) worst = std::max(worst, std::abs(poly_eval(p1, x, 0.0) - deriv(x[0], 0.0, 0, 0)));
      }
  }
  return worst;
}

double max_coeff(const SpaceTimePoly& p) {
  double m = 0.0;
  for (double v : p.coeffs()) m = std::max(m, std::abs(v));
  return m;
}

// relative PDE residual of Taylor-recursion output; termination check in 1-D
std::pair<double, double> prop_recursion() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0, tail = 0.0;
  for (int m = 1; m <= 3; ++m) {
    std::vector<SpaceTimePoly> s1;
    for (int f = 0; f < 2; ++f) {
      std::vector<double> l(m + 1), r(m + 1);
      for (int k = 0; k <= m; ++k) {
        l[k] = u(rng) * std::pow(10.0, k);
        r[k] = u(rng) * std::pow(10.0, k);
      }
      s1.push_back(hermite_interpolate_1d(l, r, 0.0, 0.1, m));
    }
    const auto st = taylor_recursion_const(s1, 1.7, 0.6, 0.05, 2 * m + 4, 0.0);
    for (const auto& p : st)
      for (int a = 0; a < p.extent(0); ++a)
        for (int k = 2 * m + 2; k < p.extent(1); ++k) tail = std::max(tail, std::abs(p.at(a, k)));
    const int dx[] = {1, 0}, dt[] = {0, 1};
    const auto hx = poly_derivative(st[0], dx), ht = poly_derivative(st[0], dt);
    const auto ex = poly_derivative(st[1], dx), et = poly_derivative(st[1], dt);
    const double scale = std::max(max_coeff(hx), max_coeff(ex));
    for (double x : {0.0, 0.04, 0.1})
      for (double t : {-0.02, 0.025}) {
        const double px[] = {x};
        worst = std::max(worst, std::abs(1.7 * poly_eval(ht, px, t) + poly_eval(ex, px, t)) / scale);
        worst = std::max(worst, std::abs(0.6 * poly_eval(et, px, t) + poly_eval(hx, px, t)) / scale);
      }
    if (m > 2) continue;
    const Rect cell{0.0, 0.1, 0.0, 0.1};
    std::vector<SpaceTimePoly> s2;
    for (int f = 0; f < 3; ++f) {
      std::array<std::vector<double>, 4> data;
      for (auto& d : data)
        for (int ax = 0; ax <= m; ++ax)
          for (int ay = 0; ay <= m; ++ay) d.push_back(u(rng) * std::pow(10.0, ax + ay));
      const std::array<std::span<const double>, 4> corners = {data[0], data[1], data[2], data[3]};
      s2.push_back(hermite_interpolate_2d(corners, cell, m));
    }
    const auto q2 = taylor_recursion_const(s2, 1.3, 2.1, 0.05, 2 * (2 * m + 1), 0.0);
    auto d = [&](int f, std::array<int, 3> a) { return poly_derivative(q2[f], a); };
    const auto hxt = d(0, {0, 0, 1}), hyt = d(1, {0, 0, 1}), ezt = d(2, {0, 0, 1});
    const auto ezx = d(2, {1, 0, 0}), ezy = d(2, {0, 1, 0}), hyx = d(1, {1, 0, 0}), hxy = d(0, {0, 1, 0});
    const double sc = std::max({max_coeff(ezx), max_coeff(hyx), max_coeff(hxy)});
    for (double x : {0.0, 0.06})
      for (double y : {0.03, 0.1})
        for (double t : {-0.02, 0.02}) {
          const double p[] = {x, y};
          worst = std::max(worst, std::abs(1.3 * poly_eval(hxt, p, t) + poly_eval(ezy, p, t)) / sc);
          worst = std::max(worst, std::abs(1.3 * poly_eval(hyt, p, t) - poly_eval(ezx, p, t)) / sc);
          worst = std::max(worst, std::abs(2.1 * poly_eval(ezt, p, t) - poly_eval(hyx, p, t) +
                                           poly_eval(hxy, p, t)) / sc);
        }
  }
  return {worst, tail};
}

std::pair<int, int> prop_spd() {
  int good = 0, total = 0;
  const Domain domains[] = {Domain::interval(0, 1), Domain::rectangle(0, 1, 0, 1), Domain::cross(0, 1, 0, 1)};
  std::set<PatchKind> kinds;
  for (const auto& dom : domains) {
    const StaggeredMesh mesh = dom.dim() == 1 ? StaggeredMesh(dom, 12) : StaggeredMesh(dom, 12, 12);
    const auto ds = classify_cf_nodes(mesh);
    for (int m = 1; m <= 2; ++m)
      for (BcKind bc : kAllBc) {
        std::set<std::array<int, 5>> seen;
        for (const auto& d : ds) {
          if (!seen.insert({static_cast<int>(d.kind), d.frame[0], d.frame[1], d.frame[2], d.frame[3]}).second)
            continue;
          CfmParams p{2 * m};
          const auto a = assemble_matrix(patch_geometry(d, mesh, p.beta), Material(), bc, p, 0.5 / 12);
          good += is_positive_definite(a);
          ++total;
          kinds.insert(d.kind);
        }
      }
  }
  if (kinds.size() != 4) good = -1;
  return {good, total};
}

double prop_zero() {
  double worst = 0.0;
  for (BcKind bc : kAllBc) {
    Solver a(zero_problem(1, bc), 20, SolverParams{});
    for (int k = 0; k < 1000; ++k) a.step(a.dt());
    worst = std::max(worst, a.max_abs());
    for (bool cross : {false, true}) {
      Solver s(zero_problem(2, bc, cross), 9, SolverParams{});
      for (int k = 0; k < 1000; ++k) s.step(s.dt());
      worst = std::max(worst, s.max_abs());
    }
  }
  return worst;
}

double prop_linearity() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int dim : {1, 2}) {
    SolverParams p;
    p.m = 2;
    Solver s(zero_problem(dim, BcKind::Impedance, dim == 2), 12, p);
    auto random = [&]() {
      GridState st = s.state();
      for (std::size_t id : s.mesh().active_nodes())
        for (double& v : st.node(id)) v = u(rng);
      return st;
    };
    const GridState x = random(), y = random();
    GridState z = x;
    for (std::size_t i = 0; i < z.dofs().size(); ++i) z.dofs()[i] = 0.3 * x.dofs()[i] - 2.0 * y.dofs()[i];
    auto adv = [&](const GridState& in) {
      s.set_state(in);
      s.step(s.dt());
      return std::vector<double>(s.state().dofs().begin(), s.state().dofs().end());
    };
    const auto a = adv(x), b = adv(y), c = adv(z);
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      scale = std::max(scale, std::abs(c[i]));
      diff = std::max(diff, std::abs(c[i] - 0.3 * a[i] + 2.0 * b[i]));
    }
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

double prop_quadrature() {
  double worst = 0.0;
  for (int n = 1; n <= 20; ++n) {
    const auto q = gauss_rule(n);
    for (int j = 0; j <= 2 * n - 1; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.points[i], j);
      worst = std::max(worst, std::abs(s - (j % 2 ? 0.0 : 2.0 / (j + 1))));
    }
  }
  return worst;
}

template <class T>
T jet_sample(const T& x, const T& y) {
  using std::cos;
  using std::exp;
  using std::sin;
  return exp(sin(x * y)) + 1.0 / (2.0 + x) + cos(3.0 * y) * x * x;
}

double prop_jet() {
  const double x0 = 0.4, y0 = -0.3;
  const Jet f = jet_sample(Jet::variable({2, 2}, {x0, y0}, 0), Jet::variable({2, 2}, {x0, y0}, 1));
  auto g = [](double x, double y) { return jet_sample(x, y); };
  const double h = 1e-4;
  const double fx = (g(x0 + h, y0) - g(x0 - h, y0)) / (2 * h);
  const double fy = (g(x0, y0 + h) - g(x0, y0 - h)) / (2 * h);
  const double fxy = (g(x0 + h, y0 + h) - g(x0 + h, y0 - h) - g(x0 - h, y0 + h) + g(x0 - h, y0 - h)) / (4 * h * h);
  const int ax[] = {1, 0}, ay[] = {0, 1}, axy[] = {1, 1};
  return std::max({std::abs(f.derivative(ax) - fx), std::abs(f.derivative(ay) - fy),
                   std::abs(f.derivative(axy) - fxy)});
}

std::pair<double, double> prop_eigen() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  double wt = 0.0, wd = 0.0;
  for (std::size_t n : {5u, 20u, 60u}) {
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng) + (i == j ? 0.5 : 0.0);
    std::complex<double> sum = 0.0, prod = 1.0;
    for (auto l : eigenvalues(a)) {
      sum += l;
      prod *= l;
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += a(i, i);
    const double det = lu_determinant(lu_factor(a));
    wt = std::max(wt, std::abs(sum - tr) / std::max(1.0, std::abs(tr)));
    wd = std::max(wd, std::abs(prod - det) / std::max(1.0, std::abs(det)));
  }
  return {wt, wd};
}

double prop_lu() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (std::size_t n : {3u, 30u, 100u}) {
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng) + (i == j ? 2.0 : 0.0);
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    const auto y = lu_solve(lu_factor(a), a.multiply(x));
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] - x[i]));
  }
  return worst;
}

void c10(Outcome& o) {
  auto item = [&](const char* name, double value, double tol) {
    const bool ok = value <= tol;
    o.check(ok);
    o.detail << name << ' ' << num(value, 2) << (ok ? "" : " [miss]") << "; ";
  };
  item("reproduction", prop_reproduction(), 1e-11);
  const auto [res, tail] = prop_recursion();
  item("recursion-residual", res, 1e-12);
  item("termination", tail, 0.0);
  const auto [good, total] = prop_spd();
  o.check(good == total);
  o.detail << "spd " << good << "/" << total << "; ";
  item("zero-preservation", prop_zero(), 1e-13);
  item("linearity", prop_linearity(), 1e-12);
  item("quadrature", prop_quadrature(), 1e-14);
  item("jet-vs-fd", prop_jet(), 1e-6);
  const auto [tr, det] = prop_eigen();
  item("eig-trace", tr, 1e-8);
  item("eig-det", det, 1e-6);
  item("lu-roundtrip", prop_lu(), 1e-10);
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "1-D convergence", c1},          {2, "1-D spectral radius", c2},
      {3, "destabilization trend", c3},    {4, "conditioning scalings", c4},
      {5, "2-D square convergence", c5},   {6, "cross PEC convergence", c6},
      {7, "Gaussian self-convergence", c7}, {8, "long-run stability", c8},
      {9, "variable coefficients", c9},    {10, "property suites", c10}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
