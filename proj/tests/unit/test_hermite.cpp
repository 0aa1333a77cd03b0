#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hermite_cfm/hermite.hpp"
#include "hermite_cfm/jet.hpp"

using namespace hcfm;

namespace {

double falling(int a, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= a - i;
  return r;
}

// d^k/dx^k of sum_a c[a] x^a at x
double poly_deriv_1d(const std::vector<double>& c, double x, int k) {
  double s = 0.0;
  for (int a = k; a < static_cast<int>(c.size()); ++a) s += c[a] * falling(a, k) * std::pow(x, a - k);
  return s;
}

double max_abs_coeff(const SpaceTimePoly& p) {
  double m = 0.0;
  for (double v : p.coeffs()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(HermiteInterpolation, ReproducesPolynomials1d) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int m = 0; m <= 5; ++m) {
    std::vector<double> c(2 * m + 2);
    for (double& v : c) v = u(rng);
    const double xl = 0.3, xr = 0.45;
    std::vector<double> left(m + 1), right(m + 1);
    for (int k = 0; k <= m; ++k) {
      left[k] = poly_deriv_1d(c, xl, k);
      right[k] = poly_deriv_1d(c, xr, k);
    }
    const auto p = hermite_interpolate_1d(left, right, xl, xr, m);
    for (int i = 0; i <= 10; ++i) {
      const double x = xl + (xr - xl) * i / 10.0;
      const double px[] = {x};
      EXPECT_NEAR(poly_eval(p, px, 0.0), poly_deriv_1d(c, x, 0), 1e-11) << "m=" << m;
    }
  }
}

TEST(HermiteInterpolation, ReproducesPolynomials2d) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
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
    std::array<std::vector<double>, 4> data;
    const double cx[] = {cell.x0, cell.x1, cell.x0, cell.x1};
    const double cy[] = {cell.y0, cell.y0, cell.y1, cell.y1};
    for (int k = 0; k < 4; ++k)
      for (int ax = 0; ax <= m; ++ax)
        for (int ay = 0; ay <= m; ++ay) data[k].push_back(deriv(cx[k], cy[k], ax, ay));
    const std::array<std::span<const double>, 4> corners = {data[0], data[1], data[2], data[3]};
    const auto p = hermite_interpolate_2d(corners, cell, m);
    for (double fx : {0.0, 0.31, 0.5, 0.9})
      for (double fy : {0.0, 0.25, 0.77, 1.0}) {
        const double x[] = {cell.x0 + fx * 0.1, cell.y0 + fy * 0.1};
        EXPECT_NEAR(poly_eval(p, x, 0.0), deriv(x[0], x[1], 0, 0), 1e-11) << "m=" << m;
      }
  }
}

// The Taylor recursion must produce exact PDE solutions: with q at the
// termination degree the residual vanishes identically.
TEST(TaylorRecursion, ResidualNullity1d) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const double mu = 1.7, eps = 0.6;
  for (int m = 1; m <= 4; ++m) {
    const double xl = 0.0, xr = 0.1;
    std::vector<SpaceTimePoly> space;
    for (int f = 0; f < 2; ++f) {
      std::vector<double> l(m + 1), r(m + 1);
      for (int k = 0; k <= m; ++k) {
        l[k] = u(rng) * std::pow(10.0, k);
        r[k] = u(rng) * std::pow(10.0, k);
      }
      space.push_back(hermite_interpolate_1d(l, r, xl, xr, m));
    }
    const double dt = 0.05;
    const auto st = taylor_recursion_const(space, mu, eps, dt, 2 * m + 1, 0.0);
    const int dx[] = {1, 0}, dtt[] = {0, 1};
    const auto hx = poly_derivative(st[0], dx), ht = poly_derivative(st[0], dtt);
    const auto ex = poly_derivative(st[1], dx), et = poly_derivative(st[1], dtt);
    const double scale = std::max(max_abs_coeff(hx), max_abs_coeff(ex));
    for (double x : {0.0, 0.03, 0.07, 0.1})
      for (double t : {-0.02, 0.0, 0.025}) {
        const double px[] = {x};
        EXPECT_NEAR(mu * poly_eval(ht, px, t) + poly_eval(ex, px, t), 0.0, 1e-12 * scale);
        EXPECT_NEAR(eps * poly_eval(et, px, t) + poly_eval(hx, px, t), 0.0, 1e-12 * scale);
      }
  }
}

TEST(TaylorRecursion, ResidualNullity2d) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  const double mu = 1.3, eps = 2.1;
  for (int m = 1; m <= 2; ++m) {
    const Rect cell{0.0, 0.1, 0.0, 0.1};
    std::vector<SpaceTimePoly> space;
    for (int f = 0; f < 3; ++f) {
      std::array<std::vector<double>, 4> data;
      for (auto& d : data)
        for (int ax = 0; ax <= m; ++ax)
          for (int ay = 0; ay <= m; ++ay) d.push_back(u(rng) * std::pow(10.0, ax + ay));
      const std::array<std::span<const double>, 4> corners = {data[0], data[1], data[2], data[3]};
      space.push_back(hermite_interpolate_2d(corners, cell, m));
    }
    const int q = 2 * (2 * m + 1);
    const auto st = taylor_recursion_const(space, mu, eps, 0.05, q, 0.0);
    const int dx[] = {1, 0, 0}, dy[] = {0, 1, 0}, dt[] = {0, 0, 1};
    auto d = [&](int f, const int* a) { return poly_derivative(st[f], std::span<const int>(a, 3)); };
    const auto hx_t = d(0, dt), hy_t = d(1, dt), ez_t = d(2, dt);
    const auto ez_x = d(2, dx), ez_y = d(2, dy), hy_x = d(1, dx), hx_y = d(0, dy);
    const double scale = std::max({max_abs_coeff(ez_x), max_abs_coeff(hy_x), max_abs_coeff(hx_y)});
    for (double x : {0.0, 0.04, 0.1})
      for (double y : {0.02, 0.09})
        for (double t : {-0.025, 0.01}) {
          const double p[] = {x, y};
          EXPECT_NEAR(mu * poly_eval(hx_t, p, t) + poly_eval(ez_y, p, t), 0.0, 1e-12 * scale);
          EXPECT_NEAR(mu * poly_eval(hy_t, p, t) - poly_eval(ez_x, p, t), 0.0, 1e-12 * scale);
          EXPECT_NEAR(eps * poly_eval(ez_t, p, t) - poly_eval(hy_x, p, t) + poly_eval(hx_y, p, t),
                      0.0, 1e-12 * scale);
        }
  }
}

// In 1-D the recursion terminates: time coefficients beyond 2m+1 vanish.
TEST(TaylorRecursion, TerminatesAtTwoMPlusOne1d) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int m = 1; m <= 4; ++m) {
    std::vector<SpaceTimePoly> space;
    for (int f = 0; f < 2; ++f) {
      std::vector<double> l(m + 1), r(m + 1);
      for (int k = 0; k <= m; ++k) {
        l[k] = u(rng);
        r[k] = u(rng);
      }
      space.push_back(hermite_interpolate_1d(l, r, 0.0, 0.2, m));
    }
    const auto st = taylor_recursion_const(space, 1.0, 1.0, 0.1, 2 * m + 6, 0.0);
    for (const auto& p : st) {
      double top = 0.0, below = 0.0;
      for (int a = 0; a < p.extent(0); ++a) {
        for (int k = 2 * m + 2; k < p.extent(1); ++k) top = std::max(top, std::abs(p.at(a, k)));
        below = std::max(below, std::abs(p.at(a, 2 * m + 1)));
      }
      EXPECT_EQ(top, 0.0) << "m=" << m;
      EXPECT_GT(below, 0.0) << "m=" << m;
    }
  }
}

TEST(TaylorRecursion, VariableFormAgreesForConstantCoefficients) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  const int m = 2;
  const Rect cell{0.0, 0.1, 0.0, 0.1};
  std::vector<SpaceTimePoly> space;
  for (int f = 0; f < 3; ++f) {
    std::array<std::vector<double>, 4> data;
    for (auto& d : data)
      for (int i = 0; i < (m + 1) * (m + 1); ++i) d.push_back(u(rng));
    const std::array<std::span<const double>, 4> corners = {data[0], data[1], data[2], data[3]};
    space.push_back(hermite_interpolate_2d(corners, cell, m));
  }
  const double mu = 1.5, eps = 0.8;
  const auto ref = taylor_recursion_const(space, mu, eps, 0.04, 6, 0.0);
  const auto [xj, yj] = coordinate_jets(2, 2 * m + 1, 0.05, 0.05);
  const Jet uj = xj.like(1.0 / mu), ej = xj.like(1.0 / eps);
  const auto var = taylor_recursion_varcoef(space, uj, ej, 0.04, 6, 0.0);
  for (int f = 0; f < 3; ++f)
    for (std::size_t i = 0; i < ref[f].coeffs().size(); ++i)
      EXPECT_NEAR(var[f].coeffs()[i], ref[f].coeffs()[i], 1e-12 * (1 + std::abs(ref[f].coeffs()[i])));
}

TEST(EvolveNode, ReturnsRawDerivatives) {
  const int deg[] = {3, 1};
  const double c[] = {0.0, 0.0}, s[] = {1.0, 1.0};
  SpaceTimePoly p(1, deg, c, s);
  p.at(3, 0) = 1.0;  // x^3
  p.at(1, 1) = 2.0;  // 2 x t
  const std::vector<SpaceTimePoly> polys = {p, p};
  const double target[] = {0.5};
  const auto d = evolve_node(polys, target, 0.25, 2);
  ASSERT_EQ(d.size(), 6u);
  EXPECT_NEAR(d[0], 0.125 + 0.25, 1e-15);
  EXPECT_NEAR(d[1], 0.75 + 0.5, 1e-15);
  EXPECT_NEAR(d[2], 3.0, 1e-15);
  EXPECT_NEAR(d[3], d[0], 0.0);
}
