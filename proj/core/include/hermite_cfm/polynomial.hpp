#pragma once

#include <array>
#include <span>
#include <vector>

namespace hcfm {

/// Legendre polynomial P_n(x) by the three-term recurrence.
double legendre_eval(int n, double x);

/// Fills out[0..nmax] with P_0(x)..P_nmax(x).
void legendre_values(int nmax, double x, std::span<double> out);

/// Fills out[0..nmax] with the order-th derivative of P_0..P_nmax at x.
void legendre_derivatives(int nmax, int order, double x, std::span<double> out);

/// Gauss-Legendre rule on [-1, 1].
struct Quadrature {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule, 1 <= n <= 32. Nodes by Newton iteration on
/// P_n from Chebyshev initial guesses.
Quadrature gauss_rule(int n);

enum class Basis { ScaledMonomial, ScaledLegendre };

/// Tensor polynomial in scaled local coordinates s_a = (x_a - center_a) / scale_a
/// over `dim` space axes followed by one time axis.
///
/// Coefficients are stored row-major with the time axis fastest. In the
/// monomial basis the term for exponents e is c[e] * prod_a s_a^{e_a}; in the
/// Legendre basis it is c[e] * prod_a P_{e_a}(s_a).
class SpaceTimePoly {
 public:
  static constexpr int kMaxAxes = 3;

  SpaceTimePoly() = default;
  SpaceTimePoly(int dim, std::span<const int> degrees, std::span<const double> center,
                std::span<const double> scales, Basis basis = Basis::ScaledMonomial);

  int dim() const { return dim_; }
  int axes() const { return dim_ + 1; }
  Basis basis() const { return basis_; }
  int degree(int axis) const { return degree_[axis]; }
  int extent(int axis) const { return degree_[axis] + 1; }
  double center(int axis) const { return center_[axis]; }
  double scale(int axis) const { return scale_[axis]; }
  int stride(int axis) const { return stride_[axis]; }

  std::span<double> coeffs() { return coeffs_; }
  std::span<const double> coeffs() const { return coeffs_; }

  double& at(std::span<const int> exps);
  double at(std::span<const int> exps) const;
  /// Convenience accessors for the common layouts (space..., time).
  double& at(int e0, int e1) { return coeffs_[e0 * stride_[0] + e1 * stride_[1]]; }
  double at(int e0, int e1) const { return coeffs_[e0 * stride_[0] + e1 * stride_[1]]; }
  double& at(int e0, int e1, int e2) {
    return coeffs_[e0 * stride_[0] + e1 * stride_[1] + e2 * stride_[2]];
  }
  double at(int e0, int e1, int e2) const {
    return coeffs_[e0 * stride_[0] + e1 * stride_[1] + e2 * stride_[2]];
  }

  void set_center(int axis, double c) { center_[axis] = c; }

  /// Same polynomial expressed in the other basis (same centers and scales).
  SpaceTimePoly to_legendre() const;
  SpaceTimePoly to_monomial() const;

 private:
  void compute_strides();

  int dim_ = 0;
  Basis basis_ = Basis::ScaledMonomial;
  std::array<int, kMaxAxes> degree_{};
  std::array<double, kMaxAxes> center_{};
  std::array<double, kMaxAxes> scale_{1.0, 1.0, 1.0};
  std::array<int, kMaxAxes> stride_{};
  std::vector<double> coeffs_;
};

/// Evaluates p at the space point x (length dim) and time t.
double poly_eval(const SpaceTimePoly& p, std::span<const double> x, double t);

/// Physical derivative d^alpha p (alpha indexes space axes then time).
/// Requires the monomial basis.
SpaceTimePoly poly_derivative(const SpaceTimePoly& p, std::span<const int> alpha);

/// Matrix converting Legendre coefficients to monomial coefficients on one
/// axis: mono[j] = sum_n L2M(j, n) * leg[n]. Row-major (n+1)x(n+1).
std::vector<double> legendre_to_monomial_matrix(int degree);

/// Applies a separable linear map to a row-major tensor.
///
/// `extents` are the input extents. For every axis a, tables[a] is a row-major
/// rows[a] x extents[a] matrix; the result has extents rows[a] and entries
/// out(i) = sum_j in(j) prod_a tables[a](i_a, j_a).
std::vector<double> tensor_apply(std::span<const double> in, std::span<const int> extents,
                                 std::span<const std::span<const double>> tables,
                                 std::span<const int> rows);

}  // namespace hcfm
