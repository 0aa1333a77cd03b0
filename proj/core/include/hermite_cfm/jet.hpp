#pragma once

#include <span>
#include <vector>

namespace hcfm {

/// Dense truncated multivariate Taylor expansion.
///
/// Holds the Taylor coefficients c[alpha] = (d^alpha f)(point) / alpha! for
/// every multi-index alpha with alpha_v <= orders[v]. Storage is row-major
/// with the last variable fastest. Truncation is per variable (tensor), so
/// products and compositions are exact on the retained coefficients.
class Jet {
 public:
  Jet() = default;
  Jet(std::vector<int> orders, std::vector<double> point);

  /// Jet of the constant function `value`.
  static Jet constant(std::vector<int> orders, std::vector<double> point, double value);
  /// Jet of the coordinate function x_var.
  static Jet variable(std::vector<int> orders, std::vector<double> point, int var);

  int variables() const { return static_cast<int>(orders_.size()); }
  std::span<const int> orders() const { return orders_; }
  std::span<const double> point() const { return point_; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  double coeff(std::span<const int> alpha) const;
  /// Mixed partial derivative d^alpha f at the expansion point.
  double derivative(std::span<const int> alpha) const;
  double value() const { return coeffs_[0]; }

  /// A jet with the same shape and the given constant value.
  Jet like(double value) const;
  bool same_shape(const Jet& other) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }

 private:
  std::vector<int> orders_;
  std::vector<double> point_;
  std::vector<double> coeffs_;
};

/// Truncated Cauchy product. Throws InvalidArgument on mismatched shapes.
Jet jet_multiply(const Jet& a, const Jet& b);

enum class JetFunction { Exp, Sin, Cos, Recip, Power };

/// Taylor composition f(a) truncated to a's orders. `exponent` is used by
/// Power only. Recip (and Power with a non-integer exponent) require a
/// nonzero constant term.
Jet jet_lift(JetFunction f, const Jet& a, double exponent = 1.0);

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);
Jet operator/(const Jet& a, const Jet& b);

Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double p);

}  // namespace hcfm
