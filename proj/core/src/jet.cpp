#include "hermite_cfm/jet.hpp"

#include <cmath>
#include <numbers>

#include "hermite_cfm/error.hpp"

namespace hcfm {

Jet::Jet(std::vector<int> orders, std::vector<double> point)
    : orders_(std::move(orders)), point_(std::move(point)) {
  if (orders_.size() != point_.size()) {
    throw InvalidArgument("Jet: orders and point must have the same length");
  }
  std::size_t n = 1;
  for (int o : orders_) {
    if (o < 0) throw InvalidArgument("Jet: negative order");
    n *= static_cast<std::size_t>(o + 1);
  }
  coeffs_.assign(n, 0.0);
}

Jet Jet::constant(std::vector<int> orders, std::vector<double> point, double value) {
  Jet j(std::move(orders), std::move(point));
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(std::vector<int> orders, std::vector<double> point, int var) {
  Jet j(std::move(orders), std::move(point));
  j.coeffs_[0] = j.point_[var];
  if (j.orders_[var] >= 1) {
    std::size_t stride = 1;
    for (int v = j.variables() - 1; v > var; --v) stride *= j.orders_[v] + 1;
    j.coeffs_[stride] = 1.0;
  }
  return j;
}

double Jet::coeff(std::span<const int> alpha) const {
  std::size_t idx = 0;
  for (int v = 0; v < variables(); ++v) {
    if (alpha[v] > orders_[v]) return 0.0;
    idx = idx * (orders_[v] + 1) + alpha[v];
  }
  return coeffs_[idx];
}

double Jet::derivative(std::span<const int> alpha) const {
  double f = 1.0;
  for (int v = 0; v < variables(); ++v) {
    for (int k = 2; k <= alpha[v]; ++k) f *= k;
  }
  return coeff(alpha) * f;
}

Jet Jet::like(double value) const {
  Jet j(orders_, point_);
  j.coeffs_[0] = value;
  return j;
}

bool Jet::same_shape(const Jet& other) const {
  return orders_ == other.orders_ && point_ == other.point_;
}

Jet& Jet::operator+=(const Jet& o) {
  if (!same_shape(o)) throw InvalidArgument("Jet: mismatched shapes");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (!same_shape(o)) throw InvalidArgument("Jet: mismatched shapes");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet jet_multiply(const Jet& a, const Jet& b) {
  if (!a.same_shape(b)) throw InvalidArgument("jet_multiply: mismatched shapes");
  const int nv = a.variables();
  const std::size_t n = a.size();
  const auto orders = a.orders();
  // Multi-index of every flat position.
  std::vector<int> mi(n * nv);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (int v = nv - 1; v >= 0; --v) {
      mi[i * nv + v] = static_cast<int>(rem % (orders[v] + 1));
      rem /= orders[v] + 1;
    }
  }
  Jet r = a.like(0.0);
  auto out = r.coeffs();
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  for (std::size_t i = 0; i < n; ++i) {
    if (ca[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      bool ok = true;
      for (int v = 0; v < nv; ++v) {
        if (mi[i * nv + v] + mi[j * nv + v] > orders[v]) {
          ok = false;
          break;
        }
      }
      // With a shared row-major layout the flat index of beta+gamma is i+j.
      if (ok) out[i + j] += ca[i] * cb[j];
    }
  }
  return r;
}

Jet jet_lift(JetFunction f, const Jet& a, double exponent) {
  int total = 0;
  for (int o : a.orders()) total += o;
  const double a0 = a.value();
  std::vector<double> c(total + 1);
  double fact = 1.0;
  for (int n = 0; n <= total; ++n) {
    if (n > 0) fact *= n;
    switch (f) {
      case JetFunction::Exp:
        c[n] = std::exp(a0) / fact;
        break;
      case JetFunction::Sin:
        c[n] = std::sin(a0 + n * std::numbers::pi / 2.0) / fact;
        break;
      case JetFunction::Cos:
        c[n] = std::cos(a0 + n * std::numbers::pi / 2.0) / fact;
        break;
      case JetFunction::Recip:
        if (a0 == 0.0) throw InvalidArgument("jet_lift: reciprocal of a jet with zero constant term");
        c[n] = ((n % 2 == 0) ? 1.0 : -1.0) / std::pow(a0, n + 1);
        break;
      case JetFunction::Power: {
        double binom = 1.0;
        for (int k = 0; k < n; ++k) binom *= (exponent - k) / (k + 1.0);
        if (binom == 0.0) {
          c[n] = 0.0;
        } else if (a0 == 0.0 && (exponent - n) != std::floor(exponent - n)) {
          throw InvalidArgument("jet_lift: non-integer power of a jet with zero constant term");
        } else if (a0 == 0.0 && exponent - n < 0) {
          throw InvalidArgument("jet_lift: negative power of a jet with zero constant term");
        } else {
          c[n] = binom * std::pow(a0, exponent - n);
        }
        break;
      }
    }
  }
  Jet d = a;
  d.coeffs()[0] = 0.0;
  Jet r = a.like(c[total]);
  for (int n = total - 1; n >= 0; --n) {
    r = jet_multiply(r, d);
    r.coeffs()[0] += c[n];
  }
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(const Jet& a, const Jet& b) { return jet_multiply(a, b); }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a += -s; }
Jet operator-(double s, Jet a) {
  a *= -1.0;
  return a += s;
}
Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
Jet operator/(double s, const Jet& a) { return jet_lift(JetFunction::Recip, a) * s; }
Jet operator/(const Jet& a, const Jet& b) { return a * jet_lift(JetFunction::Recip, b); }

Jet exp(const Jet& a) { return jet_lift(JetFunction::Exp, a); }
Jet sin(const Jet& a) { return jet_lift(JetFunction::Sin, a); }
Jet cos(const Jet& a) { return jet_lift(JetFunction::Cos, a); }
Jet sqrt(const Jet& a) { return jet_lift(JetFunction::Power, a, 0.5); }
Jet pow(const Jet& a, double p) { return jet_lift(JetFunction::Power, a, p); }

}  // namespace hcfm
