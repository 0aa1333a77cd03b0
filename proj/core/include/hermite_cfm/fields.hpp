#pragma once

#include <array>
#include <functional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "hermite_cfm/jet.hpp"

namespace hcfm {

class StaggeredMesh;

/// A closed-form function of (x, y) with a value and a jet evaluation. 1-D
/// callers pass y = 0 (a constant jet).
struct SpaceFunction {
  std::function<double(double, double)> value;
  std::function<Jet(const Jet&, const Jet&)> jet;
};

/// A closed-form function of t.
struct TimeFunction {
  std::function<double(double)> value;
  std::function<Jet(const Jet&)> jet;
};

/// Builds a SpaceFunction from a generic callable usable with doubles and
/// Jets (bring std:: math into scope with using-declarations inside it).
template <class F>
SpaceFunction make_space_function(F f) {
  SpaceFunction s;
  s.value = [f](double x, double y) { return static_cast<double>(f(x, y)); };
  s.jet = [f](const Jet& x, const Jet& y) {
    auto r = f(x, y);
    if constexpr (std::is_arithmetic_v<decltype(r)>) {
      return x.like(static_cast<double>(r));
    } else {
      return Jet(std::move(r));
    }
  };
  return s;
}

template <class F>
TimeFunction make_time_function(F f) {
  TimeFunction s;
  s.value = [f](double t) { return static_cast<double>(f(t)); };
  s.jet = [f](const Jet& t) {
    auto r = f(t);
    if constexpr (std::is_arithmetic_v<decltype(r)>) {
      return t.like(static_cast<double>(r));
    } else {
      return Jet(std::move(r));
    }
  };
  return s;
}

SpaceFunction constant_space_function(double c);
TimeFunction constant_time_function(double c);

struct SeparableTerm {
  SpaceFunction space;
  TimeFunction time;
};

/// Vector field whose components are sums of products X_k(x, y) T_k(t).
class SeparableField {
 public:
  SeparableField() = default;
  explicit SeparableField(int components) : terms_(components) {}

  void add(int component, SpaceFunction space, TimeFunction time);

  int components() const { return static_cast<int>(terms_.size()); }
  const std::vector<SeparableTerm>& terms(int component) const { return terms_[component]; }
  bool empty() const;

  double value(int component, double x, double y, double t) const;

  /// Raw space derivatives d^alpha of one component at (x, y, t) for every
  /// alpha with alpha_axis <= m, in the node DOF layout (alpha_x slowest).
  void space_derivatives(int component, int dim, int m, double x, double y, double t,
                         std::span<double> out) const;

 private:
  std::vector<std::vector<SeparableTerm>> terms_;
};

/// Jets of (x, y) about a point for the given per-axis order (y order 0 in 1-D).
std::pair<Jet, Jet> coordinate_jets(int dim, int order, double x, double y);

/// Magnetic permeability and electric permittivity.
class Material {
 public:
  /// mu = eps = 1.
  Material() = default;
  static Material constant(double mu, double eps);
  static Material variable(SpaceFunction mu, SpaceFunction eps);

  bool is_constant() const { return constant_; }
  double mu(double x, double y) const { return constant_ ? mu0_ : mu_.value(x, y); }
  double eps(double x, double y) const { return constant_ ? eps0_ : eps_.value(x, y); }
  double impedance(double x, double y) const;
  double speed(double x, double y) const;
  /// (d mu/dx, d mu/dy).
  std::array<double, 2> grad_mu(double x, double y) const;

  /// Scaled Taylor coefficients of u = 1/mu and e = 1/eps about (x, y):
  /// entry (a, b) is d^{a,b}u / (a! b!) * hx^a * hy^b for a, b <= order
  /// (b = 0 only in 1-D). Row-major, b fastest.
  void scaled_inverse_coefficients(int dim, int order, double x, double y, double hx, double hy,
                                   std::span<double> u, std::span<double> e) const;

  /// Largest wave speed sampled on a 4x oversampled grid over the active cells.
  double max_speed(const StaggeredMesh& mesh) const;

 private:
  bool constant_ = true;
  double mu0_ = 1.0, eps0_ = 1.0;
  SpaceFunction mu_, eps_;
};

}  // namespace hcfm
