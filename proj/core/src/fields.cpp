#include "hermite_cfm/fields.hpp"

#include <algorithm>
#include <cmath>

#include "hermite_cfm/error.hpp"
#include "hermite_cfm/mesh.hpp"

namespace hcfm {

SpaceFunction constant_space_function(double c) {
  return make_space_function([c](const auto&, const auto&) { return c; });
}

TimeFunction constant_time_function(double c) {
  return make_time_function([c](const auto&) { return c; });
}

void SeparableField::add(int component, SpaceFunction space, TimeFunction time) {
  if (component < 0 || component >= components()) {
    throw InvalidArgument("SeparableField::add: component out of range");
  }
  terms_[component].push_back({std::move(space), std::move(time)});
}

bool SeparableField::empty() const {
  for (const auto& t : terms_) {
    if (!t.empty()) return false;
  }
  return true;
}

double SeparableField::value(int component, double x, double y, double t) const {
  double v = 0.0;
  for (const SeparableTerm& term : terms_[component]) v += term.space.value(x, y) * term.time.value(t);
  return v;
}

std::pair<Jet, Jet> coordinate_jets(int dim, int order, double x, double y) {
  std::vector<int> orders{order, dim == 1 ? 0 : order};
  std::vector<double> point{x, y};
  return {Jet::variable(orders, point, 0), Jet::variable(orders, point, 1)};
}

void SeparableField::space_derivatives(int component, int dim, int m, double x, double y, double t,
                                       std::span<double> out) const {
  const int ny = dim == 1 ? 0 : m;
  const std::size_t count = static_cast<std::size_t>(m + 1) * (ny + 1);
  if (out.size() < count) throw InvalidArgument("space_derivatives: output too short");
  std::fill(out.begin(), out.begin() + count, 0.0);
  if (terms_[component].empty()) return;
  auto [jx, jy] = coordinate_jets(dim, m, x, y);
  for (const SeparableTerm& term : terms_[component]) {
    const double tv = term.time.value(t);
    if (tv == 0.0) continue;
    const Jet j = term.space.jet(jx, jy);
    for (int a = 0; a <= m; ++a) {
      for (int b = 0; b <= ny; ++b) {
        const int alpha[2] = {a, b};
        out[a * (ny + 1) + b] += tv * j.derivative(alpha);
      }
    }
  }
}

Material Material::constant(double mu, double eps) {
  if (!(mu > 0.0) || !(eps > 0.0)) throw InvalidArgument("Material: mu and eps must be positive");
  Material m;
  m.mu0_ = mu;
  m.eps0_ = eps;
  return m;
}

Material Material::variable(SpaceFunction mu, SpaceFunction eps) {
  Material m;
  m.constant_ = false;
  m.mu_ = std::move(mu);
  m.eps_ = std::move(eps);
  return m;
}

double Material::impedance(double x, double y) const { return std::sqrt(mu(x, y) / eps(x, y)); }

double Material::speed(double x, double y) const { return 1.0 / std::sqrt(mu(x, y) * eps(x, y)); }

std::array<double, 2> Material::grad_mu(double x, double y) const {
  if (constant_) return {0.0, 0.0};
  auto [jx, jy] = coordinate_jets(2, 1, x, y);
  const Jet j = mu_.jet(jx, jy);
  const int ax[2] = {1, 0}, ay[2] = {0, 1};
  return {j.derivative(ax), j.derivative(ay)};
}

void Material::scaled_inverse_coefficients(int dim, int order, double x, double y, double hx,
                                           double hy, std::span<double> u,
                                           std::span<double> e) const {
  const int oy = dim == 1 ? 0 : order;
  const std::size_t n = static_cast<std::size_t>(order + 1) * (oy + 1);
  if (u.size() < n || e.size() < n) throw InvalidArgument("scaled_inverse_coefficients: short output");
  std::fill(u.begin(), u.begin() + n, 0.0);
  std::fill(e.begin(), e.begin() + n, 0.0);
  if (constant_) {
    u[0] = 1.0 / mu0_;
    e[0] = 1.0 / eps0_;
    return;
  }
  auto [jx, jy] = coordinate_jets(dim, order, x, y);
  const Jet ju = 1.0 / mu_.jet(jx, jy);
  const Jet je = 1.0 / eps_.jet(jx, jy);
  for (int a = 0; a <= order; ++a) {
    for (int b = 0; b <= oy; ++b) {
      const int alpha[2] = {a, b};
      const double s = std::pow(hx, a) * std::pow(hy, b);
      u[a * (oy + 1) + b] = ju.coeff(alpha) * s;
      e[a * (oy + 1) + b] = je.coeff(alpha) * s;
    }
  }
}

double Material::max_speed(const StaggeredMesh& mesh) const {
  if (constant_) return speed(0.0, 0.0);
  constexpr int kSamples = 4;
  double best = 0.0;
  const int sy = mesh.dim() == 1 ? 1 : kSamples;
  for (std::size_t id : mesh.active_cells()) {
    const auto [i, j] = mesh.cell_ij(id);
    for (int a = 0; a <= kSamples; ++a) {
      for (int b = 0; b <= (mesh.dim() == 1 ? 0 : sy); ++b) {
        const double x = mesh.node_x(i) + mesh.dx() * a / kSamples;
        const double y = mesh.dim() == 1 ? 0.0 : mesh.node_y(j) + mesh.dy() * b / kSamples;
        best = std::max(best, speed(x, y));
      }
    }
  }
  return best;
}

}  // namespace hcfm
