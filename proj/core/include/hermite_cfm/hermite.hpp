#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hermite_cfm/fields.hpp"
#include "hermite_cfm/mesh.hpp"
#include "hermite_cfm/polynomial.hpp"

namespace hcfm {

/// Number of field components: (H, E) in 1-D, (Hx, Hy, Ez) in 2-D.
inline int field_count(int dim) { return dim == 1 ? 2 : 3; }

/// Per-field DOF count (m+1)^dim. Entry alpha_x * (m+1) + alpha_y holds the
/// raw derivative d^alpha f.
inline std::size_t dofs_per_field(int dim, int m) {
  return dim == 1 ? static_cast<std::size_t>(m + 1) : static_cast<std::size_t>(m + 1) * (m + 1);
}

enum class Stagger { Primal, Dual };

/// Solution on one of the two staggered grids.
///
/// Primal states are indexed by node id, dual states by cell id; inactive
/// entries stay zero. `polys` holds the Hermite-Taylor polynomials (one per
/// field) that produced the entries flagged in the stepper's store mask.
class GridState {
 public:
  GridState() = default;
  GridState(int dim, int m, Stagger stagger, std::size_t count, double time);

  int dim() const { return dim_; }
  int m() const { return m_; }
  int fields() const { return field_count(dim_); }
  Stagger stagger() const { return stagger_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }
  std::size_t count() const { return count_; }
  std::size_t per_field() const { return dofs_per_field(dim_, m_); }
  std::size_t block() const { return per_field() * fields(); }

  std::span<double> dofs() { return dofs_; }
  std::span<const double> dofs() const { return dofs_; }
  std::span<double> node(std::size_t id) { return {dofs_.data() + id * block(), block()}; }
  std::span<const double> node(std::size_t id) const {
    return {dofs_.data() + id * block(), block()};
  }
  std::span<double> field(std::size_t id, int f) {
    return {dofs_.data() + id * block() + f * per_field(), per_field()};
  }
  std::span<const double> field(std::size_t id, int f) const {
    return {dofs_.data() + id * block() + f * per_field(), per_field()};
  }

  std::vector<std::vector<SpaceTimePoly>>& polys() { return polys_; }
  const std::vector<std::vector<SpaceTimePoly>>& polys() const { return polys_; }
  bool has_poly(std::size_t id) const { return id < polys_.size() && !polys_[id].empty(); }

 private:
  int dim_ = 1, m_ = 0;
  Stagger stagger_ = Stagger::Primal;
  std::size_t count_ = 0;
  double time_ = 0.0;
  std::vector<double> dofs_;
  std::vector<std::vector<SpaceTimePoly>> polys_;
};

/// Hermite interpolant on [xl, xr] matching derivatives 0..m at both ends.
/// Returns a space-only polynomial (time degree 0) of degree 2m+1 in
/// s = (x - xc) / (xr - xl), centered at the midpoint.
SpaceTimePoly hermite_interpolate_1d(std::span<const double> left, std::span<const double> right,
                                     double xl, double xr, int m);

/// Tensor Hermite interpolant on a rectangle. Corners are ordered
/// (x0,y0), (x1,y0), (x0,y1), (x1,y1); each holds the (m+1)^2 node DOFs.
SpaceTimePoly hermite_interpolate_2d(const std::array<std::span<const double>, 4>& corners,
                                     const Rect& cell, int m);

/// Low-level interpolation in scaled data: inputs are h^j f^(j) at s = -1/2
/// and s = +1/2, output the 2m+2 centered monomial coefficients.
void hermite_scaled_1d(const double* left, const double* right, int m, double* out);

/// Inputs of the Taylor recursion for one cell.
struct RecursionData {
  int dim = 1;
  int space_degree = 1;  ///< P = 2m+1
  int q = 1;             ///< time degree
  double hx = 1.0, hy = 1.0, dt = 1.0;
  /// Scaled Taylor coefficients of u = 1/mu and e = 1/eps (see
  /// Material::scaled_inverse_coefficients, order P). A single entry means a
  /// constant coefficient.
  std::span<const double> u, e;
  /// Optional scaled source coefficients, field-major, layout of the
  /// polynomial coefficients with time index 0..q-1.
  std::span<const double> source;
};

/// Fills time levels s = 1..q of the coefficient blocks (one per field,
/// layout of SpaceTimePoly with time fastest) from level 0. Uses the
/// constant-coefficient form when u and e have a single entry, otherwise the
/// Leibniz form.
void taylor_recursion(const RecursionData& d, std::span<double> coeffs);

/// Constant-coefficient recursion on space-only interpolants. Returns
/// space-time polynomials of time degree q (time center t_ref, scale dt).
std::vector<SpaceTimePoly> taylor_recursion_const(std::span<const SpaceTimePoly> space_polys,
                                                  double mu, double eps, double dt, int q,
                                                  double t_ref = 0.0);

/// Variable-coefficient recursion. The jets of u = 1/mu and e = 1/eps are
/// expanded at the cell center with per-axis order >= 2m+1.
std::vector<SpaceTimePoly> taylor_recursion_varcoef(std::span<const SpaceTimePoly> space_polys,
                                                    const Jet& u, const Jet& e, double dt, int q,
                                                    double t_ref = 0.0);

/// Node DOFs d^alpha p(target, t) for alpha_axis <= m, one block per field.
std::vector<double> evolve_node(std::span<const SpaceTimePoly> polys,
                                std::span<const double> target, double t, int m);

/// Interior Hermite-Taylor update between the staggered grids.
class HermiteStepper {
 public:
  /// `source` may be null. q is the Taylor degree in time.
  HermiteStepper(const StaggeredMesh& mesh, const Material& material, const SeparableField* source,
                 int m, int q);

  /// Flags (by cell id and by node id) selecting the polynomials kept on the
  /// output states for the boundary closure.
  void set_store_masks(std::vector<char> cells, std::vector<char> nodes);

  /// Primal state at t -> dual state at t + dt/2 (every active cell), or dual
  /// state at t -> primal state at t + dt/2 (interior nodes only; boundary
  /// nodes are left zero).
  GridState half_step(const GridState& in, double dt) const;

  int m() const { return m_; }
  int q() const { return q_; }
  const StaggeredMesh& mesh() const { return mesh_; }

 private:
  struct Location {
    double x = 0.0, y = 0.0;
    std::vector<double> u, e;          ///< scaled coefficient arrays
    std::vector<double> source_space;  ///< per field, per term, (P+1)^dim
  };
  void init_location(Location& loc) const;

  const StaggeredMesh& mesh_;
  Material material_;
  const SeparableField* source_;
  int m_, q_;
  std::vector<Location> cell_locs_;  ///< by cell id (active only populated)
  std::vector<Location> node_locs_;  ///< by node id (interior only populated)
  std::vector<char> store_cells_, store_nodes_;
};

}  // namespace hcfm
