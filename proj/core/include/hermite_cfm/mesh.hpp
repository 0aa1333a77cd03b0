#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hcfm {

struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
};

/// An interval (1-D) or a union of axis-aligned rectangles (2-D).
class Domain {
 public:
  static Domain interval(double a, double b);
  static Domain rectangle(double x0, double x1, double y0, double y1);
  /// Plus shape inside [x0,x1]x[y0,y1]: the vertical arm spans the x-fractions
  /// [lo, hi] of the box, the horizontal arm the same y-fractions.
  static Domain cross(double x0, double x1, double y0, double y1, double lo = 1.0 / 3.0,
                      double hi = 2.0 / 3.0);

  int dim() const { return dim_; }
  bool is_cross() const { return rects_.size() > 1; }
  const std::vector<Rect>& rects() const { return rects_; }
  Rect bounds() const;

  /// True when (x, y) is strictly inside one of the rectangles (y ignored in 1-D).
  bool contains(double x, double y = 0.0) const;

 private:
  int dim_ = 1;
  std::vector<Rect> rects_;
};

enum class NodeKind { Exterior, Interior, Edge, Corner, Reentrant };

const char* to_string(NodeKind k);

/// Primal/dual Cartesian grids over a Domain.
///
/// Primal nodes are (i, j) with 0 <= i <= nx, 0 <= j <= ny (j = 0 only in
/// 1-D); primal cells are (i, j) with i < nx, j < max(ny, 1). A cell is active
/// when its center is inside the domain. Dual nodes are active cell centers.
class StaggeredMesh {
 public:
  StaggeredMesh() = default;
  /// 1-D: ny must be 0. 2-D: spacing is the bounding box divided by nx, ny.
  /// Throws InvalidArgument when a domain edge is not on a primal grid line.
  StaggeredMesh(const Domain& domain, int nx, int ny = 0);

  int dim() const { return domain_.dim(); }
  const Domain& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cells_y() const { return ny_ == 0 ? 1 : ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  /// Mesh size h = max(dx, dy) (dx in 1-D).
  double h() const { return dim() == 1 ? dx_ : (dx_ > dy_ ? dx_ : dy_); }
  double x0() const { return x0_; }
  double y0() const { return y0_; }

  std::size_t node_count() const { return static_cast<std::size_t>(nx_ + 1) * (ny_ + 1); }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx_) * cells_y(); }
  std::size_t node_id(int i, int j) const { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }
  std::size_t cell_id(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  std::array<int, 2> node_ij(std::size_t id) const {
    return {static_cast<int>(id % (nx_ + 1)), static_cast<int>(id / (nx_ + 1))};
  }
  std::array<int, 2> cell_ij(std::size_t id) const {
    return {static_cast<int>(id % nx_), static_cast<int>(id / nx_)};
  }

  double node_x(int i) const { return x0_ + i * dx_; }
  double node_y(int j) const { return y0_ + j * dy_; }
  double cell_x(int i) const { return x0_ + (i + 0.5) * dx_; }
  double cell_y(int j) const { return dim() == 1 ? 0.0 : y0_ + (j + 0.5) * dy_; }

  /// False outside the index range.
  bool cell_active(int i, int j) const;
  int active_cells_around(int i, int j) const;
  NodeKind node_kind(int i, int j) const { return kinds_[node_id(i, j)]; }
  NodeKind node_kind(std::size_t id) const { return kinds_[id]; }

  const std::vector<std::size_t>& active_cells() const { return active_cells_; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_nodes_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_nodes_; }
  /// Interior plus boundary nodes.
  const std::vector<std::size_t>& active_nodes() const { return active_nodes_; }

 private:
  Domain domain_;
  int nx_ = 0, ny_ = 0;
  double dx_ = 0.0, dy_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  std::vector<char> active_;
  std::vector<NodeKind> kinds_;
  std::vector<std::size_t> active_cells_, interior_nodes_, boundary_nodes_, active_nodes_;
};

}  // namespace hcfm
