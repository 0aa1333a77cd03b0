#include "hermite_cfm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hermite_cfm/error.hpp"

namespace hcfm {

Domain Domain::interval(double a, double b) {
  if (!(b > a)) throw InvalidArgument("Domain::interval: empty interval");
  Domain d;
  d.dim_ = 1;
  d.rects_.push_back({a, b, 0.0, 0.0});
  return d;
}

Domain Domain::rectangle(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidArgument("Domain::rectangle: empty rectangle");
  Domain d;
  d.dim_ = 2;
  d.rects_.push_back({x0, x1, y0, y1});
  return d;
}

Domain Domain::cross(double x0, double x1, double y0, double y1, double lo, double hi) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidArgument("Domain::cross: empty box");
  if (!(lo > 0.0 && hi > lo && hi < 1.0)) {
    throw InvalidArgument("Domain::cross: arm fractions must satisfy 0 < lo < hi < 1");
  }
  const double xa = x0 + lo * (x1 - x0), xb = x0 + hi * (x1 - x0);
  const double ya = y0 + lo * (y1 - y0), yb = y0 + hi * (y1 - y0);
  Domain d;
  d.dim_ = 2;
  d.rects_.push_back({xa, xb, y0, y1});
  d.rects_.push_back({x0, x1, ya, yb});
  return d;
}

Rect Domain::bounds() const {
  Rect b = rects_.front();
  for (const Rect& r : rects_) {
    b.x0 = std::min(b.x0, r.x0);
    b.x1 = std::max(b.x1, r.x1);
    b.y0 = std::min(b.y0, r.y0);
    b.y1 = std::max(b.y1, r.y1);
  }
  return b;
}

bool Domain::contains(double x, double y) const {
  for (const Rect& r : rects_) {
    if (dim_ == 1 ? (x > r.x0 && x < r.x1) : r.contains(x, y)) return true;
  }
  return false;
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Exterior: return "exterior";
    case NodeKind::Interior: return "interior";
    case NodeKind::Edge: return "edge";
    case NodeKind::Corner: return "corner";
    case NodeKind::Reentrant: return "reentrant";
  }
  return "?";
}

namespace {

void check_on_grid(double v, double origin, double step, const char* what) {
  const double r = (v - origin) / step;
  if (std::abs(r - std::round(r)) > 1e-8) {
    throw InvalidArgument(std::string("StaggeredMesh: domain ") + what + " at " + std::to_string(v) +
                          " is not on a primal grid line");
  }
}

}  // namespace

StaggeredMesh::StaggeredMesh(const Domain& domain, int nx, int ny)
    : domain_(domain), nx_(nx), ny_(ny) {
  if (nx < 1) throw InvalidArgument("StaggeredMesh: nx must be positive");
  const Rect b = domain.bounds();
  x0_ = b.x0;
  dx_ = b.width() / nx;
  if (domain.dim() == 1) {
    if (ny != 0) throw InvalidArgument("StaggeredMesh: ny must be 0 in 1-D");
    y0_ = 0.0;
    dy_ = dx_;
  } else {
    if (ny < 1) throw InvalidArgument("StaggeredMesh: ny must be positive in 2-D");
    y0_ = b.y0;
    dy_ = b.height() / ny;
    for (const Rect& r : domain.rects()) {
      check_on_grid(r.x0, x0_, dx_, "edge x");
      check_on_grid(r.x1, x0_, dx_, "edge x");
      check_on_grid(r.y0, y0_, dy_, "edge y");
      check_on_grid(r.y1, y0_, dy_, "edge y");
    }
  }

  active_.assign(cell_count(), 0);
  for (int j = 0; j < cells_y(); ++j) {
    for (int i = 0; i < nx_; ++i) {
      if (domain.contains(cell_x(i), cell_y(j))) {
        active_[cell_id(i, j)] = 1;
        active_cells_.push_back(cell_id(i, j));
      }
    }
  }

  kinds_.assign(node_count(), NodeKind::Exterior);
  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) {
      NodeKind kind = NodeKind::Exterior;
      const int n = active_cells_around(i, j);
      if (dim() == 1) {
        kind = n == 2 ? NodeKind::Interior : (n == 1 ? NodeKind::Edge : NodeKind::Exterior);
      } else if (n == 4) {
        kind = NodeKind::Interior;
      } else if (n == 3) {
        kind = NodeKind::Reentrant;
      } else if (n == 1) {
        kind = NodeKind::Corner;
      } else if (n == 2) {
        const bool diagonal = (cell_active(i - 1, j - 1) && cell_active(i, j)) ||
                              (cell_active(i, j - 1) && cell_active(i - 1, j));
        if (diagonal) {
          throw InvalidArgument("StaggeredMesh: domain touches itself at a single node (" +
                                std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        kind = NodeKind::Edge;
      }
      const std::size_t id = node_id(i, j);
      kinds_[id] = kind;
      if (kind == NodeKind::Interior) interior_nodes_.push_back(id);
      if (kind != NodeKind::Interior && kind != NodeKind::Exterior) boundary_nodes_.push_back(id);
      if (kind != NodeKind::Exterior) active_nodes_.push_back(id);
    }
  }
}

bool StaggeredMesh::cell_active(int i, int j) const {
  if (i < 0 || i >= nx_ || j < 0 || j >= cells_y()) return false;
  return active_[cell_id(i, j)] != 0;
}

int StaggeredMesh::active_cells_around(int i, int j) const {
  if (dim() == 1) return int(cell_active(i - 1, 0)) + int(cell_active(i, 0));
  return int(cell_active(i - 1, j - 1)) + int(cell_active(i, j - 1)) + int(cell_active(i - 1, j)) +
         int(cell_active(i, j));
}

}  // namespace hcfm
