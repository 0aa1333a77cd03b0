#include "hermite_cfm/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hermite_cfm/error.hpp"

namespace hcfm {

GridState::GridState(int dim, int m, Stagger stagger, std::size_t count, double time)
    : dim_(dim), m_(m), stagger_(stagger), count_(count), time_(time) {
  if (dim != 1 && dim != 2) throw InvalidArgument("GridState: dim must be 1 or 2");
  if (m < 0) throw InvalidArgument("GridState: m must be nonnegative");
  dofs_.assign(count * block(), 0.0);
}

void hermite_scaled_1d(const double* left, const double* right, int m, double* out) {
  const int n = 2 * m + 2;
  double z[32];
  double q[32][32];
  for (int i = 0; i < n; ++i) {
    z[i] = i <= m ? -0.5 : 0.5;
    q[i][0] = i <= m ? left[0] : right[0];
  }
  for (int k = 1; k < n; ++k) {
    double kfact = 1.0;
    for (int r = 2; r <= k; ++r) kfact *= r;
    for (int i = k; i < n; ++i) {
      if (z[i] == z[i - k]) {
        q[i][k] = (i <= m ? left[k] : right[k]) / kfact;
      } else {
        q[i][k] = (q[i][k - 1] - q[i - 1][k - 1]) / (z[i] - z[i - k]);
      }
    }
  }
  // Newton form to monomials: c <- c * (s - z_k) + d_k.
  std::fill(out, out + n, 0.0);
  out[0] = q[n - 1][n - 1];
  int deg = 0;
  for (int k = n - 2; k >= 0; --k) {
    for (int j = deg + 1; j >= 1; --j) out[j] = out[j - 1] - z[k] * out[j];
    out[0] = -z[k] * out[0] + q[k][k];
    ++deg;
  }
}

SpaceTimePoly hermite_interpolate_1d(std::span<const double> left, std::span<const double> right,
                                     double xl, double xr, int m) {
  if (static_cast<int>(left.size()) < m + 1 || static_cast<int>(right.size()) < m + 1) {
    throw InvalidArgument("hermite_interpolate_1d: need derivatives 0..m at both ends");
  }
  const double h = xr - xl;
  const int degrees[2] = {2 * m + 1, 0};
  const double center[2] = {0.5 * (xl + xr), 0.0};
  const double scales[2] = {h, 1.0};
  SpaceTimePoly p(1, degrees, center, scales);
  double l[16], r[16], pw = 1.0;
  for (int j = 0; j <= m; ++j, pw *= h) {
    l[j] = left[j] * pw;
    r[j] = right[j] * pw;
  }
  hermite_scaled_1d(l, r, m, p.coeffs().data());
  return p;
}

namespace {

// Tensor interpolation from scaled corner data (layout a*(m+1)+b) into
// out[(i*(P+1)+j)*stride].
void hermite_scaled_2d(const std::array<const double*, 4>& g, int m, double* out, int stride) {
  const int P = 2 * m + 1, n = P + 1;
  double bottom[16][16], top[16][16];  // [b][i]
  double l[16], r[16];
  for (int b = 0; b <= m; ++b) {
    for (int a = 0; a <= m; ++a) {
      l[a] = g[0][a * (m + 1) + b];
      r[a] = g[1][a * (m + 1) + b];
    }
    hermite_scaled_1d(l, r, m, bottom[b]);
    for (int a = 0; a <= m; ++a) {
      l[a] = g[2][a * (m + 1) + b];
      r[a] = g[3][a * (m + 1) + b];
    }
    hermite_scaled_1d(l, r, m, top[b]);
  }
  double col[16];
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b <= m; ++b) {
      l[b] = bottom[b][i];
      r[b] = top[b][i];
    }
    hermite_scaled_1d(l, r, m, col);
    for (int j = 0; j < n; ++j) out[(i * n + j) * stride] = col[j];
  }
}

void scale_corner(std::span<const double> raw, int m, double hx, double hy, double* g) {
  double px = 1.0;
  for (int a = 0; a <= m; ++a, px *= hx) {
    double py = 1.0;
    for (int b = 0; b <= m; ++b, py *= hy) g[a * (m + 1) + b] = raw[a * (m + 1) + b] * px * py;
  }
}

}  // namespace

SpaceTimePoly hermite_interpolate_2d(const std::array<std::span<const double>, 4>& corners,
                                     const Rect& cell, int m) {
  const std::size_t need = static_cast<std::size_t>(m + 1) * (m + 1);
  for (const auto& c : corners) {
    if (c.size() < need) throw InvalidArgument("hermite_interpolate_2d: corner DOFs too short");
  }
  const double hx = cell.width(), hy = cell.height();
  const int P = 2 * m + 1;
  const int degrees[3] = {P, P, 0};
  const double center[3] = {0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1), 0.0};
  const double scales[3] = {hx, hy, 1.0};
  SpaceTimePoly p(2, degrees, center, scales);
  std::vector<double> g(4 * need);
  std::array<const double*, 4> gp{};
  for (int c = 0; c < 4; ++c) {
    scale_corner(corners[c], m, hx, hy, g.data() + c * need);
    gp[c] = g.data() + c * need;
  }
  hermite_scaled_2d(gp, m, p.coeffs().data(), 1);
  return p;
}

namespace {

inline std::size_t ix2(int i, int j, int s, int n, int q1) {
  return (static_cast<std::size_t>(i) * n + j) * q1 + s;
}

// out[i][j] = sum_{a<=i, b<=j} c[a][b] * d[i-a][j-b] on an n x n grid.
void truncated_product_2d(const double* c, const double* d, int n, double* out) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a <= i; ++a) {
        const double* cr = c + a * n;
        const double* dr = d + (i - a) * n + j;
        for (int b = 0; b <= j; ++b) s += cr[b] * dr[-b];
      }
      out[i * n + j] = s;
    }
  }
}

void recursion_1d(const RecursionData& d, std::span<double> coeffs) {
  const int P = d.space_degree, n = P + 1, q1 = d.q + 1;
  const std::size_t fb = static_cast<std::size_t>(n) * q1;
  double* H = coeffs.data();
  double* E = coeffs.data() + fb;
  const bool has_src = !d.source.empty();
  const std::size_t sb = static_cast<std::size_t>(n) * d.q;
  const bool constant = d.u.size() == 1 && d.e.size() == 1;
  std::vector<double> dE(n), dH(n);
  for (int s = 1; s <= d.q; ++s) {
    const double fac = d.dt / s;
    for (int i = 0; i < n; ++i) {
      dE[i] = i < P ? (i + 1) / d.hx * E[(i + 1) * q1 + s - 1] : 0.0;
      dH[i] = i < P ? (i + 1) / d.hx * H[(i + 1) * q1 + s - 1] : 0.0;
    }
    for (int i = 0; i < n; ++i) {
      double uE, eH;
      if (constant) {
        uE = d.u[0] * dE[i];
        eH = d.e[0] * dH[i];
      } else {
        uE = 0.0;
        eH = 0.0;
        for (int a = 0; a <= i; ++a) {
          uE += d.u[a] * dE[i - a];
          eH += d.e[a] * dH[i - a];
        }
      }
      double sh = 0.0, se = 0.0;
      if (has_src) {
        sh = d.source[i * d.q + s - 1];
        se = d.source[sb + i * d.q + s - 1];
      }
      H[i * q1 + s] = fac * (-uE + sh);
      E[i * q1 + s] = fac * (-eH + se);
    }
  }
}

void recursion_2d(const RecursionData& d, std::span<double> coeffs) {
  const int P = d.space_degree, n = P + 1, q1 = d.q + 1;
  const std::size_t nsp = static_cast<std::size_t>(n) * n;
  const std::size_t fb = nsp * q1;
  double* Hx = coeffs.data();
  double* Hy = coeffs.data() + fb;
  double* Ez = coeffs.data() + 2 * fb;
  const bool has_src = !d.source.empty();
  const std::size_t sb = nsp * d.q;
  const bool constant = d.u.size() == 1 && d.e.size() == 1;
  std::vector<double> dyEz(nsp), dxEz(nsp), curlH(nsp), p1(nsp), p2(nsp), p3(nsp);
  for (int s = 1; s <= d.q; ++s) {
    const double fac = d.dt / s;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const std::size_t k = i * n + j;
        dyEz[k] = j < P ? (j + 1) / d.hy * Ez[ix2(i, j + 1, s - 1, n, q1)] : 0.0;
        dxEz[k] = i < P ? (i + 1) / d.hx * Ez[ix2(i + 1, j, s - 1, n, q1)] : 0.0;
        const double dxHy = i < P ? (i + 1) / d.hx * Hy[ix2(i + 1, j, s - 1, n, q1)] : 0.0;
        const double dyHx = j < P ? (j + 1) / d.hy * Hx[ix2(i, j + 1, s - 1, n, q1)] : 0.0;
        curlH[k] = dxHy - dyHx;
      }
    }
    if (constant) {
      for (std::size_t k = 0; k < nsp; ++k) {
        p1[k] = d.u[0] * dyEz[k];
        p2[k] = d.u[0] * dxEz[k];
        p3[k] = d.e[0] * curlH[k];
      }
    } else {
      truncated_product_2d(d.u.data(), dyEz.data(), n, p1.data());
      truncated_product_2d(d.u.data(), dxEz.data(), n, p2.data());
      truncated_product_2d(d.e.data(), curlH.data(), n, p3.data());
    }
    for (std::size_t k = 0; k < nsp; ++k) {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      if (has_src) {
        s0 = d.source[k * d.q + s - 1];
        s1 = d.source[sb + k * d.q + s - 1];
        s2 = d.source[2 * sb + k * d.q + s - 1];
      }
      Hx[k * q1 + s] = fac * (-p1[k] + s0);
      Hy[k * q1 + s] = fac * (p2[k] + s1);
      Ez[k * q1 + s] = fac * (p3[k] + s2);
    }
  }
}

}  // namespace

void taylor_recursion(const RecursionData& d, std::span<double> coeffs) {
  if (d.q < 1) throw InvalidArgument("taylor_recursion: q must be at least 1");
  const std::size_t n = d.space_degree + 1;
  const std::size_t nsp = d.dim == 1 ? n : n * n;
  if (coeffs.size() != field_count(d.dim) * nsp * (d.q + 1)) {
    throw InvalidArgument("taylor_recursion: coefficient array has the wrong size");
  }
  if (!(d.u.size() == 1 && d.e.size() == 1) && (d.u.size() != nsp || d.e.size() != nsp)) {
    throw InvalidArgument("taylor_recursion: coefficient jets must have order 2m+1 per axis");
  }
  if (d.dim == 1) {
    recursion_1d(d, coeffs);
  } else {
    recursion_2d(d, coeffs);
  }
}

namespace {

std::vector<SpaceTimePoly> run_recursion(std::span<const SpaceTimePoly> space_polys,
                                         std::span<const double> u, std::span<const double> e,
                                         double dt, int q, double t_ref) {
  if (space_polys.empty()) throw InvalidArgument("taylor_recursion: no input polynomials");
  const int dim = space_polys[0].dim();
  if (static_cast<int>(space_polys.size()) != field_count(dim)) {
    throw InvalidArgument("taylor_recursion: expected one polynomial per field");
  }
  const int P = space_polys[0].degree(0);
  RecursionData d;
  d.dim = dim;
  d.space_degree = P;
  d.q = q;
  d.hx = space_polys[0].scale(0);
  d.hy = dim == 2 ? space_polys[0].scale(1) : 1.0;
  d.dt = dt;
  d.u = u;
  d.e = e;
  const std::size_t nsp = dim == 1 ? P + 1 : (P + 1) * (P + 1);
  std::vector<double> coeffs(field_count(dim) * nsp * (q + 1), 0.0);
  for (int f = 0; f < field_count(dim); ++f) {
    const SpaceTimePoly& sp = space_polys[f];
    if (sp.basis() != Basis::ScaledMonomial || sp.degree(0) != P ||
        (dim == 2 && sp.degree(1) != P)) {
      throw InvalidArgument("taylor_recursion: inconsistent input polynomials");
    }
    const int tdeg = sp.degree(dim);
    for (std::size_t k = 0; k < nsp; ++k) {
      coeffs[(f * nsp + k) * (q + 1)] = sp.coeffs()[k * (tdeg + 1)];
    }
  }
  taylor_recursion(d, coeffs);
  std::vector<SpaceTimePoly> out;
  for (int f = 0; f < field_count(dim); ++f) {
    std::array<int, 3> deg{P, dim == 2 ? P : q, q};
    std::array<double, 3> center{space_polys[f].center(0), dim == 2 ? space_polys[f].center(1) : t_ref,
                                 t_ref};
    std::array<double, 3> scales{d.hx, dim == 2 ? d.hy : dt, dt};
    SpaceTimePoly p(dim, std::span<const int>(deg.data(), dim + 1),
                    std::span<const double>(center.data(), dim + 1),
                    std::span<const double>(scales.data(), dim + 1));
    std::copy_n(coeffs.begin() + f * nsp * (q + 1), nsp * (q + 1), p.coeffs().begin());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<SpaceTimePoly> taylor_recursion_const(std::span<const SpaceTimePoly> space_polys,
                                                  double mu, double eps, double dt, int q,
                                                  double t_ref) {
  const double u = 1.0 / mu, e = 1.0 / eps;
  return run_recursion(space_polys, {&u, 1}, {&e, 1}, dt, q, t_ref);
}

std::vector<SpaceTimePoly> taylor_recursion_varcoef(std::span<const SpaceTimePoly> space_polys,
                                                    const Jet& u, const Jet& e, double dt, int q,
                                                    double t_ref) {
  if (space_polys.empty()) throw InvalidArgument("taylor_recursion_varcoef: no input polynomials");
  const int dim = space_polys[0].dim();
  const int P = space_polys[0].degree(0);
  for (const Jet* j : {&u, &e}) {
    if (j->variables() < dim) throw InvalidArgument("taylor_recursion_varcoef: jet has too few variables");
    for (int v = 0; v < dim; ++v) {
      if (j->orders()[v] < P) {
        throw InvalidArgument("taylor_recursion_varcoef: insufficient jet order (need " +
                              std::to_string(P) + " per axis)");
      }
    }
  }
  const double hx = space_polys[0].scale(0);
  const double hy = dim == 2 ? space_polys[0].scale(1) : 1.0;
  const int ny = dim == 2 ? P : 0;
  std::vector<double> us((P + 1) * (ny + 1)), es((P + 1) * (ny + 1));
  std::vector<int> alpha(u.variables(), 0);
  for (int a = 0; a <= P; ++a) {
    for (int b = 0; b <= ny; ++b) {
      alpha[0] = a;
      if (dim == 2) alpha[1] = b;
      const double s = std::pow(hx, a) * std::pow(hy, b);
      us[a * (ny + 1) + b] = u.coeff(alpha) * s;
      es[a * (ny + 1) + b] = e.coeff(alpha) * s;
    }
  }
  return run_recursion(space_polys, us, es, dt, q, t_ref);
}

std::vector<double> evolve_node(std::span<const SpaceTimePoly> polys, std::span<const double> target,
                                double t, int m) {
  if (polys.empty()) return {};
  const int dim = polys[0].dim();
  const std::size_t pf = dofs_per_field(dim, m);
  std::vector<double> out(polys.size() * pf, 0.0);
  auto falling = [](int i, int a) {
    double r = 1.0;
    for (int k = 0; k < a; ++k) r *= i - k;
    return r;
  };
  for (std::size_t f = 0; f < polys.size(); ++f) {
    const SpaceTimePoly& p = polys[f];
    if (p.basis() != Basis::ScaledMonomial) throw InvalidArgument("evolve_node: monomial basis required");
    const double sx = (target[0] - p.center(0)) / p.scale(0);
    const double sy = dim == 2 ? (target[1] - p.center(1)) / p.scale(1) : 0.0;
    const double tau = (t - p.center(dim)) / p.scale(dim);
    const int nx = p.extent(0), ny = dim == 2 ? p.extent(1) : 1, nt = p.extent(dim);
    std::vector<double> tsum(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        double v = 0.0;
        for (int s = nt - 1; s >= 0; --s) v = v * tau + p.coeffs()[(i * ny + j) * nt + s];
        tsum[i * ny + j] = v;
      }
    }
    const int my = dim == 2 ? m : 0;
    for (int ax = 0; ax <= m; ++ax) {
      for (int ay = 0; ay <= my; ++ay) {
        double v = 0.0;
        for (int i = ax; i < nx; ++i) {
          for (int j = ay; j < ny; ++j) {
            v += tsum[i * ny + j] * falling(i, ax) * std::pow(sx, i - ax) * falling(j, ay) *
                 std::pow(sy, j - ay);
          }
        }
        v /= std::pow(p.scale(0), ax) * (dim == 2 ? std::pow(p.scale(1), ay) : 1.0);
        out[f * pf + ax * (my + 1) + ay] = v;
      }
    }
  }
  return out;
}

HermiteStepper::HermiteStepper(const StaggeredMesh& mesh, const Material& material,
                               const SeparableField* source, int m, int q)
    : mesh_(mesh), material_(material), source_(source), m_(m), q_(q) {
  if (m < 0 || m > 7) throw InvalidArgument("HermiteStepper: m must be in [0, 7]");
  if (q < 1) throw InvalidArgument("HermiteStepper: q must be at least 1");
  if (source_ != nullptr && source_->empty()) source_ = nullptr;
  if (source_ != nullptr && source_->components() != field_count(mesh.dim())) {
    throw InvalidArgument("HermiteStepper: source must have one component per field");
  }
  cell_locs_.resize(mesh.cell_count());
  for (std::size_t id : mesh.active_cells()) {
    const auto [i, j] = mesh.cell_ij(id);
    cell_locs_[id].x = mesh.cell_x(i);
    cell_locs_[id].y = mesh.cell_y(j);
    init_location(cell_locs_[id]);
  }
  node_locs_.resize(mesh.node_count());
  for (std::size_t id : mesh.interior_nodes()) {
    const auto [i, j] = mesh.node_ij(id);
    node_locs_[id].x = mesh.node_x(i);
    node_locs_[id].y = mesh.dim() == 1 ? 0.0 : mesh.node_y(j);
    init_location(node_locs_[id]);
  }
}

void HermiteStepper::init_location(Location& loc) const {
  const int dim = mesh_.dim();
  const int P = 2 * m_ + 1;
  const std::size_t nsp = dim == 1 ? P + 1 : static_cast<std::size_t>(P + 1) * (P + 1);
  const double hy = dim == 1 ? 1.0 : mesh_.dy();
  if (material_.is_constant()) {
    loc.u = {1.0 / material_.mu(loc.x, loc.y)};
    loc.e = {1.0 / material_.eps(loc.x, loc.y)};
  } else {
    loc.u.resize(nsp);
    loc.e.resize(nsp);
    material_.scaled_inverse_coefficients(dim, P, loc.x, loc.y, mesh_.dx(), hy, loc.u, loc.e);
  }
  if (source_ == nullptr) return;
  auto [jx, jy] = coordinate_jets(dim, P, loc.x, loc.y);
  const int ny = dim == 1 ? 0 : P;
  for (int f = 0; f < source_->components(); ++f) {
    for (const SeparableTerm& term : source_->terms(f)) {
      const Jet j = term.space.jet(jx, jy);
      for (int a = 0; a <= P; ++a) {
        for (int b = 0; b <= ny; ++b) {
          const int alpha[2] = {a, b};
          loc.source_space.push_back(j.coeff(alpha) * std::pow(mesh_.dx(), a) * std::pow(hy, b));
        }
      }
    }
  }
}

void HermiteStepper::set_store_masks(std::vector<char> cells, std::vector<char> nodes) {
  store_cells_ = std::move(cells);
  store_nodes_ = std::move(nodes);
}

GridState HermiteStepper::half_step(const GridState& in, double dt) const {
  const int dim = mesh_.dim();
  if (in.dim() != dim || in.m() != m_) throw InvalidArgument("half_step: state does not match the stepper");
  const bool to_dual = in.stagger() == Stagger::Primal;
  const std::size_t expect = to_dual ? mesh_.node_count() : mesh_.cell_count();
  if (in.count() != expect) throw InvalidArgument("half_step: state size does not match the mesh");

  const int m = m_, P = 2 * m + 1, n = P + 1, q1 = q_ + 1;
  const int nf = field_count(dim);
  const std::size_t nsp = dim == 1 ? n : static_cast<std::size_t>(n) * n;
  const std::size_t pf = dofs_per_field(dim, m);
  const double t_ref = in.time();
  const double hx = mesh_.dx(), hy = dim == 1 ? 1.0 : mesh_.dy();

  GridState out(dim, m, to_dual ? Stagger::Dual : Stagger::Primal,
                to_dual ? mesh_.cell_count() : mesh_.node_count(), t_ref + 0.5 * dt);
  const std::vector<char>& mask = to_dual ? store_cells_ : store_nodes_;
  if (!mask.empty()) out.polys().resize(out.count());

  // Time Taylor coefficients of every source term, scaled by dt^s.
  std::vector<std::vector<double>> src_time;
  if (source_ != nullptr) {
    const Jet tj = Jet::variable({q_ - 1}, {t_ref}, 0);
    for (int f = 0; f < nf; ++f) {
      for (const SeparableTerm& term : source_->terms(f)) {
        const Jet j = term.time.jet(tj);
        std::vector<double> c(q_);
        double pw = 1.0;
        for (int s = 0; s < q_; ++s, pw *= dt) c[s] = j.coeffs()[s] * pw;
        src_time.push_back(std::move(c));
      }
    }
  }

  std::vector<double> coeffs(nf * nsp * q1);
  std::vector<double> src(source_ != nullptr ? nf * nsp * q_ : 0);
  std::vector<double> g(4 * pf);
  std::vector<double> l1(m + 1), r1(m + 1), col(n);
  std::vector<double> half_pow(q1);
  for (int s = 0; s < q1; ++s) half_pow[s] = std::pow(0.5, s);
  std::vector<double> fact(m + 1, 1.0);
  for (int a = 1; a <= m; ++a) fact[a] = fact[a - 1] * a;

  auto process = [&](std::size_t out_id, const std::array<std::size_t, 4>& corner_ids,
                     const Location& loc) {
    std::fill(coeffs.begin(), coeffs.end(), 0.0);
    for (int f = 0; f < nf; ++f) {
      double* cf = coeffs.data() + f * nsp * q1;
      if (dim == 1) {
        const auto a = in.field(corner_ids[0], f);
        const auto b = in.field(corner_ids[1], f);
        double pw = 1.0;
        for (int k = 0; k <= m; ++k, pw *= hx) {
          l1[k] = a[k] * pw;
          r1[k] = b[k] * pw;
        }
        hermite_scaled_1d(l1.data(), r1.data(), m, col.data());
        for (int i = 0; i < n; ++i) cf[i * q1] = col[i];
      } else {
        std::array<const double*, 4> gp{};
        for (int c = 0; c < 4; ++c) {
          scale_corner(in.field(corner_ids[c], f), m, hx, hy, g.data() + c * pf);
          gp[c] = g.data() + c * pf;
        }
        hermite_scaled_2d(gp, m, cf, q1);
      }
    }
    RecursionData d;
    d.dim = dim;
    d.space_degree = P;
    d.q = q_;
    d.hx = hx;
    d.hy = hy;
    d.dt = dt;
    d.u = loc.u;
    d.e = loc.e;
    if (source_ != nullptr) {
      std::fill(src.begin(), src.end(), 0.0);
      std::size_t term = 0, offset = 0;
      for (int f = 0; f < nf; ++f) {
        for (std::size_t t = 0; t < source_->terms(f).size(); ++t, ++term) {
          const double* xs = loc.source_space.data() + offset;
          const std::vector<double>& ts = src_time[term];
          double* sf = src.data() + f * nsp * q_;
          for (std::size_t k = 0; k < nsp; ++k) {
            if (xs[k] == 0.0) continue;
            for (int s = 0; s < q_; ++s) sf[k * q_ + s] += xs[k] * ts[s];
          }
          offset += nsp;
        }
      }
      d.source = src;
    }
    taylor_recursion(d, coeffs);

    // Evaluate at the cell center, tau = 1/2.
    for (int f = 0; f < nf; ++f) {
      const double* cf = coeffs.data() + f * nsp * q1;
      auto dst = out.field(out_id, f);
      const int my = dim == 1 ? 0 : m;
      for (int ax = 0; ax <= m; ++ax) {
        for (int ay = 0; ay <= my; ++ay) {
          const std::size_t k = dim == 1 ? ax : static_cast<std::size_t>(ax) * n + ay;
          double v = 0.0;
          for (int s = 0; s < q1; ++s) v += cf[k * q1 + s] * half_pow[s];
          const double scale = fact[ax] * fact[ay] /
                               (std::pow(hx, ax) * (dim == 1 ? 1.0 : std::pow(hy, ay)));
          dst[ax * (my + 1) + ay] = v * scale;
        }
      }
    }
    if (!mask.empty() && mask[out_id]) {
      std::vector<SpaceTimePoly> polys;
      polys.reserve(nf);
      for (int f = 0; f < nf; ++f) {
        std::array<int, 3> deg{P, dim == 2 ? P : q_, q_};
        std::array<double, 3> center{loc.x, dim == 2 ? loc.y : t_ref, t_ref};
        std::array<double, 3> scales{hx, dim == 2 ? hy : dt, dt};
        SpaceTimePoly p(dim, std::span<const int>(deg.data(), dim + 1),
                        std::span<const double>(center.data(), dim + 1),
                        std::span<const double>(scales.data(), dim + 1));
        std::copy_n(coeffs.begin() + f * nsp * q1, nsp * q1, p.coeffs().begin());
        polys.push_back(std::move(p));
      }
      out.polys()[out_id] = std::move(polys);
    }
  };

  if (to_dual) {
    for (std::size_t id : mesh_.active_cells()) {
      const auto [i, j] = mesh_.cell_ij(id);
      std::array<std::size_t, 4> c{};
      if (dim == 1) {
        c = {mesh_.node_id(i, 0), mesh_.node_id(i + 1, 0), 0, 0};
      } else {
        c = {mesh_.node_id(i, j), mesh_.node_id(i + 1, j), mesh_.node_id(i, j + 1),
             mesh_.node_id(i + 1, j + 1)};
      }
      process(id, c, cell_locs_[id]);
    }
  } else {
    for (std::size_t id : mesh_.interior_nodes()) {
      const auto [i, j] = mesh_.node_ij(id);
      std::array<std::size_t, 4> c{};
      if (dim == 1) {
        c = {mesh_.cell_id(i - 1, 0), mesh_.cell_id(i, 0), 0, 0};
      } else {
        c = {mesh_.cell_id(i - 1, j - 1), mesh_.cell_id(i, j - 1), mesh_.cell_id(i - 1, j),
             mesh_.cell_id(i, j)};
      }
      process(id, c, node_locs_[id]);
    }
  }
  return out;
}

}  // namespace hcfm
