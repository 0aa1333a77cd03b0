#include "hermite_cfm/cfm.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "hermite_cfm/error.hpp"

namespace hcfm {

const char* to_string(BcKind k) {
  switch (k) {
    case BcKind::PEC: return "pec";
    case BcKind::PMC: return "pmc";
    case BcKind::Impedance: return "impedance";
  }
  return "?";
}

BcKind parse_bc_kind(const std::string& name) {
  if (name == "pec") return BcKind::PEC;
  if (name == "pmc") return BcKind::PMC;
  if (name == "impedance") return BcKind::Impedance;
  throw InvalidArgument("unknown boundary condition '" + name + "' (allowed: pec, pmc, impedance)");
}

const char* to_string(PatchKind k) {
  switch (k) {
    case PatchKind::End: return "end";
    case PatchKind::Edge: return "edge";
    case PatchKind::Corner: return "corner";
    case PatchKind::Reentrant: return "reentrant";
  }
  return "?";
}

int boundary_operator(BcKind kind, int dim, double nx, double ny, double z,
                      std::array<std::array<double, 3>, 2>& rows) {
  for (auto& r : rows) r.fill(0.0);
  if (dim == 1) {
    switch (kind) {
      case BcKind::PEC: rows[0] = {0.0, 1.0, 0.0}; return 1;
      case BcKind::PMC: rows[0] = {1.0, 0.0, 0.0}; return 1;
      case BcKind::Impedance: rows[0] = {z, -nx, 0.0}; return 1;
    }
  }
  switch (kind) {
    case BcKind::PEC: rows[0] = {0.0, 0.0, 1.0}; return 1;
    case BcKind::PMC: rows[0] = {-ny, nx, 0.0}; return 1;
    case BcKind::Impedance:
      rows[0] = {z * ny * ny, -z * ny * nx, -ny};
      rows[1] = {-z * nx * ny, z * nx * nx, nx};
      return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Classification and geometry

std::vector<PatchDescriptor> classify_cf_nodes(const StaggeredMesh& mesh) {
  std::vector<PatchDescriptor> out;
  for (std::size_t id : mesh.boundary_nodes()) {
    const auto [i, j] = mesh.node_ij(id);
    PatchDescriptor d;
    d.node_id = id;
    if (mesh.dim() == 1) {
      d.kind = PatchKind::End;
      d.frame = {mesh.cell_active(i, 0) ? 1 : -1, 0, 0, 0};
      out.push_back(d);
      continue;
    }
    const bool ll = mesh.cell_active(i - 1, j - 1), lr = mesh.cell_active(i, j - 1);
    const bool ul = mesh.cell_active(i - 1, j), ur = mesh.cell_active(i, j);
    switch (mesh.node_kind(id)) {
      case NodeKind::Edge:
        d.kind = PatchKind::Edge;
        if (ul && ur) {
          d.frame = {1, 0, 0, 1};
        } else if (ll && lr) {
          d.frame = {1, 0, 0, -1};
        } else if (lr && ur) {
          d.frame = {0, 1, 1, 0};
        } else {
          d.frame = {0, -1, 1, 0};
        }
        break;
      case NodeKind::Corner: {
        d.kind = PatchKind::Corner;
        const int sx = (ur || lr) ? 1 : -1;
        const int sy = (ur || ul) ? 1 : -1;
        d.frame = {sx, 0, 0, sy};
        break;
      }
      case NodeKind::Reentrant: {
        d.kind = PatchKind::Reentrant;
        const int sx = (!ur || !lr) ? 1 : -1;
        const int sy = (!ur || !ul) ? 1 : -1;
        d.frame = {-sx, 0, 0, -sy};
        break;
      }
      default:
        throw InvalidArgument("classify_cf_nodes: unexpected node kind");
    }
    out.push_back(d);
  }
  if (out.empty()) throw InvalidArgument("classify_cf_nodes: mesh has no boundary nodes");
  return out;
}

namespace {

struct Canonical {
  std::vector<std::array<double, 4>> regions;  // x0, x1, y0, y1
  std::vector<std::array<double, 6>> segments;  // xa, ya, xb, yb, nx, ny
  std::vector<std::array<int, 2>> dual_cells;    // lower-left corner offsets
  std::vector<std::array<int, 2>> primal_nodes;
};

Canonical canonical_patch(PatchKind kind) {
  Canonical c;
  switch (kind) {
    case PatchKind::End:
      c.regions = {{0.0, 1.5, 0.0, 0.0}};
      c.segments = {{0.0, 0.0, 0.0, 0.0, -1.0, 0.0}};
      c.dual_cells = {{0, 0}};
      c.primal_nodes = {{1, 0}};
      break;
    case PatchKind::Edge:
      c.regions = {{-1.0, 1.0, 0.0, 1.5}};
      c.segments = {{-1.0, 0.0, 1.0, 0.0, 0.0, -1.0}};
      c.dual_cells = {{-1, 0}, {0, 0}};
      c.primal_nodes = {{0, 1}};
      break;
    case PatchKind::Corner:
      c.regions = {{0.0, 1.5, 0.0, 1.5}};
      c.segments = {{0.0, 0.0, 0.0, 1.5, -1.0, 0.0}, {0.0, 0.0, 1.5, 0.0, 0.0, -1.0}};
      c.dual_cells = {{0, 0}};
      c.primal_nodes = {{1, 1}};
      break;
    case PatchKind::Reentrant:
      c.regions = {{-1.0, 1.5, 0.0, 1.5}, {0.0, 1.5, -1.0, 0.0}};
      c.segments = {{0.0, -1.0, 0.0, 0.0, -1.0, 0.0}, {-1.0, 0.0, 0.0, 0.0, 0.0, -1.0}};
      c.dual_cells = {{-1, 0}, {0, 0}, {0, -1}};
      c.primal_nodes = {{0, 1}, {1, 1}, {1, 0}};
      break;
  }
  return c;
}

std::array<double, 2> apply_frame(const std::array<int, 4>& f, int dim, double cx, double cy) {
  if (dim == 1) return {f[0] * cx, 0.0};
  return {f[0] * cx + f[1] * cy, f[2] * cx + f[3] * cy};
}

}  // namespace

PatchGeometry patch_geometry(const PatchDescriptor& d, const StaggeredMesh& mesh, double beta) {
  const int dim = mesh.dim();
  const Canonical c = canonical_patch(d.kind);
  const auto [ni, nj] = mesh.node_ij(d.node_id);
  const double dx = mesh.dx(), dy = dim == 1 ? 0.0 : mesh.dy();
  PatchGeometry g;
  g.dim = dim;
  g.node_x = mesh.node_x(ni);
  g.node_y = dim == 1 ? 0.0 : mesh.node_y(nj);
  g.ell = dim == 1 ? 1.5 * dx : beta * mesh.h();

  auto map_rect = [&](double x0, double x1, double y0, double y1) {
    const auto a = apply_frame(d.frame, dim, x0, y0);
    const auto b = apply_frame(d.frame, dim, x1, y1);
    Rect r;
    r.x0 = g.node_x + std::min(a[0], b[0]) * dx;
    r.x1 = g.node_x + std::max(a[0], b[0]) * dx;
    r.y0 = g.node_y + std::min(a[1], b[1]) * dy;
    r.y1 = g.node_y + std::max(a[1], b[1]) * dy;
    return r;
  };

  for (const auto& r : c.regions) g.regions.push_back(map_rect(r[0], r[1], r[2], r[3]));
  g.box = g.regions.front();
  for (const Rect& r : g.regions) {
    g.box.x0 = std::min(g.box.x0, r.x0);
    g.box.x1 = std::max(g.box.x1, r.x1);
    g.box.y0 = std::min(g.box.y0, r.y0);
    g.box.y1 = std::max(g.box.y1, r.y1);
  }
  for (const auto& s : c.segments) {
    const auto a = apply_frame(d.frame, dim, s[0], s[1]);
    const auto b = apply_frame(d.frame, dim, s[2], s[3]);
    const auto n = apply_frame(d.frame, dim, s[4], s[5]);
    g.boundary.push_back({g.node_x + a[0] * dx, g.node_y + a[1] * dy, g.node_x + b[0] * dx,
                          g.node_y + b[1] * dy, n[0], n[1]});
  }
  for (const auto& cell : c.dual_cells) {
    const auto a = apply_frame(d.frame, dim, cell[0], cell[1]);
    const auto b = apply_frame(d.frame, dim, cell[0] + 1, cell[1] + (dim == 1 ? 0 : 1));
    const int ci = ni + static_cast<int>(std::lround(std::min(a[0], b[0])));
    const int cj = dim == 1 ? 0 : nj + static_cast<int>(std::lround(std::min(a[1], b[1])));
    if (!mesh.cell_active(ci, cj)) {
      throw InvalidArgument("patch_geometry: " + std::string(to_string(d.kind)) +
                            " patch needs an inactive cell; domain too small for this mesh");
    }
    Rect r{mesh.node_x(ci), mesh.node_x(ci + 1), dim == 1 ? 0.0 : mesh.node_y(cj),
           dim == 1 ? 0.0 : mesh.node_y(cj + 1)};
    g.dual_pieces.push_back({r, mesh.cell_id(ci, cj)});
  }
  for (const auto& node : c.primal_nodes) {
    const auto a = apply_frame(d.frame, dim, node[0], node[1]);
    const int pi = ni + static_cast<int>(std::lround(a[0]));
    const int pj = dim == 1 ? 0 : nj + static_cast<int>(std::lround(a[1]));
    if (pi < 0 || pi > mesh.nx() || pj < 0 || pj > mesh.ny() ||
        mesh.node_kind(pi, pj) != NodeKind::Interior) {
      throw InvalidArgument("patch_geometry: " + std::string(to_string(d.kind)) +
                            " patch needs a non-interior node; domain too small for this mesh");
    }
    const double x = mesh.node_x(pi), y = dim == 1 ? 0.0 : mesh.node_y(pj);
    Rect r{x - 0.5 * dx, x + 0.5 * dx, dim == 1 ? 0.0 : y - 0.5 * dy, dim == 1 ? 0.0 : y + 0.5 * dy};
    g.primal_pieces.push_back({r, mesh.node_id(pi, pj)});
  }
  return g;
}

// ---------------------------------------------------------------------------
// Quadrature tables

namespace {

struct SpacePoints {
  std::vector<double> x, y, w;
  std::size_t size() const { return w.size(); }
};

SpacePoints region_points(const Rect& r, int dim, const Quadrature& g) {
  SpacePoints p;
  const double hx = 0.5 * r.width(), cx = 0.5 * (r.x0 + r.x1);
  if (dim == 1) {
    for (int a = 0; a < g.size(); ++a) {
      p.x.push_back(cx + hx * g.points[a]);
      p.y.push_back(0.0);
      p.w.push_back(hx * g.weights[a]);
    }
    return p;
  }
  const double hy = 0.5 * r.height(), cy = 0.5 * (r.y0 + r.y1);
  for (int a = 0; a < g.size(); ++a) {
    for (int b = 0; b < g.size(); ++b) {
      p.x.push_back(cx + hx * g.points[a]);
      p.y.push_back(cy + hy * g.points[b]);
      p.w.push_back(hx * hy * g.weights[a] * g.weights[b]);
    }
  }
  return p;
}

SpacePoints segment_points(const BoundarySegment& s, int dim, const Quadrature& g) {
  SpacePoints p;
  if (dim == 1) {
    p.x.push_back(s.xa);
    p.y.push_back(0.0);
    p.w.push_back(1.0);
    return p;
  }
  const double len = std::hypot(s.xb - s.xa, s.yb - s.ya);
  for (int a = 0; a < g.size(); ++a) {
    const double u = 0.5 * (1.0 + g.points[a]);
    p.x.push_back(s.xa + u * (s.xb - s.xa));
    p.y.push_back(s.ya + u * (s.yb - s.ya));
    p.w.push_back(0.5 * len * g.weights[a]);
  }
  return p;
}

// Legendre space basis (value and first derivatives) at points, [point][basis].
struct SpaceTables {
  std::size_t np = 0, ns = 0;
  std::vector<double> v0, vx, vy;
};

SpaceTables space_tables(const SpacePoints& pts, const Rect& box, int dim, int k) {
  SpaceTables t;
  t.np = pts.size();
  const int n1 = k + 1;
  t.ns = dim == 1 ? n1 : static_cast<std::size_t>(n1) * n1;
  t.v0.resize(t.np * t.ns);
  t.vx.resize(t.np * t.ns);
  t.vy.resize(t.np * t.ns, 0.0);
  const double cx = 0.5 * (box.x0 + box.x1), sx = 2.0 / box.width();
  const double cy = 0.5 * (box.y0 + box.y1), sy = dim == 1 ? 0.0 : 2.0 / box.height();
  std::vector<double> px(n1), dpx(n1), py(n1, 1.0), dpy(n1, 0.0);
  for (std::size_t q = 0; q < t.np; ++q) {
    const double xi = (pts.x[q] - cx) * sx;
    legendre_values(k, xi, px);
    legendre_derivatives(k, 1, xi, dpx);
    if (dim == 2) {
      const double eta = (pts.y[q] - cy) * sy;
      legendre_values(k, eta, py);
      legendre_derivatives(k, 1, eta, dpy);
    }
    for (int a = 0; a < n1; ++a) {
      for (int b = 0; b < (dim == 1 ? 1 : n1); ++b) {
        const std::size_t s = dim == 1 ? a : static_cast<std::size_t>(a) * n1 + b;
        t.v0[q * t.ns + s] = px[a] * py[b];
        t.vx[q * t.ns + s] = sx * dpx[a] * py[b];
        if (dim == 2) t.vy[q * t.ns + s] = px[a] * sy * dpy[b];
      }
    }
  }
  return t;
}

// Legendre time basis on the sub-window [za, zb] of [-1, 1]; weights carry
// the physical measure.
struct TimeTables {
  std::size_t np = 0, nt = 0;
  std::vector<double> z, w, t0, tt;
};

TimeTables time_tables(double za, double zb, const Quadrature& g, int k, double dt) {
  TimeTables t;
  t.np = g.size();
  t.nt = k + 1;
  t.t0.resize(t.np * t.nt);
  t.tt.resize(t.np * t.nt);
  std::vector<double> p(k + 1), dp(k + 1);
  for (std::size_t q = 0; q < t.np; ++q) {
    const double z = 0.5 * (za + zb) + 0.5 * (zb - za) * g.points[q];
    t.z.push_back(z);
    t.w.push_back(0.5 * (zb - za) * g.weights[q] * 0.5 * dt);
    legendre_values(k, z, p);
    legendre_derivatives(k, 1, z, dp);
    for (int a = 0; a <= k; ++a) {
      t.t0[q * t.nt + a] = p[a];
      t.tt[q * t.nt + a] = 2.0 / dt * dp[a];
    }
  }
  return t;
}

// sum_q w A[q][a] B[q][b]
std::vector<long double> gram(const std::vector<double>& A, const std::vector<double>& B,
                              std::span<const double> w, std::size_t np, std::size_t n) {
  std::vector<long double> G(n * n, 0.0L);
  for (std::size_t q = 0; q < np; ++q) {
    if (w[q] == 0.0) continue;
    const double* a = A.data() + q * n;
    const double* b = B.data() + q * n;
    for (std::size_t i = 0; i < n; ++i) {
      const long double wa = static_cast<long double>(w[q]) * a[i];
      if (wa == 0.0L) continue;
      long double* gi = G.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) gi[j] += wa * b[j];
    }
  }
  return G;
}

// M[(fa, s, t), (fb, s', t')] += scale * S[s][s'] * T[t][t'].
void add_kron(ExtendedMatrix& M, int fa, int fb, std::size_t ns, std::size_t nt,
              const std::vector<long double>& S, const std::vector<long double>& T, double scale) {
  const std::size_t fbk = ns * nt;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t s2 = 0; s2 < ns; ++s2) {
      const long double sv = scale * S[s * ns + s2];
      if (sv == 0.0L) continue;
      for (std::size_t t = 0; t < nt; ++t) {
        long double* row = M.data.data() + (fa * fbk + s * nt + t) * M.cols + fb * fbk + s2 * nt;
        const long double* tr = T.data() + t * nt;
        for (std::size_t t2 = 0; t2 < nt; ++t2) row[t2] += sv * tr[t2];
      }
    }
  }
}

enum class Coef { One, Mu, Eps, MuX, MuY };
enum Deriv { kNone = 0, kDx = 1, kDy = 2, kDt = 3 };

struct Term {
  int field;
  int deriv;
  Coef coef;
  double sign;
};

struct Residual {
  std::vector<Term> terms;
  int source_field;  // -1: no source
  Coef source_coef;
};

std::vector<Residual> residuals(int dim) {
  if (dim == 1) {
    return {{{{0, kDt, Coef::Mu, 1.0}, {1, kDx, Coef::One, 1.0}}, 0, Coef::Mu},
            {{{1, kDt, Coef::Eps, 1.0}, {0, kDx, Coef::One, 1.0}}, 1, Coef::Eps}};
  }
  return {
      {{{0, kDt, Coef::Mu, 1.0}, {2, kDy, Coef::One, 1.0}}, 0, Coef::Mu},
      {{{1, kDt, Coef::Mu, 1.0}, {2, kDx, Coef::One, -1.0}}, 1, Coef::Mu},
      {{{2, kDt, Coef::Eps, 1.0}, {1, kDx, Coef::One, -1.0}, {0, kDy, Coef::One, 1.0}}, 2, Coef::Eps},
      {{{0, kDx, Coef::Mu, 1.0}, {0, kNone, Coef::MuX, 1.0}, {1, kDy, Coef::Mu, 1.0},
        {1, kNone, Coef::MuY, 1.0}},
       -1,
       Coef::One},
  };
}

struct CoefValues {
  std::vector<double> mu, eps, mux, muy;
  const std::vector<double>& get(Coef c) const {
    switch (c) {
      case Coef::Mu: return mu;
      case Coef::Eps: return eps;
      case Coef::MuX: return mux;
      case Coef::MuY: return muy;
      default: break;
    }
    return mu;  // unused for Coef::One
  }
};

CoefValues coef_values(const SpacePoints& p, const Material& mat) {
  CoefValues c;
  for (std::size_t q = 0; q < p.size(); ++q) {
    c.mu.push_back(mat.mu(p.x[q], p.y[q]));
    c.eps.push_back(mat.eps(p.x[q], p.y[q]));
    const auto g = mat.grad_mu(p.x[q], p.y[q]);
    c.mux.push_back(g[0]);
    c.muy.push_back(g[1]);
  }
  return c;
}

double coef_at(const CoefValues& c, Coef kind, std::size_t q) {
  return kind == Coef::One ? 1.0 : c.get(kind)[q];
}

const std::vector<double>& space_table(const SpaceTables& t, int deriv) {
  return deriv == kDx ? t.vx : (deriv == kDy ? t.vy : t.v0);
}

const std::vector<double>& time_table(const TimeTables& t, int deriv) {
  return deriv == kDt ? t.tt : t.t0;
}

std::size_t space_size(int dim, int k) {
  return dim == 1 ? static_cast<std::size_t>(k + 1) : static_cast<std::size_t>(k + 1) * (k + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix assembly

namespace {

ExtendedMatrix assemble_extended(const PatchGeometry& g, const Material& material, BcKind bc,
                                 const CfmParams& params, double dt) {
  const int dim = g.dim, k = params.k, nf = field_count(dim);
  if (k < 0) throw InvalidArgument("assemble_matrix: k must be nonnegative");
  if (!(dt > 0.0)) throw InvalidArgument("assemble_matrix: dt must be positive");
  const std::size_t ns = space_size(dim, k), nt = k + 1;
  const std::size_t n = nf * ns * nt;
  ExtendedMatrix M;
  M.rows = M.cols = n;
  M.data.assign(n * n, 0.0L);
  const Quadrature gq = gauss_rule(params.quadrature());
  const TimeTables full = time_tables(-1.0, 1.0, gq, k, dt);

  // PDE residual term.
  const auto res = residuals(dim);
  for (const Rect& region : g.regions) {
    const SpacePoints pts = region_points(region, dim, gq);
    const SpaceTables st = space_tables(pts, g.box, dim, k);
    const CoefValues cv = coef_values(pts, material);
    for (const Residual& r : res) {
      for (const Term& A : r.terms) {
        for (const Term& B : r.terms) {
          std::vector<double> w(pts.size());
          bool any = false;
          for (std::size_t q = 0; q < pts.size(); ++q) {
            w[q] = pts.w[q] * A.sign * B.sign * coef_at(cv, A.coef, q) * coef_at(cv, B.coef, q);
            any = any || w[q] != 0.0;
          }
          if (!any) continue;
          const auto S = gram(space_table(st, A.deriv), space_table(st, B.deriv), w, pts.size(), ns);
          const auto T = gram(time_table(full, A.deriv), time_table(full, B.deriv), full.w, full.np, nt);
          add_kron(M, A.field, B.field, ns, nt, S, T, g.ell);
        }
      }
    }
  }

  // Boundary residual term.
  const auto T00 = gram(full.t0, full.t0, full.w, full.np, nt);
  for (const BoundarySegment& seg : g.boundary) {
    const SpacePoints pts = segment_points(seg, dim, gq);
    const SpaceTables st = space_tables(pts, g.box, dim, k);
    std::vector<std::array<std::array<double, 3>, 2>> ops(pts.size());
    std::vector<int> nrows(pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      nrows[q] = boundary_operator(bc, dim, seg.nx, seg.ny, material.impedance(pts.x[q], pts.y[q]),
                                   ops[q]);
    }
    for (int fa = 0; fa < nf; ++fa) {
      for (int fb = 0; fb < nf; ++fb) {
        std::vector<double> w(pts.size(), 0.0);
        bool any = false;
        for (std::size_t q = 0; q < pts.size(); ++q) {
          for (int r = 0; r < nrows[q]; ++r) w[q] += ops[q][r][fa] * ops[q][r][fb];
          w[q] *= pts.w[q];
          any = any || w[q] != 0.0;
        }
        if (!any) continue;
        const auto S = gram(st.v0, st.v0, w, pts.size(), ns);
        add_kron(M, fa, fb, ns, nt, S, T00, 1.0);
      }
    }
  }

  // Hermite matching term.
  const Quadrature hq = gauss_rule(std::max(params.quadrature(), k + 1));
  auto add_pieces = [&](const std::vector<HermitePiece>& pieces, double za, double zb) {
    const TimeTables tw = time_tables(za, zb, hq, k, dt);
    const auto T = gram(tw.t0, tw.t0, tw.w, tw.np, nt);
    for (const HermitePiece& p : pieces) {
      const SpacePoints pts = region_points(p.rect, dim, hq);
      const SpaceTables st = space_tables(pts, g.box, dim, k);
      const auto S = gram(st.v0, st.v0, pts.w, pts.size(), ns);
      for (int f = 0; f < nf; ++f) add_kron(M, f, f, ns, nt, S, T, params.c_h);
    }
  };
  add_pieces(g.dual_pieces, -1.0, 0.0);
  add_pieces(g.primal_pieces, 0.0, 1.0);
  return M;
}

DenseMatrix rounded(const ExtendedMatrix& a) {
  DenseMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data()[i] = static_cast<double>(a.data[i]);
  return out;
}

}  // namespace

DenseMatrix assemble_matrix(const PatchGeometry& g, const Material& material, BcKind bc,
                            const CfmParams& params, double dt) {
  return rounded(assemble_extended(g, material, bc, params, dt));
}

// ---------------------------------------------------------------------------
// Patch construction

namespace {

// X[a][i] = c * int_{-1/2}^{1/2} P_a(xi(center + h s)) s^i h ds, xi relative to
// the box [lo, hi].
std::vector<double> projection_table(int k, int degree, double center, double h, double lo,
                                     double hi, double c) {
  const Quadrature g = gauss_rule((k + degree) / 2 + 1);
  std::vector<double> out(static_cast<std::size_t>(k + 1) * (degree + 1), 0.0);
  std::vector<double> p(k + 1);
  const double mid = 0.5 * (lo + hi), sc = 2.0 / (hi - lo);
  for (int q = 0; q < g.size(); ++q) {
    const double s = 0.5 * g.points[q];
    const double w = 0.5 * g.weights[q] * h * c;
    legendre_values(k, (center + h * s - mid) * sc, p);
    double pw = 1.0;
    for (int i = 0; i <= degree; ++i, pw *= s) {
      for (int a = 0; a <= k; ++a) out[a * (degree + 1) + i] += w * p[a] * pw;
    }
  }
  return out;
}

// T[a][s] = int_0^{1/2} P_a(2 tau + shift) tau^s dt dtau.
std::vector<double> time_projection_table(int k, int q, double shift, double dt) {
  const Quadrature g = gauss_rule((k + q) / 2 + 1);
  std::vector<double> out(static_cast<std::size_t>(k + 1) * (q + 1), 0.0);
  std::vector<double> p(k + 1);
  for (int i = 0; i < g.size(); ++i) {
    const double tau = 0.25 * (1.0 + g.points[i]);
    const double w = 0.25 * g.weights[i] * dt;
    legendre_values(k, 2.0 * tau + shift, p);
    double pw = 1.0;
    for (int s = 0; s <= q; ++s, pw *= tau) {
      for (int a = 0; a <= k; ++a) out[a * (q + 1) + s] += w * p[a] * pw;
    }
  }
  return out;
}

DenseMatrix extraction_matrix(const PatchGeometry& g, int k, int m) {
  const int dim = g.dim, nf = field_count(dim);
  const std::size_t ns = space_size(dim, k), nt = k + 1;
  const std::size_t pf = dofs_per_field(dim, m);
  DenseMatrix E(nf * pf, nf * ns * nt);
  const double sx = 2.0 / g.box.width();
  const double sy = dim == 1 ? 0.0 : 2.0 / g.box.height();
  const double xi = (g.node_x - 0.5 * (g.box.x0 + g.box.x1)) * sx;
  const double eta = dim == 1 ? 0.0 : (g.node_y - 0.5 * (g.box.y0 + g.box.y1)) * sy;
  std::vector<double> dx(k + 1), dy(k + 1, 1.0), pt(k + 1);
  legendre_values(k, 1.0, pt);
  const int my = dim == 1 ? 0 : m;
  for (int ax = 0; ax <= m; ++ax) {
    legendre_derivatives(k, ax, xi, dx);
    for (int ay = 0; ay <= my; ++ay) {
      if (dim == 2) legendre_derivatives(k, ay, eta, dy);
      const double fac = std::pow(sx, ax) * (dim == 2 ? std::pow(sy, ay) : 1.0);
      for (int a = 0; a <= k; ++a) {
        for (int b = 0; b <= (dim == 1 ? 0 : k); ++b) {
          const std::size_t s = dim == 1 ? a : static_cast<std::size_t>(a) * (k + 1) + b;
          const double v = fac * dx[a] * dy[b];
          for (std::size_t t = 0; t < nt; ++t) {
            for (int f = 0; f < nf; ++f) {
              E(f * pf + ax * (my + 1) + ay, (f * ns + s) * nt + t) = v * pt[t];
            }
          }
        }
      }
    }
  }
  return E;
}

std::shared_ptr<PatchOperator> make_operator(const PatchGeometry& g, const Material& material,
                                             BcKind bc, const CfmParams& params, int m, int q,
                                             double dt) {
  auto op = std::make_shared<PatchOperator>();
  op->dim = g.dim;
  op->k = params.k;
  op->m = m;
  op->q = q;
  op->dt = dt;
  const ExtendedMatrix mx = assemble_extended(g, material, bc, params, dt);
  op->matrix = rounded(mx);
  op->lu = lu_factor(op->matrix);
  op->extraction = extraction_matrix(g, params.k, m);
  op->gain = right_divide_extended(op->extraction, mx);
  const int P = 2 * m + 1, k = params.k;
  auto tables = [&](const HermitePiece& p, double shift, double c) {
    PatchOperator::Tables t;
    t.x = projection_table(k, P, 0.5 * (p.rect.x0 + p.rect.x1), p.rect.width(), g.box.x0,
                           g.box.x1, c);
    if (g.dim == 2) {
      t.y = projection_table(k, P, 0.5 * (p.rect.y0 + p.rect.y1), p.rect.height(), g.box.y0,
                             g.box.y1, 1.0);
    }
    t.t = time_projection_table(k, q, shift, dt);
    return t;
  };
  for (const HermitePiece& p : g.dual_pieces) op->dual_tables.push_back(tables(p, -1.0, params.c_h));
  for (const HermitePiece& p : g.primal_pieces) op->primal_tables.push_back(tables(p, 0.0, params.c_h));
  return op;
}

void add_load(std::vector<SeparableLoad>& loads, int field, std::vector<double> space,
              const TimeFunction& time, bool time_derivative) {
  bool any = false;
  for (double v : space) any = any || v != 0.0;
  if (!any) return;
  loads.push_back({field, std::move(space), time, time_derivative});
}

}  // namespace

std::shared_ptr<const PatchOperator> PatchCache::find(const PatchDescriptor& d) const {
  const std::array<int, 5> key{static_cast<int>(d.kind), d.frame[0], d.frame[1], d.frame[2], d.frame[3]};
  auto it = ops_.find(key);
  return it == ops_.end() ? nullptr : it->second;
}

void PatchCache::insert(const PatchDescriptor& d, std::shared_ptr<const PatchOperator> op) {
  const std::array<int, 5> key{static_cast<int>(d.kind), d.frame[0], d.frame[1], d.frame[2], d.frame[3]};
  ops_[key] = std::move(op);
}

CfmPatch build_patch(const PatchDescriptor& d, const StaggeredMesh& mesh, const Material& material,
                     const BoundarySpec& bc, const SeparableField* source, const CfmParams& params,
                     int m, int q, double dt, PatchCache* cache) {
  if (params.k < 2 * m) throw InvalidArgument("build_patch: k >= 2m required");
  if (!(params.c_h > 0.0 && params.c_h <= 1.0)) throw InvalidArgument("build_patch: c_H must be in (0, 1]");
  CfmPatch patch;
  patch.descriptor = d;
  patch.geometry = patch_geometry(d, mesh, params.beta);
  patch.c_h = params.c_h;
  const PatchGeometry& g = patch.geometry;

  std::shared_ptr<const PatchOperator> op;
  if (cache != nullptr && material.is_constant()) op = cache->find(d);
  if (!op) {
    op = make_operator(g, material, bc.kind, params, m, q, dt);
    if (cache != nullptr && material.is_constant()) cache->insert(d, op);
  }
  patch.op = op;

  const int dim = g.dim, k = params.k, nf = field_count(dim);
  const std::size_t ns = space_size(dim, k);
  const Quadrature gq = gauss_rule(params.quadrature());

  // Boundary data loads: g = B U_exact.
  if (bc.exact != nullptr && !bc.exact->empty()) {
    for (int fa = 0; fa < nf; ++fa) {
      for (int fb = 0; fb < nf; ++fb) {
        for (const SeparableTerm& term : bc.exact->terms(fb)) {
          std::vector<double> space(ns, 0.0);
          for (const BoundarySegment& seg : g.boundary) {
            const SpacePoints pts = segment_points(seg, dim, gq);
            const SpaceTables st = space_tables(pts, g.box, dim, k);
            for (std::size_t p = 0; p < pts.size(); ++p) {
              std::array<std::array<double, 3>, 2> ops{};
              const int nr = boundary_operator(bc.kind, dim, seg.nx, seg.ny,
                                               material.impedance(pts.x[p], pts.y[p]), ops);
              double c = 0.0;
              for (int r = 0; r < nr; ++r) c += ops[r][fa] * ops[r][fb];
              if (c == 0.0) continue;
              c *= pts.w[p] * term.space.value(pts.x[p], pts.y[p]);
              for (std::size_t s = 0; s < ns; ++s) space[s] += c * st.v0[p * ns + s];
            }
          }
          add_load(patch.loads, fa, std::move(space), term.time, false);
        }
      }
    }
  }

  // Source loads of the PDE residual term.
  if (source != nullptr && !source->empty()) {
    for (const Residual& r : residuals(dim)) {
      if (r.source_field < 0) continue;
      for (const Term& A : r.terms) {
        for (const SeparableTerm& term : source->terms(r.source_field)) {
          std::vector<double> space(ns, 0.0);
          for (const Rect& region : g.regions) {
            const SpacePoints pts = region_points(region, dim, gq);
            const SpaceTables st = space_tables(pts, g.box, dim, k);
            const CoefValues cv = coef_values(pts, material);
            const auto& V = space_table(st, A.deriv);
            for (std::size_t p = 0; p < pts.size(); ++p) {
              const double c = g.ell * pts.w[p] * A.sign * coef_at(cv, A.coef, p) *
                               coef_at(cv, r.source_coef, p) * term.space.value(pts.x[p], pts.y[p]);
              if (c == 0.0) continue;
              for (std::size_t s = 0; s < ns; ++s) space[s] += c * V[p * ns + s];
            }
          }
          add_load(patch.loads, A.field, std::move(space), term.time, A.deriv == kDt);
        }
      }
    }
  }
  return patch;
}

// ---------------------------------------------------------------------------
// Per-step work

std::vector<double> assemble_rhs(const CfmPatch& patch, const GridState& dual,
                                 const GridState& primal, double t_prev) {
  const PatchOperator& op = *patch.op;
  const PatchGeometry& g = patch.geometry;
  const int dim = op.dim, k = op.k, nf = field_count(dim);
  const int P = 2 * op.m + 1;
  const std::size_t ns = space_size(dim, k), nt = k + 1;
  const std::size_t fbk = ns * nt;
  std::vector<double> b(nf * fbk, 0.0);

  auto add_pieces = [&](const std::vector<HermitePiece>& pieces,
                        const std::vector<PatchOperator::Tables>& tables, const GridState& state,
                        const char* what) {
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::size_t id = pieces[i].id;
      if (!state.has_poly(id)) {
        throw InvalidArgument(std::string("assemble_rhs: missing stored ") + what +
                              " polynomial for id " + std::to_string(id));
      }
      const auto& polys = state.polys()[id];
      const auto& t = tables[i];
      for (int f = 0; f < nf; ++f) {
        const SpaceTimePoly& p = polys[f];
        if (p.degree(0) != P || p.degree(dim) != op.q) {
          throw InvalidArgument("assemble_rhs: stored polynomial degrees do not match the patch");
        }
        std::vector<double> out;
        if (dim == 1) {
          const int ext[2] = {P + 1, op.q + 1};
          const int rows[2] = {k + 1, k + 1};
          const std::span<const double> tabs[2] = {t.x, t.t};
          out = tensor_apply(p.coeffs(), ext, tabs, rows);
        } else {
          const int ext[3] = {P + 1, P + 1, op.q + 1};
          const int rows[3] = {k + 1, k + 1, k + 1};
          const std::span<const double> tabs[3] = {t.x, t.y, t.t};
          out = tensor_apply(p.coeffs(), ext, tabs, rows);
        }
        for (std::size_t j = 0; j < fbk; ++j) b[f * fbk + j] += out[j];
      }
    }
  };
  add_pieces(g.dual_pieces, op.dual_tables, dual, "dual-window");
  add_pieces(g.primal_pieces, op.primal_tables, primal, "primal-window");

  if (!patch.loads.empty()) {
    const Quadrature gq = gauss_rule(std::max(k + 3, 4));
    const TimeTables tt = time_tables(-1.0, 1.0, gq, k, op.dt);
    std::vector<double> tv(tt.np);
    std::vector<double> mom(nt);
    for (const SeparableLoad& load : patch.loads) {
      for (std::size_t q = 0; q < tt.np; ++q) {
        tv[q] = load.time.value(t_prev + 0.5 * (1.0 + tt.z[q]) * op.dt);
      }
      const auto& T = load.time_derivative ? tt.tt : tt.t0;
      std::fill(mom.begin(), mom.end(), 0.0);
      for (std::size_t q = 0; q < tt.np; ++q) {
        for (std::size_t a = 0; a < nt; ++a) mom[a] += tt.w[q] * tv[q] * T[q * nt + a];
      }
      double* bf = b.data() + load.field * fbk;
      for (std::size_t s = 0; s < ns; ++s) {
        const double sv = load.space[s];
        if (sv == 0.0) continue;
        for (std::size_t a = 0; a < nt; ++a) bf[s * nt + a] += sv * mom[a];
      }
    }
  }
  return b;
}

std::vector<SpaceTimePoly> solve_correction(const CfmPatch& patch, std::span<const double> rhs,
                                            double t_prev) {
  const PatchOperator& op = *patch.op;
  const PatchGeometry& g = patch.geometry;
  const std::vector<double> c = lu_solve(op.lu, rhs);
  const int dim = op.dim, k = op.k, nf = field_count(dim);
  const std::size_t fbk = space_size(dim, k) * (k + 1);
  std::vector<SpaceTimePoly> out;
  for (int f = 0; f < nf; ++f) {
    std::array<int, 3> deg{k, k, k};
    std::array<double, 3> center{0.5 * (g.box.x0 + g.box.x1),
                                 dim == 2 ? 0.5 * (g.box.y0 + g.box.y1) : t_prev + 0.5 * op.dt,
                                 t_prev + 0.5 * op.dt};
    std::array<double, 3> scales{0.5 * g.box.width(), dim == 2 ? 0.5 * g.box.height() : 0.5 * op.dt,
                                 0.5 * op.dt};
    SpaceTimePoly p(dim, std::span<const int>(deg.data(), dim + 1),
                    std::span<const double>(center.data(), dim + 1),
                    std::span<const double>(scales.data(), dim + 1), Basis::ScaledLegendre);
    std::copy_n(c.begin() + f * fbk, fbk, p.coeffs().begin());
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> extract_dofs(std::span<const SpaceTimePoly> correction,
                                 std::span<const double> node, double t, int m) {
  std::vector<SpaceTimePoly> mono;
  mono.reserve(correction.size());
  for (const SpaceTimePoly& p : correction) {
    mono.push_back(p.basis() == Basis::ScaledMonomial ? p : p.to_monomial());
  }
  return evolve_node(mono, node, t, m);
}

std::vector<double> cfm_node_dofs(const CfmPatch& patch, std::span<const double> rhs) {
  return patch.op->gain.multiply(rhs);
}

std::pair<std::vector<char>, std::vector<char>> store_masks(const StaggeredMesh& mesh,
                                                            std::span<const CfmPatch> patches) {
  std::vector<char> cells(mesh.cell_count(), 0), nodes(mesh.node_count(), 0);
  for (const CfmPatch& p : patches) {
    for (const HermitePiece& piece : p.geometry.dual_pieces) cells[piece.id] = 1;
    for (const HermitePiece& piece : p.geometry.primal_pieces) nodes[piece.id] = 1;
  }
  return {std::move(cells), std::move(nodes)};
}

}  // namespace hcfm
