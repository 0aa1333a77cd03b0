#include "hermite_cfm/polynomial.hpp"

#include <cmath>
#include <numbers>

#include "hermite_cfm/error.hpp"

namespace hcfm {

double legendre_eval(int n, double x) {
  if (n < 0) throw InvalidArgument("legendre_eval: negative degree");
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void legendre_values(int nmax, double x, std::span<double> out) {
  out[0] = 1.0;
  if (nmax >= 1) out[1] = x;
  for (int k = 1; k < nmax; ++k) {
    out[k + 1] = ((2.0 * k + 1.0) * x * out[k] - k * out[k - 1]) / (k + 1.0);
  }
}

void legendre_derivatives(int nmax, int order, double x, std::span<double> out) {
  // P^{(j)}_{n+1} = P^{(j)}_{n-1} + (2n+1) P^{(j-1)}_n
  std::vector<double> prev(nmax + 1);
  legendre_values(nmax, x, prev);
  if (order == 0) {
    std::copy(prev.begin(), prev.end(), out.begin());
    return;
  }
  std::vector<double> cur(nmax + 1);
  for (int j = 1; j <= order; ++j) {
    cur[0] = 0.0;
    if (nmax >= 1) cur[1] = (j == 1) ? 1.0 : 0.0;
    for (int n = 1; n < nmax; ++n) cur[n + 1] = cur[n - 1] + (2.0 * n + 1.0) * prev[n];
    std::swap(prev, cur);
  }
  std::copy(prev.begin(), prev.end(), out.begin());
}

Quadrature gauss_rule(int n) {
  if (n < 1 || n > 32) throw InvalidArgument("gauss_rule: point count must be in [1, 32]");
  Quadrature q;
  q.points.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    int it = 0;
    for (;; ++it) {
      if (it == 100) throw ConvergenceError("gauss_rule: Newton iteration did not converge");
      double p0 = 1.0;
      double p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 1; k < n; ++k) {
      const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    q.points[n - 1 - i] = x;
    q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) q.points[n / 2] = 0.0;
  return q;
}

SpaceTimePoly::SpaceTimePoly(int dim, std::span<const int> degrees,
                             std::span<const double> center, std::span<const double> scales,
                             Basis basis)
    : dim_(dim), basis_(basis) {
  if (dim < 1 || dim > 2) throw InvalidArgument("SpaceTimePoly: dim must be 1 or 2");
  const int n = dim + 1;
  if (static_cast<int>(degrees.size()) != n || static_cast<int>(center.size()) != n ||
      static_cast<int>(scales.size()) != n) {
    throw InvalidArgument("SpaceTimePoly: degrees/center/scales must have dim+1 entries");
  }
  for (int a = 0; a < n; ++a) {
    if (degrees[a] < 0) throw InvalidArgument("SpaceTimePoly: negative degree");
    if (!(scales[a] > 0.0)) throw InvalidArgument("SpaceTimePoly: scales must be positive");
    degree_[a] = degrees[a];
    center_[a] = center[a];
    scale_[a] = scales[a];
  }
  compute_strides();
}

void SpaceTimePoly::compute_strides() {
  const int n = axes();
  int s = 1;
  for (int a = n - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= degree_[a] + 1;
  }
  coeffs_.assign(s, 0.0);
}

double& SpaceTimePoly::at(std::span<const int> exps) {
  int idx = 0;
  for (int a = 0; a < axes(); ++a) idx += exps[a] * stride_[a];
  return coeffs_[idx];
}

double SpaceTimePoly::at(std::span<const int> exps) const {
  int idx = 0;
  for (int a = 0; a < axes(); ++a) idx += exps[a] * stride_[a];
  return coeffs_[idx];
}

std::vector<double> legendre_to_monomial_matrix(int degree) {
  const int n = degree + 1;
  // Column k holds the monomial coefficients of P_k.
  std::vector<double> m(n * n, 0.0);
  auto at = [&](int j, int k) -> double& { return m[j * n + k]; };
  at(0, 0) = 1.0;
  if (degree >= 1) at(1, 1) = 1.0;
  for (int k = 1; k < degree; ++k) {
    for (int j = 0; j <= k + 1; ++j) {
      double v = 0.0;
      if (j >= 1) v += (2.0 * k + 1.0) * at(j - 1, k);
      v -= k * at(j, k - 1);
      at(j, k + 1) = v / (k + 1.0);
    }
  }
  return m;
}

namespace {

// Inverts the upper-triangular Legendre-to-monomial map.
std::vector<double> monomial_to_legendre_matrix(int degree) {
  const int n = degree + 1;
  const std::vector<double> l2m = legendre_to_monomial_matrix(degree);
  std::vector<double> inv(n * n, 0.0);
  for (int col = 0; col < n; ++col) {
    // Solve L2M * x = e_col by back substitution (L2M upper triangular).
    for (int j = n - 1; j >= 0; --j) {
      double s = (j == col) ? 1.0 : 0.0;
      for (int k = j + 1; k < n; ++k) s -= l2m[j * n + k] * inv[k * n + col];
      inv[j * n + col] = s / l2m[j * n + j];
    }
  }
  return inv;
}

SpaceTimePoly change_basis(const SpaceTimePoly& p, Basis target) {
  const int n = p.axes();
  std::array<int, 3> deg{};
  std::array<double, 3> ctr{};
  std::array<double, 3> scl{};
  std::array<int, 3> ext{};
  for (int a = 0; a < n; ++a) {
    deg[a] = p.degree(a);
    ctr[a] = p.center(a);
    scl[a] = p.scale(a);
    ext[a] = p.extent(a);
  }
  std::vector<std::vector<double>> mats(n);
  std::array<std::span<const double>, 3> tables{};
  for (int a = 0; a < n; ++a) {
    mats[a] = (target == Basis::ScaledMonomial) ? legendre_to_monomial_matrix(deg[a])
                                                : monomial_to_legendre_matrix(deg[a]);
    tables[a] = mats[a];
  }
  std::vector<double> out = tensor_apply(p.coeffs(), std::span<const int>(ext.data(), n),
                                         std::span<const std::span<const double>>(tables.data(), n),
                                         std::span<const int>(ext.data(), n));
  SpaceTimePoly r(p.dim(), std::span<const int>(deg.data(), n),
                  std::span<const double>(ctr.data(), n), std::span<const double>(scl.data(), n),
                  target);
  std::copy(out.begin(), out.end(), r.coeffs().begin());
  return r;
}

}  // namespace

SpaceTimePoly SpaceTimePoly::to_legendre() const {
  if (basis_ == Basis::ScaledLegendre) return *this;
  return change_basis(*this, Basis::ScaledLegendre);
}

SpaceTimePoly SpaceTimePoly::to_monomial() const {
  if (basis_ == Basis::ScaledMonomial) return *this;
  return change_basis(*this, Basis::ScaledMonomial);
}

double poly_eval(const SpaceTimePoly& p, std::span<const double> x, double t) {
  const int n = p.axes();
  std::array<std::vector<double>, 3> vals;
  for (int a = 0; a < n; ++a) {
    const double coord = (a < p.dim()) ? x[a] : t;
    const double s = (coord - p.center(a)) / p.scale(a);
    vals[a].resize(p.extent(a));
    if (p.basis() == Basis::ScaledLegendre) {
      legendre_values(p.degree(a), s, vals[a]);
    } else {
      double pw = 1.0;
      for (int e = 0; e < p.extent(a); ++e) {
        vals[a][e] = pw;
        pw *= s;
      }
    }
  }
  const auto c = p.coeffs();
  double sum = 0.0;
  if (n == 2) {
    for (int i = 0; i < p.extent(0); ++i) {
      double inner = 0.0;
      for (int j = 0; j < p.extent(1); ++j) inner += c[i * p.stride(0) + j] * vals[1][j];
      sum += inner * vals[0][i];
    }
  } else {
    for (int i = 0; i < p.extent(0); ++i) {
      double mid = 0.0;
      for (int j = 0; j < p.extent(1); ++j) {
        double inner = 0.0;
        const double* row = &c[i * p.stride(0) + j * p.stride(1)];
        for (int k = 0; k < p.extent(2); ++k) inner += row[k] * vals[2][k];
        mid += inner * vals[1][j];
      }
      sum += mid * vals[0][i];
    }
  }
  return sum;
}

SpaceTimePoly poly_derivative(const SpaceTimePoly& p, std::span<const int> alpha) {
  if (p.basis() != Basis::ScaledMonomial) {
    throw InvalidArgument("poly_derivative: monomial basis required");
  }
  const int n = p.axes();
  std::array<int, 3> deg{};
  std::array<double, 3> ctr{};
  std::array<double, 3> scl{};
  for (int a = 0; a < n; ++a) {
    deg[a] = std::max(p.degree(a) - alpha[a], 0);
    ctr[a] = p.center(a);
    scl[a] = p.scale(a);
  }
  SpaceTimePoly r(p.dim(), std::span<const int>(deg.data(), n),
                  std::span<const double>(ctr.data(), n), std::span<const double>(scl.data(), n));
  // factor[a][e] = (e+alpha)! / e! / scale^alpha, or 0 if e+alpha exceeds degree
  std::array<std::vector<double>, 3> factor;
  for (int a = 0; a < n; ++a) {
    factor[a].assign(deg[a] + 1, 0.0);
    for (int e = 0; e <= deg[a]; ++e) {
      if (e + alpha[a] > p.degree(a)) continue;
      double f = 1.0;
      for (int k = 1; k <= alpha[a]; ++k) f *= static_cast<double>(e + k) / p.scale(a);
      factor[a][e] = f;
    }
  }
  std::array<int, 3> e{};
  std::array<int, 3> src{};
  const int total = static_cast<int>(r.coeffs().size());
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    double f = 1.0;
    for (int a = 0; a < n; ++a) {
      e[a] = rem / r.stride(a);
      rem %= r.stride(a);
      src[a] = e[a] + alpha[a];
      f *= factor[a][e[a]];
    }
    if (f == 0.0) continue;
    r.coeffs()[idx] = f * p.at(std::span<const int>(src.data(), n));
  }
  return r;
}

std::vector<double> tensor_apply(std::span<const double> in, std::span<const int> extents,
                                 std::span<const std::span<const double>> tables,
                                 std::span<const int> rows) {
  const int n = static_cast<int>(extents.size());
  std::vector<int> ext(extents.begin(), extents.end());
  std::vector<double> cur(in.begin(), in.end());
  std::vector<double> next;
  for (int a = 0; a < n; ++a) {
    int pre = 1;
    for (int b = 0; b < a; ++b) pre *= ext[b];
    int post = 1;
    for (int b = a + 1; b < n; ++b) post *= ext[b];
    const int nin = ext[a];
    const int nout = rows[a];
    const std::span<const double> t = tables[a];
    next.assign(static_cast<std::size_t>(pre) * nout * post, 0.0);
    for (int p = 0; p < pre; ++p) {
      const double* src = &cur[static_cast<std::size_t>(p) * nin * post];
      double* dst = &next[static_cast<std::size_t>(p) * nout * post];
      for (int r = 0; r < nout; ++r) {
        double* d = dst + static_cast<std::size_t>(r) * post;
        for (int j = 0; j < nin; ++j) {
          const double w = t[r * nin + j];
          if (w == 0.0) continue;
          const double* s = src + static_cast<std::size_t>(j) * post;
          for (int q = 0; q < post; ++q) d[q] += w * s[q];
        }
      }
    }
    ext[a] = nout;
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace hcfm
