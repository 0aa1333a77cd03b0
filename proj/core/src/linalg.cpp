#include "hermite_cfm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hermite_cfm/error.hpp"

namespace hcfm {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw InvalidArgument("DenseMatrix::multiply: length mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = data_.data() + i * cols_;
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> ExtendedMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols) throw InvalidArgument("ExtendedMatrix::multiply: length mismatch");
  std::vector<double> y(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const long double* r = data.data() + i * cols;
    long double s = 0.0L;
    for (std::size_t j = 0; j < cols; ++j) s += r[j] * x[j];
    y[i] = static_cast<double>(s);
  }
  return y;
}

DenseMatrix DenseMatrix::multiply(const DenseMatrix& b) const {
  if (cols_ != b.rows_) throw InvalidArgument("DenseMatrix::multiply: shape mismatch");
  DenseMatrix c(rows_, b.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      const double* br = b.data_.data() + k * b.cols_;
      double* cr = c.data_.data() + i * c.cols_;
      for (std::size_t j = 0; j < b.cols_; ++j) cr[j] += a * br[j];
    }
  }
  return c;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::norm1() const {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double DenseMatrix::norm_frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

LuFactors lu_factor(const DenseMatrix& m) {
  if (!m.square()) throw InvalidArgument("lu_factor: matrix must be square");
  const std::size_t n = m.rows();
  LuFactors f;
  f.scale.assign(n, 1.0);
  bool positive = true;
  for (std::size_t i = 0; i < n; ++i) positive = positive && m(i, i) > 0.0;
  if (positive) {
    for (std::size_t i = 0; i < n; ++i) f.scale[i] = 1.0 / std::sqrt(m(i, i));
  }
  f.lu = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f.lu(i, j) = f.scale[i] * m(i, j) * f.scale[j];
  f.norm1 = f.lu.norm1();
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  DenseMatrix& a = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    if (best == 0.0) throw SingularMatrixError(k);
    if (p != k) {
      std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(p).begin());
      std::swap(f.perm[k], f.perm[p]);
      f.perm_sign = -f.perm_sign;
    }
    const double piv = a(k, k);
    const double* rk = &a(k, 0);
    for (std::size_t i = k + 1; i < n; ++i) {
      double* ri = &a(i, 0);
      const double l = ri[k] / piv;
      ri[k] = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
    }
  }
  return f;
}

namespace {

// Solves (D M D) y = c in place on the scaled factors.
void solve_scaled(const LuFactors& f, std::vector<double>& y) {
  const std::size_t n = f.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = y[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = f.lu.row(i).data();
    double s = z[i];
    for (std::size_t j = 0; j < i; ++j) s -= r[j] * z[j];
    z[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    const double* r = f.lu.row(i).data();
    double s = z[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= r[j] * z[j];
    z[i] = s / r[i];
  }
  y.swap(z);
}

// Solves (D M D)^T y = c in place.
void solve_scaled_transposed(const LuFactors& f, std::vector<double>& y) {
  const std::size_t n = f.size();
  std::vector<double> w(y);
  // U^T w = c
  for (std::size_t i = 0; i < n; ++i) {
    double s = w[i];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(j, i) * w[j];
    w[i] = s / f.lu(i, i);
  }
  // L^T v = w
  for (std::size_t i = n; i-- > 0;) {
    double s = w[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(j, i) * w[j];
    w[i] = s;
  }
  for (std::size_t i = 0; i < n; ++i) y[f.perm[i]] = w[i];
}

}  // namespace

std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b) {
  if (b.size() != f.size()) throw InvalidArgument("lu_solve: length mismatch");
  std::vector<double> y(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) y[i] = f.scale[i] * b[i];
  solve_scaled(f, y);
  for (std::size_t i = 0; i < b.size(); ++i) y[i] *= f.scale[i];
  return y;
}

std::vector<double> lu_solve_transposed(const LuFactors& f, std::span<const double> b) {
  if (b.size() != f.size()) throw InvalidArgument("lu_solve_transposed: length mismatch");
  std::vector<double> y(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) y[i] = f.scale[i] * b[i];
  solve_scaled_transposed(f, y);
  for (std::size_t i = 0; i < b.size(); ++i) y[i] *= f.scale[i];
  return y;
}

double lu_determinant(const LuFactors& f) {
  double d = f.perm_sign;
  for (std::size_t i = 0; i < f.size(); ++i) d *= f.lu(i, i) / (f.scale[i] * f.scale[i]);
  return d;
}

double cond1_estimate(const LuFactors& f) {
  const std::size_t n = f.size();
  if (n == 0) return 0.0;
  auto norm1 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  std::size_t last_j = n;
  for (int iter = 0; iter < 5; ++iter) {
    std::vector<double> y = x;
    solve_scaled(f, y);
    const double ny = norm1(y);
    if (iter > 0 && ny <= est) break;
    est = ny;
    std::vector<double> xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
    solve_scaled_transposed(f, xi);
    std::size_t j = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(xi[i]) > std::abs(xi[j])) j = i;
    double ztx = 0.0;
    for (std::size_t i = 0; i < n; ++i) ztx += xi[i] * x[i];
    if (iter > 0 && (std::abs(xi[j]) <= ztx || j == last_j)) break;
    last_j = j;
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
  }
  // Alternative probe guarding against unlucky cancellation.
  std::vector<double> alt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
    alt[i] = sgn * (1.0 + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0));
  }
  const double alt_norm = norm1(alt);
  solve_scaled(f, alt);
  est = std::max(est, norm1(alt) / alt_norm);
  return est * f.norm1;
}

namespace {

DenseMatrix hessenberg(const DenseMatrix& m) {
  DenseMatrix h = m;
  const std::size_t n = h.rows();
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += h(i, k) * h(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (h(k + 1, k) > 0.0) alpha = -alpha;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm += v[i] * v[i];
    }
    if (vnorm == 0.0) continue;
    const double beta = 2.0 / vnorm;
    // H <- (I - beta v v^T) H
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    // H <- H (I - beta v v^T)
    for (std::size_t i = 0; i < n; ++i) {
      double* r = &h(i, 0);
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += r[j] * v[j];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) r[j] -= s * v[j];
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
  return h;
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

}  // namespace

std::vector<std::complex<double>> eigenvalues(const DenseMatrix& m) {
  if (!m.square()) throw InvalidArgument("eigenvalues: matrix must be square");
  const int n = static_cast<int>(m.rows());
  if (n > 4000) throw InvalidArgument("eigenvalues: matrix larger than 4000");
  std::vector<std::complex<double>> ev(n);
  if (n == 0) return ev;
  DenseMatrix hm = hessenberg(m);
  // 1-based accessor over the 0-based storage.
  auto a = [&hm](int i, int j) -> double& { return hm(i - 1, j - 1); };
  std::vector<double> wr(n + 1), wi(n + 1);

  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));
  const double eps = std::numeric_limits<double>::epsilon();

  int nn = n;
  int l = 1;
  double t = 0.0;
  long total_its = 0;
  const long max_its = 30L * n;
  while (nn >= 1) {
    int its = 0;
    do {
      for (l = nn; l >= 2; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -z;
            wi[nn] = z;
          }
          nn -= 2;
        } else {
          if (total_its >= max_its) {
            throw ConvergenceError("eigenvalues: QR iteration did not converge; unreduced block rows " +
                                   std::to_string(l) + ".." + std::to_string(nn));
          }
          if (its == 10 || its == 20) {
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          ++total_its;
          int mm = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (mm = nn - 2; mm >= l; --mm) {
            z = a(mm, mm);
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a(mm + 1, mm) + a(mm, mm + 1);
            q = a(mm + 1, mm + 1) - z - r - s;
            r = a(mm + 2, mm + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (mm == l) break;
            const double u = std::abs(a(mm, mm - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(mm - 1, mm - 1)) + std::abs(z) + std::abs(a(mm + 1, mm + 1)));
            if (u <= eps * v) break;
          }
          for (int i = mm + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != mm + 2) a(i, i - 3) = 0.0;
          }
          for (int k = mm; k <= nn - 1; ++k) {
            if (k != mm) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == mm) {
                if (l != mm) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  for (int i = 1; i <= n; ++i) ev[i - 1] = {wr[i], wi[i]};
  return ev;
}

double spectral_radius(const DenseMatrix& m) {
  double r = 0.0;
  for (const auto& z : eigenvalues(m)) r = std::max(r, std::abs(z));
  return r;
}

bool is_positive_definite(const DenseMatrix& m) {
  if (!m.square()) return false;
  const std::size_t n = m.rows();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / d;
    }
  }
  return true;
}

ExtendedMatrix right_divide_extended(const DenseMatrix& e, const ExtendedMatrix& m) {
  if (m.rows != m.cols || e.cols() != m.rows) {
    throw InvalidArgument("right_divide_extended: dimension mismatch");
  }
  const std::size_t n = m.rows;
  // Solve (D M^T D) Y = D E^T, then X^T = D Y.
  std::vector<long double> d(n, 1.0L);
  bool positive = true;
  for (std::size_t i = 0; i < n; ++i) positive = positive && m.data[i * n + i] > 0.0L;
  if (positive) {
    for (std::size_t i = 0; i < n; ++i) d[i] = 1.0L / std::sqrt(m.data[i * n + i]);
  }
  std::vector<long double> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = d[i] * m.data[j * n + i] * d[j];
  }
  const std::size_t r = e.rows();
  std::vector<long double> y(n * r);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < r; ++k) y[i * r + k] = d[i] * e(k, i);
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (std::fabs(a[i * n + c]) > std::fabs(a[piv * n + c])) piv = i;
    }
    if (a[piv * n + c] == 0.0L) throw SingularMatrixError(c);
    if (piv != c) {
      std::swap_ranges(a.begin() + c * n, a.begin() + (c + 1) * n, a.begin() + piv * n);
      std::swap_ranges(y.begin() + c * r, y.begin() + (c + 1) * r, y.begin() + piv * r);
    }
    const long double inv = 1.0L / a[c * n + c];
    for (std::size_t i = c + 1; i < n; ++i) {
      const long double f = a[i * n + c] * inv;
      if (f == 0.0L) continue;
      for (std::size_t j = c + 1; j < n; ++j) a[i * n + j] -= f * a[c * n + j];
      for (std::size_t k = 0; k < r; ++k) y[i * r + k] -= f * y[c * r + k];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t j = c + 1; j < n; ++j) {
      const long double f = a[c * n + j];
      if (f == 0.0L) continue;
      for (std::size_t k = 0; k < r; ++k) y[c * r + k] -= f * y[j * r + k];
    }
    for (std::size_t k = 0; k < r; ++k) y[c * r + k] /= a[c * n + c];
  }
  ExtendedMatrix out;
  out.rows = r;
  out.cols = n;
  out.data.resize(r * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < r; ++k) out.data[k * n + i] = d[i] * y[i * r + k];
  }
  return out;
}

}  // namespace hcfm
