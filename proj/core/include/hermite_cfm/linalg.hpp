#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hcfm {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> multiply(std::span<const double> x) const;
  DenseMatrix multiply(const DenseMatrix& b) const;
  DenseMatrix transpose() const;
  double norm1() const;
  double norm_frobenius() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Partial-pivoted LU of the symmetrically scaled matrix D*M*D.
struct LuFactors {
  DenseMatrix lu;              ///< unit-lower L below the diagonal, U on and above
  std::vector<std::size_t> perm;  ///< row i of P*(DMD) is row perm[i] of DMD
  std::vector<double> scale;   ///< diagonal of D
  double norm1 = 0.0;          ///< 1-norm of D*M*D
  int perm_sign = 1;

  std::size_t size() const { return perm.size(); }
};

/// D_jj = 1/sqrt(M_jj) when every diagonal entry is positive, else D = I.
/// Throws SingularMatrixError on an exactly zero pivot.
LuFactors lu_factor(const DenseMatrix& m);

/// Solves M x = b.
std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b);
/// Solves M^T x = b.
std::vector<double> lu_solve_transposed(const LuFactors& f, std::span<const double> b);

/// det(M) (including the scaling).
double lu_determinant(const LuFactors& f);

/// Hager/Higham estimate of the 1-norm condition number of D*M*D. Always a
/// lower bound of the true value.
double cond1_estimate(const LuFactors& f);

/// Row-major matrix stored in extended precision.
struct ExtendedMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<long double> data;

  /// y = A x with extended-precision accumulation, rounded to double.
  std::vector<double> multiply(std::span<const double> x) const;
  double operator()(std::size_t i, std::size_t j) const {
    return static_cast<double>(data[i * cols + j]);
  }
};

/// E * M^{-1} from a partial-pivoted LU of the scaled M carried out in long
/// double. Throws SingularMatrixError on an exactly zero pivot.
ExtendedMatrix right_divide_extended(const DenseMatrix& e, const ExtendedMatrix& m);

/// All eigenvalues: Householder reduction to Hessenberg form followed by the
/// Francis implicit double-shift QR iteration with deflation.
std::vector<std::complex<double>> eigenvalues(const DenseMatrix& m);

double spectral_radius(const DenseMatrix& m);

/// Cholesky test used to certify symmetric positive definiteness.
bool is_positive_definite(const DenseMatrix& m);

}  // namespace hcfm
