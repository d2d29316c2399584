#include "schottky/matrix.hpp"

#include <utility>

#include "schottky/errors.hpp"

namespace schottky {

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<Rational>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
    for (const auto& x : r) data_.push_back(x);
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw DimensionMismatch("ragged rows");
    for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::elementary(std::size_t n, std::size_t i, std::size_t j, const Rational& s) {
  Matrix m = identity(n);
  m(i, j) += s;
  return m;
}

Matrix Matrix::outer(const Vector& col, const Vector& row) {
  Matrix m(col.size(), row.size());
  for (std::size_t i = 0; i < col.size(); ++i)
    for (std::size_t j = 0; j < row.size(); ++j) m(i, j) = col[i] * row[j];
  return m;
}

Vector Matrix::row(std::size_t i) const {
  return Vector(data_.begin() + static_cast<long>(i * cols_),
                data_.begin() + static_cast<long>((i + 1) * cols_));
}

Vector Matrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::is_identity() const {
  if (!square()) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if ((*this)(i, j) != (i == j ? 1 : 0)) return false;
  return true;
}

bool Matrix::is_zero() const {
  for (const auto& x : data_)
    if (x != 0) return false;
  return true;
}

bool Matrix::is_integral() const {
  for (const auto& x : data_)
    if (x.get_den() != 1) return false;
  return true;
}

bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
  Matrix c(a.rows_, b.cols_);
  bool integral = a.is_integral() && b.is_integral();
  if (integral) {
    Integer acc;
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) {
        acc = 0;
        for (std::size_t k = 0; k < a.cols_; ++k)
          mpz_addmul(acc.get_mpz_t(), a(i, k).get_num_mpz_t(), b(k, j).get_num_mpz_t());
        c(i, j) = Rational(acc);
      }
    return c;
  }
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Rational& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionMismatch("matrix sum shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionMismatch("matrix difference shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

Matrix operator*(const Rational& s, const Matrix& a) {
  Matrix c = a;
  for (auto& x : c.data_) x *= s;
  return c;
}

Vector operator*(const Matrix& a, const Vector& v) {
  if (a.cols_ != v.size()) throw DimensionMismatch("matrix-vector shape mismatch");
  Vector r(a.rows_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < a.cols_; ++j) r[i] += a(i, j) * v[j];
  return r;
}

Rational dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot product length mismatch");
  Rational s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rational norm_sq(const Vector& v) { return dot(v, v); }

Vector scaled(const Vector& v, const Rational& s) {
  Vector r = v;
  for (auto& x : r) x *= s;
  return r;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector length mismatch");
  Vector r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vector sub(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector length mismatch");
  Vector r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Vector left_multiply(const Vector& row, const Matrix& m) {
  if (row.size() != m.rows()) throw DimensionMismatch("row-vector shape mismatch");
  Vector r(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) r[j] += row[i] * m(i, j);
  return r;
}

Matrix rref(const Matrix& m, std::vector<std::size_t>* pivots) {
  Matrix a = m;
  std::size_t r = 0;
  if (pivots) pivots->clear();
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t p = r;
    while (p < a.rows() && a(p, c) == 0) ++p;
    if (p == a.rows()) continue;
    if (p != r)
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(p, j), a(r, j));
    Rational inv = 1 / a(r, c);
    for (std::size_t j = c; j < a.cols(); ++j) a(r, j) *= inv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || a(i, c) == 0) continue;
      Rational f = a(i, c);
      for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    if (pivots) pivots->push_back(c);
    ++r;
  }
  return a;
}

std::size_t rank(const Matrix& m) {
  std::vector<std::size_t> piv;
  rref(m, &piv);
  return piv.size();
}

std::size_t rank(const std::vector<Vector>& rows) {
  if (rows.empty()) return 0;
  return rank(Matrix::from_rows(rows));
}

std::vector<Vector> kernel(const Matrix& m) {
  std::vector<std::size_t> piv;
  Matrix a = rref(m, &piv);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : piv) is_pivot[p] = true;
  std::vector<Vector> basis;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    Vector v(m.cols());
    v[f] = 1;
    for (std::size_t i = 0; i < piv.size(); ++i) v[piv[i]] = -a(i, f);
    basis.push_back(std::move(v));
  }
  return basis;
}

Rational determinant(const Matrix& m) {
  if (!m.square()) throw DimensionMismatch("determinant of non-square matrix");
  Matrix a = m;
  std::size_t n = a.rows();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a(i, c) == 0) continue;
      Rational f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

Rational trace(const Matrix& m) {
  Rational t;
  for (std::size_t i = 0; i < m.rows() && i < m.cols(); ++i) t += m(i, i);
  return t;
}

Matrix inverse(const Matrix& m) {
  if (!m.square()) throw DimensionMismatch("inverse of non-square matrix");
  std::size_t n = m.rows();
  if (n == 2) {
    Rational det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (det == 0) throw PreconditionError("singular matrix");
    Matrix r(2, 2);
    r(0, 0) = m(1, 1) / det;
    r(0, 1) = -m(0, 1) / det;
    r(1, 0) = -m(1, 0) / det;
    r(1, 1) = m(0, 0) / det;
    return r;
  }
  Matrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  std::vector<std::size_t> piv;
  Matrix red = rref(aug, &piv);
  if (piv.size() < n || piv[n - 1] != n - 1) throw PreconditionError("singular matrix");
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = red(i, n + j);
  return r;
}

bool solve(const Matrix& m, const Vector& b, Vector& x) {
  std::size_t n = m.rows();
  if (!m.square() || b.size() != n) throw DimensionMismatch("solve shape mismatch");
  Matrix aug(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n) = b[i];
  }
  std::vector<std::size_t> piv;
  Matrix red = rref(aug, &piv);
  if (piv.size() < n || piv[n - 1] != n - 1) return false;
  x.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) x[i] = red(i, n);
  return true;
}

Matrix power(const Matrix& m, long long e) {
  if (!m.square()) throw DimensionMismatch("power of non-square matrix");
  Matrix base = e < 0 ? inverse(m) : m;
  unsigned long long k = e < 0 ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
  Matrix result = Matrix::identity(m.rows());
  while (k) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

Rational frobenius_sq(const Matrix& m) {
  Rational s;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
  return s;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  return a * b * inverse(a) * inverse(b);
}

}  // namespace schottky
