#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "schottky/rational.hpp"

namespace schottky {

using Vector = std::vector<Rational>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::initializer_list<std::initializer_list<Rational>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix diagonal(const Vector& d);
  // Elementary matrix I + s*E_{ij} (0-based indices).
  static Matrix elementary(std::size_t n, std::size_t i, std::size_t j, const Rational& s = 1);
  static Matrix outer(const Vector& col, const Vector& row);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector row(std::size_t i) const;
  Vector col(std::size_t j) const;

  Matrix transpose() const;
  bool is_identity() const;
  bool is_zero() const;
  bool is_integral() const;

  friend bool operator==(const Matrix& a, const Matrix& b);
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(const Rational& s, const Matrix& a);
  friend Vector operator*(const Matrix& a, const Vector& v);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

Rational dot(const Vector& a, const Vector& b);
Rational norm_sq(const Vector& v);
Vector scaled(const Vector& v, const Rational& s);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
// Row vector times matrix.
Vector left_multiply(const Vector& row, const Matrix& m);

Rational determinant(const Matrix& m);
Rational trace(const Matrix& m);
Matrix inverse(const Matrix& m);
std::size_t rank(const Matrix& m);
std::size_t rank(const std::vector<Vector>& rows);
// Reduced row echelon form; pivot columns returned in order.
Matrix rref(const Matrix& m, std::vector<std::size_t>* pivots = nullptr);
// Basis of {x : m x = 0}.
std::vector<Vector> kernel(const Matrix& m);
// Solves m x = b for square invertible m; returns false if singular.
bool solve(const Matrix& m, const Vector& b, Vector& x);
Matrix power(const Matrix& m, long long e);
Rational frobenius_sq(const Matrix& m);
Matrix commutator(const Matrix& a, const Matrix& b);

}  // namespace schottky
