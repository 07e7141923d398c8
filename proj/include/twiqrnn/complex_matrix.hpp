#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace twiqrnn {

using cdouble = std::complex<double>;

// Dense row-major complex matrix with value semantics. Shape mismatches in
// binary operations throw std::invalid_argument.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix from_rows(
      std::initializer_list<std::initializer_list<cdouble>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cdouble& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const cdouble& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }

  ComplexMatrix dagger() const;
  cdouble trace() const;
  double max_abs() const;
  double max_abs_diff(const ComplexMatrix& other) const;
  double hermiticity_error() const;  // max |m - m^dagger|
  double unitarity_error() const;    // max |m^dagger m - I|

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cdouble scalar);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
    a += b;
    return a;
  }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
    a -= b;
    return a;
  }
  friend ComplexMatrix operator*(cdouble s, ComplexMatrix a) {
    a *= s;
    return a;
  }
  friend ComplexMatrix operator*(ComplexMatrix a, cdouble s) {
    a *= s;
    return a;
  }
  friend ComplexMatrix operator*(const ComplexMatrix& a,
                                 const ComplexMatrix& b);

  bool same_shape(const ComplexMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

// Kronecker product; result dims are the entrywise products.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Single-qubit constants.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// Operator on `n_qubits` acting as `op` on qubit `target` (qubit 0 is the
// most significant bit position) and identity elsewhere.
ComplexMatrix embed_single_qubit(const ComplexMatrix& op, int target,
                                 int n_qubits);

}  // namespace twiqrnn
