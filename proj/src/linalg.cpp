#include "twiqrnn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace twiqrnn {

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
  }
  return std::sqrt(2.0 * s);
}

}  // namespace

HermitianEigen hermitian_eigen(const ComplexMatrix& h, double herm_tol) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("hermitian_eigen: non-square matrix");
  }
  if (h.hermiticity_error() > herm_tol) {
    throw std::invalid_argument("hermitian_eigen: matrix is not Hermitian");
  }
  const std::size_t n = h.rows();
  ComplexMatrix a = h;
  ComplexMatrix v = ComplexMatrix::identity(n);

  // Scale-relative stopping threshold.
  double scale = a.max_abs();
  if (scale == 0.0) scale = 1.0;
  const double stop = 1e-14 * scale * static_cast<double>(n);
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cdouble apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        // Phase factor making the pivot real, then a real Jacobi rotation.
        const cdouble u = apq / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // Column update A <- A J with J = [[c, -s], [conj(u) s, conj(u) c]]
        // on columns (p, q), then row update A <- J^dagger A.
        const cdouble ju = std::conj(u);
        for (std::size_t i = 0; i < n; ++i) {
          const cdouble aip = a(i, p);
          const cdouble aiq = a(i, q);
          a(i, p) = c * aip + ju * s * aiq;
          a(i, q) = -s * aip + ju * c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cdouble apj = a(p, j);
          const cdouble aqj = a(q, j);
          a(p, j) = c * apj + u * s * aqj;
          a(q, j) = -s * apj + u * c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const cdouble vip = v(i, p);
          const cdouble viq = v(i, q);
          v(i, p) = c * vip + ju * s * viq;
          v(i, q) = -s * vip + ju * c * viq;
        }
        // Roundoff cleanup: the pivot is analytically zero now.
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });

  HermitianEigen out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

ComplexMatrix hermitian_expm(const ComplexMatrix& h, double t) {
  const HermitianEigen eig = hermitian_eigen(h);
  const std::size_t n = h.rows();
  // V diag(e^{-i lambda t}) V^dagger
  ComplexMatrix out(n, n);
  std::vector<cdouble> phase(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = -eig.values[k] * t;
    phase[k] = cdouble(std::cos(ang), std::sin(ang));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cdouble acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += eig.vectors(i, k) * phase[k] * std::conj(eig.vectors(j, k));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace twiqrnn
