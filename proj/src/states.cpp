#include "twiqrnn/states.hpp"

#include <cmath>
#include <numeric>

namespace twiqrnn {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

int log2_exact(std::size_t v) {
  int n = 0;
  while ((std::size_t{1} << n) < v) ++n;
  return n;
}

}  // namespace

QubitPartition::QubitPartition(int memory_qubits, int output_qubits)
    : n_memory(memory_qubits), n_output(output_qubits) {
  if (n_memory < 1 || n_output < 1) {
    throw std::invalid_argument("QubitPartition: both subregisters need >= 1 qubit");
  }
  if (total() > 10) {
    throw std::invalid_argument("QubitPartition: dense simulation capped at 10 qubits");
  }
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::vector<int> labels)
    : matrix_(std::move(matrix)), labels_(std::move(labels)) {
  if (matrix_.rows() != matrix_.cols() || !is_power_of_two(matrix_.rows())) {
    throw std::invalid_argument("DensityMatrix: dimension must be a power of two");
  }
  n_qubits_ = log2_exact(matrix_.rows());
  if (labels_.empty()) {
    labels_.resize(n_qubits_);
    std::iota(labels_.begin(), labels_.end(), 0);
  } else if (static_cast<int>(labels_.size()) != n_qubits_) {
    throw std::invalid_argument("DensityMatrix: label count must match qubit count");
  }
}

DensityMatrix DensityMatrix::ground_state(int n_qubits) {
  ComplexMatrix m(std::size_t{1} << n_qubits, std::size_t{1} << n_qubits);
  m(0, 0) = 1.0;
  return DensityMatrix(std::move(m));
}

void DensityMatrix::validate(double herm_tol, double trace_tol,
                             double psd_tol) const {
  const double herm = matrix_.hermiticity_error();
  if (herm > herm_tol) {
    throw NumericalError("density matrix not Hermitian (residue " +
                         std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(matrix_.trace() - cdouble(1.0, 0.0));
  if (tr_err > trace_tol) {
    throw NumericalError("density matrix trace drift " + std::to_string(tr_err));
  }
  const HermitianEigen eig = hermitian_eigen(matrix_, 10.0 * herm_tol);
  if (!eig.values.empty() && eig.values.front() < -psd_tol) {
    throw NumericalError("density matrix has negative eigenvalue " +
                         std::to_string(eig.values.front()));
  }
}

Observable::Observable(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.hermiticity_error() > 1e-10) {
    throw std::invalid_argument("Observable: matrix is not Hermitian");
  }
  eigen_ = hermitian_eigen(matrix_);
}

Observable Observable::mean_z(int n_qubits) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  ComplexMatrix m(dim, dim);
  for (std::size_t y = 0; y < dim; ++y) {
    double sum = 0.0;
    for (int q = 0; q < n_qubits; ++q) {
      sum += ((y >> (n_qubits - 1 - q)) & 1) ? -1.0 : 1.0;
    }
    m(y, y) = sum / n_qubits;
  }
  return Observable(std::move(m));
}

double Observable::vacuum_expectation() const {
  return matrix_(0, 0).real();
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const QubitPartition& part, Subsystem traced) {
  if (rho.dim() != part.dim()) {
    throw std::invalid_argument("partial_trace: state/partition dimension mismatch");
  }
  const std::size_t da = part.memory_dim();
  const std::size_t db = part.output_dim();
  const ComplexMatrix& m = rho.matrix();
  if (traced == Subsystem::output) {
    ComplexMatrix out(da, da);
    for (std::size_t ia = 0; ia < da; ++ia) {
      for (std::size_t ja = 0; ja < da; ++ja) {
        cdouble acc = 0.0;
        for (std::size_t ib = 0; ib < db; ++ib) {
          acc += m(ia * db + ib, ja * db + ib);
        }
        out(ia, ja) = acc;
      }
    }
    return DensityMatrix(std::move(out));
  }
  ComplexMatrix out(db, db);
  for (std::size_t ib = 0; ib < db; ++ib) {
    for (std::size_t jb = 0; jb < db; ++jb) {
      cdouble acc = 0.0;
      for (std::size_t ia = 0; ia < da; ++ia) {
        acc += m(ia * db + ib, ia * db + jb);
      }
      out(ib, jb) = acc;
    }
  }
  return DensityMatrix(std::move(out));
}

double expectation(const DensityMatrix& rho, const Observable& obs,
                   const QubitPartition& part) {
  if (rho.dim() != part.dim()) {
    throw std::invalid_argument("expectation: state/partition dimension mismatch");
  }
  if (obs.matrix().rows() != part.output_dim()) {
    throw std::invalid_argument("expectation: observable must act on the output register");
  }
  const std::size_t da = part.memory_dim();
  const std::size_t db = part.output_dim();
  const ComplexMatrix& m = rho.matrix();
  const ComplexMatrix& o = obs.matrix();
  // Tr[rho (I x O)] = sum_{ia,ib,jb} rho[(ia,ib),(ia,jb)] O[jb,ib]
  cdouble acc = 0.0;
  for (std::size_t ia = 0; ia < da; ++ia) {
    for (std::size_t ib = 0; ib < db; ++ib) {
      for (std::size_t jb = 0; jb < db; ++jb) {
        acc += m(ia * db + ib, ia * db + jb) * o(jb, ib);
      }
    }
  }
  if (std::abs(acc.imag()) > 1e-10) {
    throw NumericalError("expectation has imaginary residue " +
                         std::to_string(acc.imag()));
  }
  return acc.real();
}

std::vector<double> born_probabilities(const DensityMatrix& rho,
                                       const QubitPartition& part) {
  if (rho.dim() != part.dim()) {
    throw std::invalid_argument("born_probabilities: dimension mismatch");
  }
  const std::size_t da = part.memory_dim();
  const std::size_t db = part.output_dim();
  const ComplexMatrix& m = rho.matrix();
  std::vector<double> probs(db, 0.0);
  for (std::size_t y = 0; y < db; ++y) {
    double p = 0.0;
    for (std::size_t ia = 0; ia < da; ++ia) {
      p += m(ia * db + y, ia * db + y).real();
    }
    if (p < 0.0) {
      if (p < -1e-10) {
        throw NumericalError("born probability below positivity floor: " +
                             std::to_string(p));
      }
      p = 0.0;
    }
    probs[y] = p;
  }
  double sum = 0.0;
  for (double p : probs) sum += p;
  if (std::abs(sum - 1.0) > 1e-10) {
    throw NumericalError("born probabilities sum to " + std::to_string(sum));
  }
  return probs;
}

CollapseResult collapse(const DensityMatrix& rho, int outcome,
                        const QubitPartition& part) {
  const std::size_t da = part.memory_dim();
  const std::size_t db = part.output_dim();
  if (rho.dim() != part.dim()) {
    throw std::invalid_argument("collapse: dimension mismatch");
  }
  if (outcome < 0 || static_cast<std::size_t>(outcome) >= db) {
    throw std::invalid_argument("collapse: outcome out of range");
  }
  const ComplexMatrix& m = rho.matrix();
  const std::size_t y = static_cast<std::size_t>(outcome);
  double p = 0.0;
  for (std::size_t ia = 0; ia < da; ++ia) {
    p += m(ia * db + y, ia * db + y).real();
  }
  if (p <= 1e-14) {
    throw NumericalError("collapse onto outcome with probability " +
                         std::to_string(p));
  }
  ComplexMatrix out(da, da);
  for (std::size_t ia = 0; ia < da; ++ia) {
    for (std::size_t ja = 0; ja < da; ++ja) {
      out(ia, ja) = m(ia * db + y, ja * db + y) / p;
    }
  }
  return CollapseResult{DensityMatrix(std::move(out)), p};
}

ComplexMatrix apply_local_unitary(const ComplexMatrix& rho,
                                  const ComplexMatrix& u,
                                  const std::vector<int>& targets,
                                  int n_total) {
  const std::size_t dim = std::size_t{1} << n_total;
  if (rho.rows() != dim || rho.cols() != dim) {
    throw std::invalid_argument("apply_local_unitary: state dimension mismatch");
  }
  const int k = static_cast<int>(targets.size());
  const std::size_t du = std::size_t{1} << k;
  if (u.rows() != du || u.cols() != du) {
    throw std::invalid_argument("apply_local_unitary: operator/target mismatch");
  }
  for (int q : targets) {
    if (q < 0 || q >= n_total) {
      throw std::invalid_argument("apply_local_unitary: target out of range");
    }
  }

  // offsets[a] = the full-index bits contributed by local index a.
  std::vector<std::size_t> offsets(du, 0);
  for (std::size_t a = 0; a < du; ++a) {
    std::size_t bits = 0;
    for (int j = 0; j < k; ++j) {
      if ((a >> (k - 1 - j)) & 1) {
        bits |= std::size_t{1} << (n_total - 1 - targets[j]);
      }
    }
    offsets[a] = bits;
  }
  // Enumerate the non-target bit patterns.
  std::size_t target_mask = 0;
  for (int q : targets) target_mask |= std::size_t{1} << (n_total - 1 - q);
  std::vector<std::size_t> rests;
  rests.reserve(dim >> k);
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & target_mask) == 0) rests.push_back(i);
  }

  std::vector<cdouble> vec(du), tmp(du);
  // Left multiply by U (rows), then right multiply by U^dagger (columns).
  ComplexMatrix mid(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t rest : rests) {
      for (std::size_t a = 0; a < du; ++a) vec[a] = rho(rest | offsets[a], col);
      for (std::size_t a = 0; a < du; ++a) {
        cdouble acc = 0.0;
        for (std::size_t b = 0; b < du; ++b) acc += u(a, b) * vec[b];
        tmp[a] = acc;
      }
      for (std::size_t a = 0; a < du; ++a) mid(rest | offsets[a], col) = tmp[a];
    }
  }
  ComplexMatrix out(dim, dim);
  for (std::size_t row = 0; row < dim; ++row) {
    for (std::size_t rest : rests) {
      for (std::size_t b = 0; b < du; ++b) vec[b] = mid(row, rest | offsets[b]);
      for (std::size_t b = 0; b < du; ++b) {
        cdouble acc = 0.0;
        for (std::size_t a = 0; a < du; ++a) acc += vec[a] * std::conj(u(b, a));
        tmp[b] = acc;
      }
      for (std::size_t b = 0; b < du; ++b) out(row, rest | offsets[b]) = tmp[b];
    }
  }
  return out;
}

}  // namespace twiqrnn
