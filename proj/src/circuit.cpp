#include "twiqrnn/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "twiqrnn/linalg.hpp"
#include "twiqrnn/rng.hpp"

namespace twiqrnn {

ComplexMatrix FixedHamiltonian::matrix() const {
  const std::size_t dim = std::size_t{1} << n_qubits;
  ComplexMatrix h(dim, dim);
  for (int i = 0; i < n_qubits; ++i) {
    const std::size_t bit = std::size_t{1} << (n_qubits - 1 - i);
    for (std::size_t b = 0; b < dim; ++b) h(b ^ bit, b) += field[i];
  }
  std::size_t idx = 0;
  for (int i = 1; i < n_qubits; ++i) {
    for (int j = 0; j < i; ++j, ++idx) {
      const std::size_t bi = std::size_t{1} << (n_qubits - 1 - i);
      const std::size_t bj = std::size_t{1} << (n_qubits - 1 - j);
      for (std::size_t b = 0; b < dim; ++b) {
        const double zi = (b & bi) ? -1.0 : 1.0;
        const double zj = (b & bj) ? -1.0 : 1.0;
        h(b, b) += coupling[idx] * zi * zj;
      }
    }
  }
  return h;
}

FixedHamiltonian sample_fixed_hamiltonian(int n_qubits, uint64_t seed,
                                          double delta_t) {
  if (n_qubits < 2) {
    throw std::invalid_argument("sample_fixed_hamiltonian: need >= 2 qubits");
  }
  FixedHamiltonian ham;
  ham.n_qubits = n_qubits;
  ham.delta_t = delta_t;
  Rng rng(seed);
  ham.field.resize(n_qubits);
  for (auto& a : ham.field) a = rng.uniform(-1.0, 1.0);
  ham.coupling.resize(FixedHamiltonian::coupling_count(n_qubits));
  for (auto& j : ham.coupling) j = rng.uniform(-1.0, 1.0);
  return ham;
}

CircuitParams CircuitParams::memory_rotations(const QubitPartition& part,
                                              std::vector<double> theta,
                                              double out_scale) {
  CircuitParams p;
  if (static_cast<int>(theta.size()) != part.n_memory) {
    throw std::invalid_argument("memory_rotations: need one angle per memory qubit");
  }
  p.theta = std::move(theta);
  p.out_scale = out_scale;
  for (int q = 0; q < part.n_memory; ++q) p.rotation_targets.push_back(q);
  return p;
}

ComplexMatrix rotation_gate(Axis axis, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  switch (axis) {
    case Axis::x:
      return ComplexMatrix::from_rows(
          {{c, cdouble(0.0, -s)}, {cdouble(0.0, -s), c}});
    case Axis::y:
      return ComplexMatrix::from_rows({{c, -s}, {s, c}});
    case Axis::z:
      return ComplexMatrix::from_rows(
          {{cdouble(c, -s), 0.0}, {0.0, cdouble(c, s)}});
  }
  throw std::invalid_argument("rotation_gate: bad axis");
}

ComplexMatrix build_encoding(double x, const EncodingSpec& spec) {
  if (std::isnan(x)) throw std::invalid_argument("build_encoding: NaN input");
  if (x < -1.0 || x > 1.0) {
    std::cerr << "warning: encoding input " << x << " clamped to [-1, 1]\n";
    x = std::clamp(x, -1.0, 1.0);
  }
  const ComplexMatrix gate = rotation_gate(Axis::y, std::acos(x));
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (int q = 0; q < spec.n_output; ++q) out = kron(out, gate);
  return out;
}

std::vector<cdouble> encoding_column0(double x, int n_output) {
  if (std::isnan(x)) throw std::invalid_argument("encoding_column0: NaN input");
  x = std::clamp(x, -1.0, 1.0);
  const double eta = std::acos(x);
  const cdouble amp0 = std::cos(eta / 2.0);
  const cdouble amp1 = std::sin(eta / 2.0);
  std::vector<cdouble> col{1.0};
  for (int q = 0; q < n_output; ++q) {
    std::vector<cdouble> next(col.size() * 2);
    for (std::size_t i = 0; i < col.size(); ++i) {
      next[2 * i] = col[i] * amp0;
      next[2 * i + 1] = col[i] * amp1;
    }
    col = std::move(next);
  }
  return col;
}

ComplexMatrix build_rotation_layer(const CircuitParams& params,
                                   const QubitPartition& part) {
  if (params.theta.size() != params.rotation_targets.size()) {
    throw std::invalid_argument("build_rotation_layer: angle/target count mismatch");
  }
  const int n = part.total();
  std::vector<const ComplexMatrix*> slot(n, nullptr);
  std::vector<ComplexMatrix> gates;
  gates.reserve(params.theta.size());
  for (std::size_t k = 0; k < params.theta.size(); ++k) {
    const int q = params.rotation_targets[k];
    if (q < 0 || q >= n) {
      throw std::invalid_argument("build_rotation_layer: target out of range");
    }
    if (slot[q] != nullptr) {
      throw std::invalid_argument("build_rotation_layer: duplicate target");
    }
    gates.push_back(rotation_gate(params.rotation_axis, params.theta[k]));
    slot[q] = &gates.back();
  }
  const ComplexMatrix id2 = ComplexMatrix::identity(2);
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (int q = 0; q < n; ++q) out = kron(out, slot[q] ? *slot[q] : id2);
  return out;
}

void apply_rotation_right(ComplexMatrix& m, Axis axis, double angle,
                          int target, int n_qubits) {
  const ComplexMatrix r = rotation_gate(axis, angle);
  const std::size_t dim = m.cols();
  const std::size_t bit = std::size_t{1} << (n_qubits - 1 - target);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j0 = 0; j0 < dim; ++j0) {
      if (j0 & bit) continue;
      const std::size_t j1 = j0 | bit;
      const cdouble a = m(i, j0);
      const cdouble b = m(i, j1);
      m(i, j0) = a * r(0, 0) + b * r(1, 0);
      m(i, j1) = a * r(0, 1) + b * r(1, 1);
    }
  }
}

StepUnitary assemble_step_unitary(double x, const CircuitParams& params,
                                  const FixedHamiltonian& ham,
                                  const QubitPartition& part) {
  if (ham.n_qubits != part.total()) {
    throw std::invalid_argument("assemble_step_unitary: register size mismatch");
  }
  const ComplexMatrix evolution = hermitian_expm(ham.matrix(), ham.delta_t);
  const ComplexMatrix rotation = build_rotation_layer(params, part);
  const ComplexMatrix encoding =
      kron(ComplexMatrix::identity(part.memory_dim()),
           build_encoding(x, EncodingSpec{part.n_output}));
  return StepUnitary{evolution * rotation * encoding};
}

}  // namespace twiqrnn
