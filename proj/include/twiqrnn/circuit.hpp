#pragma once

#include <cstdint>
#include <vector>

#include "twiqrnn/complex_matrix.hpp"
#include "twiqrnn/states.hpp"

namespace twiqrnn {

// Transverse-field + ZZ-coupling Hamiltonian driving the fixed evolution
// part of the step circuit: sum_i a_i X_i + sum_{i>j} J_ij Z_i Z_j.
struct FixedHamiltonian {
  int n_qubits = 0;
  std::vector<double> field;     // a_i, one per qubit
  std::vector<double> coupling;  // J_ij packed as (i, j) for i=1..n-1, j<i
  double delta_t = 0.17;

  ComplexMatrix matrix() const;
  static std::size_t coupling_count(int n_qubits) {
    return static_cast<std::size_t>(n_qubits) * (n_qubits - 1) / 2;
  }
};

// Coefficients i.i.d. uniform on [-1, 1]; fixed for the whole training run.
FixedHamiltonian sample_fixed_hamiltonian(int n_qubits, uint64_t seed,
                                          double delta_t = 0.17);

enum class Axis { x, y, z };

struct CircuitParams {
  std::vector<double> theta;        // one angle per rotation target
  double out_scale = 1.0;           // output coefficient c
  Axis rotation_axis = Axis::y;
  std::vector<int> rotation_targets;  // qubit indices carrying the angles

  // Default layout: one rotation per memory qubit.
  static CircuitParams memory_rotations(const QubitPartition& part,
                                        std::vector<double> theta,
                                        double out_scale = 1.0);
};

struct EncodingSpec {
  int n_output = 1;  // R_y(arccos x) applied to each output qubit
};

// Single-qubit rotation exp(-i angle * pauli_axis / 2).
ComplexMatrix rotation_gate(Axis axis, double angle);

// R_y(arccos x)^{x n_output}. Inputs outside [-1, 1] are clamped (with a
// warning on stderr); NaN throws.
ComplexMatrix build_encoding(double x, const EncodingSpec& spec);

// First column of the encoding unitary, i.e. the image of |0...0>.
std::vector<cdouble> encoding_column0(double x, int n_output);

// Product of single-qubit rotations on the listed targets, identity
// elsewhere; acts on the full register.
ComplexMatrix build_rotation_layer(const CircuitParams& params,
                                   const QubitPartition& part);

struct StepUnitary {
  ComplexMatrix matrix;  // U(x, theta) on the full register
};

// exp(-i H dt) * rotation_layer(theta) * (I_mem x encoding(x)).
StepUnitary assemble_step_unitary(double x, const CircuitParams& params,
                                  const FixedHamiltonian& ham,
                                  const QubitPartition& part);

// Right-multiplies m by a rotation on one qubit: m <- m * R. Used to fold
// the rotation layer into the cached evolution factor without forming the
// layer matrix.
void apply_rotation_right(ComplexMatrix& m, Axis axis, double angle,
                          int target, int n_qubits);

}  // namespace twiqrnn
