#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "twiqrnn/complex_matrix.hpp"
#include "twiqrnn/linalg.hpp"

namespace twiqrnn {

// Raised when a computation leaves the valid numerical regime (trace drift,
// non-Hermitian residue, negative eigenvalues past the floor, ...). The CLI
// maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Memory/output split of a qubit register. Memory qubits occupy the most
// significant bit positions: basis index i = i_mem * 2^{n_output} + i_out.
struct QubitPartition {
  int n_memory = 1;
  int n_output = 1;

  QubitPartition() = default;
  QubitPartition(int memory_qubits, int output_qubits);

  int total() const { return n_memory + n_output; }
  std::size_t memory_dim() const { return std::size_t{1} << n_memory; }
  std::size_t output_dim() const { return std::size_t{1} << n_output; }
  std::size_t dim() const { return std::size_t{1} << total(); }
};

enum class Subsystem { memory, output };

// Density matrix over a labeled qubit register. Construction checks the
// matrix is square with power-of-two dimension; the physical invariants
// (Hermiticity, unit trace, positivity) are enforced by validate().
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix matrix,
                         std::vector<int> register_labels = {});

  static DensityMatrix ground_state(int n_qubits);

  const ComplexMatrix& matrix() const { return matrix_; }
  ComplexMatrix& matrix() { return matrix_; }
  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return matrix_.rows(); }
  const std::vector<int>& register_labels() const { return labels_; }

  // Throws NumericalError when any invariant fails:
  //   Hermiticity <= herm_tol, |trace - 1| <= trace_tol,
  //   min eigenvalue >= -psd_tol.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-10,
                double psd_tol = 1e-10) const;

 private:
  ComplexMatrix matrix_;
  int n_qubits_;
  std::vector<int> labels_;
};

// Hermitian observable on the output register with an eigendecomposition
// cache (outcome values and projector basis).
class Observable {
 public:
  explicit Observable(ComplexMatrix matrix);

  // Mean of single-qubit Z over an n-qubit register (diagonal).
  static Observable mean_z(int n_qubits);

  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<double>& eigenvalues() const { return eigen_.values; }
  const ComplexMatrix& eigenvectors() const { return eigen_.vectors; }
  // <0...0| O |0...0>, the value read off an untouched output register.
  double vacuum_expectation() const;

 private:
  ComplexMatrix matrix_;
  HermitianEigen eigen_;
};

// Reduced state on the kept subsystem; trace preserved.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const QubitPartition& part, Subsystem traced);

// Tr[rho (I_mem x obs)]; throws NumericalError when the imaginary residue
// exceeds 1e-10.
double expectation(const DensityMatrix& rho, const Observable& obs,
                   const QubitPartition& part);

// Computational-basis outcome distribution on the output register. Entries
// in [-1e-10, 0) are clamped to zero; the vector sums to 1 within 1e-10.
std::vector<double> born_probabilities(const DensityMatrix& rho,
                                       const QubitPartition& part);

struct CollapseResult {
  DensityMatrix memory;
  double probability;
};

// Post-measurement memory state for a computational-basis outcome on the
// output register. Throws NumericalError when the outcome probability is
// at or below 1e-14.
CollapseResult collapse(const DensityMatrix& rho, int outcome,
                        const QubitPartition& part);

// (U x I) rho (U x I)^dagger with U acting on the listed qubits (most
// significant qubit of U first). Used by the global-register formulation.
ComplexMatrix apply_local_unitary(const ComplexMatrix& rho,
                                  const ComplexMatrix& u,
                                  const std::vector<int>& targets,
                                  int n_total);

}  // namespace twiqrnn
