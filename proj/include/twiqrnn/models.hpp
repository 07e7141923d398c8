#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "twiqrnn/circuit.hpp"
#include "twiqrnn/rng.hpp"
#include "twiqrnn/states.hpp"

namespace twiqrnn {

// Observable-and-scale pair mapping the measured output register to a real
// prediction z = scale * <obs>.
struct OutputMap {
  Observable observable;
  double scale = 1.0;

  static OutputMap mean_z(int n_output, double scale = 1.0) {
    return OutputMap{Observable::mean_z(n_output), scale};
  }
};

struct QrnnState {
  DensityMatrix memory;
  int step = 0;

  static QrnnState initial(const QubitPartition& part) {
    return QrnnState{DensityMatrix::ground_state(part.n_memory), 0};
  }
};

// Evaluates one recurrence step. The joint state after the step unitary is
// U (rho x |0><0|) U^dagger = V rho V^dagger, where V is the slice of U on
// the columns whose output index is zero, so the engine works with the
// dim x memory_dim slice instead of the full unitary. The x-independent
// factor exp(-iH dt) * rotation_layer is computed once per parameter set,
// and V is cached per distinct input value.
//
// Not thread-safe (per-input cache); build one engine per thread.
class StepEngine {
 public:
  StepEngine(const CircuitParams& params, const FixedHamiltonian& ham,
             const QubitPartition& part, Observable obs);
  // Reuses a previously computed evolution factor exp(-iH dt).
  StepEngine(const CircuitParams& params, ComplexMatrix evolution,
             const QubitPartition& part, Observable obs);

  struct Reduced {
    ComplexMatrix next_memory;  // Tr_output of the joint
    double zexp;                // <obs> on the joint (unscaled)
    std::vector<double> born;   // outcome distribution of the joint
  };

  // One recurrence step from a memory state (the input product with |0><0|
  // is implicit).
  Reduced apply(const ComplexMatrix& memory, double x) const;

  // Full joint density U (memory x |0><0|) U^dagger.
  ComplexMatrix joint(const ComplexMatrix& memory, double x) const;

  // Memory block after observing `outcome` with probability `prob`.
  ComplexMatrix collapse_outcome(const ComplexMatrix& memory, double x,
                                 int outcome, double prob) const;

  // Full U(x, theta); used by invariant checks.
  ComplexMatrix step_unitary(double x) const;

  const QubitPartition& partition() const { return part_; }
  const Observable& observable() const { return obs_; }
  const ComplexMatrix& evolution_unitary() const { return evolution_; }
  // <obs> read from an untouched output register (the skipped-step value).
  double vacuum_zexp() const { return vacuum_zexp_; }

 private:
  const ComplexMatrix& v_slice(double x) const;

  QubitPartition part_;
  Observable obs_;
  ComplexMatrix evolution_;  // exp(-i H dt), cached per parameter set
  ComplexMatrix prefactor_;  // evolution * rotation_layer
  std::vector<double> obs_diag_;  // diagonal of I x obs (empty if non-diagonal)
  double vacuum_zexp_ = 1.0;
  mutable std::unordered_map<uint64_t, ComplexMatrix> v_cache_;
};

struct QrnnStepResult {
  DensityMatrix joint;
  QrnnState next;
  double zexp;  // unscaled observable expectation
};

QrnnStepResult qrnn_step(const QrnnState& state, double x,
                         const CircuitParams& params,
                         const FixedHamiltonian& ham,
                         const QubitPartition& part, const Observable& obs);

QrnnStepResult twi_step_exact(const QrnnState& state, double x, double alpha,
                              const CircuitParams& params,
                              const FixedHamiltonian& ham,
                              const QubitPartition& part,
                              const Observable& obs);

std::vector<double> qrnn_forward(std::span<const double> inputs,
                                 const CircuitParams& params,
                                 const FixedHamiltonian& ham,
                                 const QubitPartition& part,
                                 const OutputMap& map);

std::vector<double> twi_forward_exact(std::span<const double> inputs,
                                      std::span<const double> alphas,
                                      const CircuitParams& params,
                                      const FixedHamiltonian& ham,
                                      const QubitPartition& part,
                                      const OutputMap& map);

std::vector<double> twi_forward_sampled(std::span<const double> inputs,
                                        std::span<const uint8_t> bits,
                                        const CircuitParams& params,
                                        const FixedHamiltonian& ham,
                                        const QubitPartition& part,
                                        const OutputMap& map);

// Per-step outcome distributions from the trace-averaged recursion; row t
// is the conditional law of y_t given x_{1:t}.
std::vector<std::vector<double>> sqrnn_marginals(std::span<const double> inputs,
                                                 const CircuitParams& params,
                                                 const FixedHamiltonian& ham,
                                                 const QubitPartition& part);

// Same, with the unitary branch gated per step by alphas.
std::vector<std::vector<double>> twi_sqrnn_marginals(
    std::span<const double> inputs, std::span<const double> alphas,
    const CircuitParams& params, const FixedHamiltonian& ham,
    const QubitPartition& part);

// Symbol marginals along one gate realization (bits fixed).
std::vector<std::vector<double>> twi_sqrnn_marginals_sampled(
    std::span<const double> inputs, std::span<const uint8_t> bits,
    const CircuitParams& params, const FixedHamiltonian& ham,
    const QubitPartition& part);

// One stochastic run: sample an outcome per step, collapse the memory.
std::vector<int> sqrnn_sample(std::span<const double> inputs,
                              const CircuitParams& params,
                              const FixedHamiltonian& ham,
                              const QubitPartition& part, Rng& rng);

std::vector<int> twi_sqrnn_sample(std::span<const double> inputs,
                                  std::span<const double> alphas,
                                  const CircuitParams& params,
                                  const FixedHamiltonian& ham,
                                  const QubitPartition& part, Rng& rng);

// Global-register formulation: one register holding the memory plus one
// output block per step, all expectations read at the end. Statistically
// equivalent to qrnn_forward; serves as its correctness oracle.
std::vector<double> dissipative_forward(std::span<const double> inputs,
                                        const CircuitParams& params,
                                        const FixedHamiltonian& ham,
                                        const QubitPartition& part,
                                        const OutputMap& map);

// Outcome marginals of the t-th output block in the global-register
// formulation; cross-checks sqrnn_marginals.
std::vector<std::vector<double>> dissipative_output_marginals(
    std::span<const double> inputs, const CircuitParams& params,
    const FixedHamiltonian& ham, const QubitPartition& part);

}  // namespace twiqrnn
