#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "twiqrnn/gating.hpp"
#include "twiqrnn/states.hpp"

namespace twiqrnn {

// A generated input sequence with its continuous-time sampling grid.
struct Sequence {
  std::vector<double> samples;  // x_1..x_T
  std::vector<double> times;    // continuous time per step
  double x0 = 0.0;              // source value at continuous time 0
  std::string source;           // "cosine" | "spin"
  std::string warp = "identity";
};

// x_t = (cos(pi t / 5) + 1) / 2 sampled at t = 1..T; 10-periodic.
Sequence cosine_sequence(int steps);

// Sample-and-hold stretch: warped x_t = source(ceil(t * a)), so each
// underlying sample is held for 1/a consecutive steps. Requires 1/a integer.
Sequence linear_warp_hold(const std::function<double(int)>& source, double a,
                          int steps, double x0, const std::string& source_name);
Sequence linear_warp_hold(const Sequence& base, double a);

// Three-spin chain with transverse dissipation driving the quantum-dynamics
// task. All constants fixed.
struct LindbladSpec {
  int n_qubits = 3;
  double field = 2.0 * 3.14159265358979323846;      // h_k
  double coupling = 0.1 * 3.14159265358979323846;   // J_k
  double dissipation = 0.014142135623730951;        // sqrt(0.0002)
  double sample_dt = 1.0 / 20.0;                    // base grid spacing
  double rk_step = 1e-3;                            // internal RK4 step

  ComplexMatrix hamiltonian() const;
  std::vector<ComplexMatrix> jump_operators() const;  // c (X_k + Y_k)
  DensityMatrix initial_state() const;                // |+><+|^{x3}
};

// Classic fixed-step RK4 on d sigma/dt = -i[H, sigma] + dissipator, emitting
// the state at each grid time (grid times reached by a final partial step).
// Throws NumericalError when the trace drifts by more than 1e-6.
std::vector<DensityMatrix> lindblad_rk4(const LindbladSpec& spec,
                                        const std::vector<double>& t_grid);

// <Z_1> of the Lindblad solution sampled on the (possibly warped) grid:
// identity warp at k*dt, sqrt warp at sqrt(k*dt).
Sequence spin_observable_sequence(const WarpSpec& warp, int steps,
                                  const LindbladSpec& spec);

struct Discretized {
  std::vector<int> symbols;          // nearest-level index per sample
  std::vector<double> level_values;  // level value per sample
  std::vector<double> levels;        // the level grid itself
};

// Nearest-level quantization onto n_levels equally spaced values in
// [lo, hi]; ties break toward the lower level, out-of-range clamps.
Discretized discretize(std::span<const double> x, int n_levels = 8,
                       double lo = -1.0, double hi = 1.0);

enum class TaskKind { remember, predict };

// remember: target_t = x_{t-1} with the supplied x0 for t = 1.
// predict:  target_t = x_{t+1}, one entry shorter than the input.
std::vector<double> make_targets(TaskKind task, std::span<const double> x,
                                 double x0);

}  // namespace twiqrnn
