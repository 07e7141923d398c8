#pragma once

#include <functional>
#include <vector>

namespace twiqrnn {

struct NelderMeadConfig {
  int max_evals = 400;
  double initial_step = 0.25;
  double f_tol = 1e-10;        // simplex spread termination
  std::vector<double> lower;   // optional box constraints (empty = none)
  std::vector<double> upper;
};

struct MinimizeResult {
  std::vector<double> x;  // best point seen
  double f = 0.0;         // best value seen
  int evals = 0;
};

// Nelder-Mead simplex search with the dimension-adaptive expansion,
// contraction and shrink coefficients, plus optional box constraints
// enforced by clamping candidate points. The returned record is the best
// evaluated point, so it can never be worse than any iterate. Throws
// NumericalError when the objective produces NaN.
MinimizeResult derivative_free_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const NelderMeadConfig& cfg);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// One bias-corrected Adam update, in place.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& cfg);

}  // namespace twiqrnn
