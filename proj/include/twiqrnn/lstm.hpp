#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace twiqrnn {

// Hidden-size-1 LSTM cell plus a scalar dense readout: 4 gates x 3 weights
// + 2 dense weights = 14 parameters. h_0 = c_0 = 0.
struct LstmParams {
  enum Gate { input = 0, forget = 1, cell = 2, output = 3 };
  double w_x[4] = {0, 0, 0, 0};
  double w_h[4] = {0, 0, 0, 0};
  double b[4] = {0, 0, 0, 0};
  double w_d = 0.0;
  double b_d = 0.0;

  static constexpr int count = 14;
  std::array<double, count> flatten() const;
  static LstmParams from_flat(std::span<const double> v);
  static LstmParams random_init(uint64_t seed);  // uniform [-0.5, 0.5]
};

// z_t = w_d * h_t + b_d along the standard LSTM recursion.
std::vector<double> lstm_forward(std::span<const double> inputs,
                                 const LstmParams& params);

// Mean-squared-error loss over (inputs, targets) and its exact gradient via
// backpropagation through time. Pass grad = nullptr to skip the backward
// pass.
double lstm_loss_and_gradient(std::span<const double> inputs,
                              std::span<const double> targets,
                              const LstmParams& params,
                              std::array<double, LstmParams::count>* grad);

}  // namespace twiqrnn
