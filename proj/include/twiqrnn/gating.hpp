#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "twiqrnn/rng.hpp"

namespace twiqrnn {

// Scalar-state gate network: h_t = tanh(wh_x x_t + wh_h h_{t-1} + b_h),
// phi_t = w_x x_t + w_h h_t + b_phi, alpha_t = sigmoid(phi_t).
struct GatingParams {
  double w_x = 0.0;
  double w_h = 0.0;
  double wh_x = 0.0;
  double wh_h = 0.0;
  double b_phi = 0.0;
  double b_h = 0.0;
  double h0 = 0.0;  // initial hidden state, not trained

  static constexpr int trainable_count = 6;
  std::vector<double> flatten() const;
  static GatingParams from_flat(std::span<const double> v, double h0 = 0.0);
};

struct GatingGradient {
  double w_x = 0.0, w_h = 0.0, wh_x = 0.0, wh_h = 0.0;
  double b_phi = 0.0, b_h = 0.0;

  std::vector<double> flatten() const;
  GatingGradient& operator+=(const GatingGradient& o);
  GatingGradient& operator*=(double s);
};

struct GateTrace {
  std::vector<double> h;
  std::vector<double> phi;
  std::vector<double> alpha;
};

double sigmoid(double a);

// Runs the two recursions over a scalar input sequence; causal by
// construction. Throws NumericalError on non-finite intermediates.
GateTrace gating_forward(std::span<const double> inputs,
                         const GatingParams& params);

enum class WarpKind { identity, linear, sqrt_warp };

// Time-warping description c(t): identity c(t)=t, linear c(t)=a*t with 1/a
// a positive integer, or square root c(t)=sqrt(t).
struct WarpSpec {
  WarpKind kind = WarpKind::identity;
  double a = 1.0;

  static WarpSpec identity();
  static WarpSpec linear(double a);
  static WarpSpec sqrt();

  double warp(double t) const;        // c(t)
  double derivative(double t) const;  // dc/dt
};

enum class AlphaConvention { derivative, complement };

// Gate schedule for a known warp: alpha_t = clamp(dc/dt at step t, 1e-6, 1).
// The complement convention uses 1 - dc/dt instead.
std::vector<double> known_warp_alphas(
    const WarpSpec& warp, int steps,
    AlphaConvention convention = AlphaConvention::derivative);

struct SampledGates {
  std::vector<uint8_t> bits;
  double log_q = 0.0;
};

// Independent Bernoulli draws b_t ~ Bern(alpha_t) plus the log-likelihood of
// the drawn pattern.
SampledGates sample_gates(std::span<const double> alphas, Rng& rng);

double gate_log_likelihood(std::span<const uint8_t> bits,
                           std::span<const double> alphas);

// d log q(bits | x, W) / dW by backpropagation through the two scalar
// recursions.
GatingGradient gate_logq_gradient(std::span<const double> inputs,
                                  std::span<const uint8_t> bits,
                                  const GatingParams& params);

struct ScoreGradientOptions {
  int n_samples = 16;
  bool use_baseline = true;
};

// Monte-Carlo score-function estimate of d E[loss] / dW: averages
// (loss_i - mean loss) * d log q_i / dW over sampled gate patterns.
GatingGradient score_function_gradient(
    std::span<const double> inputs,
    const std::function<double(const std::vector<uint8_t>&)>& loss_of_bits,
    const GatingParams& params, const ScoreGradientOptions& options, Rng& rng);

// Exact expectation of the same estimator over all 2^T gate patterns;
// usable only for short sequences.
GatingGradient score_function_gradient_exact(
    std::span<const double> inputs,
    const std::function<double(const std::vector<uint8_t>&)>& loss_of_bits,
    const GatingParams& params);

// Expected loss sum_b q(b) loss(b), enumerated over all 2^T patterns.
double enumerated_expected_loss(
    std::span<const double> inputs,
    const std::function<double(const std::vector<uint8_t>&)>& loss_of_bits,
    const GatingParams& params);

}  // namespace twiqrnn
