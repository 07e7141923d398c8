#include "twiqrnn/gating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "twiqrnn/states.hpp"

namespace twiqrnn {

namespace {

constexpr double kAlphaFloor = 1e-6;

}  // namespace

std::vector<double> GatingParams::flatten() const {
  return {w_x, w_h, wh_x, wh_h, b_phi, b_h};
}

GatingParams GatingParams::from_flat(std::span<const double> v, double h0) {
  if (v.size() != trainable_count) {
    throw std::invalid_argument("GatingParams::from_flat: need 6 values");
  }
  GatingParams p;
  p.w_x = v[0];
  p.w_h = v[1];
  p.wh_x = v[2];
  p.wh_h = v[3];
  p.b_phi = v[4];
  p.b_h = v[5];
  p.h0 = h0;
  return p;
}

std::vector<double> GatingGradient::flatten() const {
  return {w_x, w_h, wh_x, wh_h, b_phi, b_h};
}

GatingGradient& GatingGradient::operator+=(const GatingGradient& o) {
  w_x += o.w_x;
  w_h += o.w_h;
  wh_x += o.wh_x;
  wh_h += o.wh_h;
  b_phi += o.b_phi;
  b_h += o.b_h;
  return *this;
}

GatingGradient& GatingGradient::operator*=(double s) {
  w_x *= s;
  w_h *= s;
  wh_x *= s;
  wh_h *= s;
  b_phi *= s;
  b_h *= s;
  return *this;
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

GateTrace gating_forward(std::span<const double> inputs,
                         const GatingParams& p) {
  GateTrace trace;
  const std::size_t n = inputs.size();
  trace.h.resize(n);
  trace.phi.resize(n);
  trace.alpha.resize(n);
  double h_prev = p.h0;
  for (std::size_t t = 0; t < n; ++t) {
    const double h = std::tanh(p.wh_x * inputs[t] + p.wh_h * h_prev + p.b_h);
    const double phi = p.w_x * inputs[t] + p.w_h * h + p.b_phi;
    if (!std::isfinite(h) || !std::isfinite(phi)) {
      throw NumericalError("gating_forward: non-finite intermediate at step " +
                           std::to_string(t + 1));
    }
    trace.h[t] = h;
    trace.phi[t] = phi;
    trace.alpha[t] = sigmoid(phi);
    h_prev = h;
  }
  return trace;
}

WarpSpec WarpSpec::identity() { return WarpSpec{WarpKind::identity, 1.0}; }

WarpSpec WarpSpec::linear(double a) {
  if (!(a > 0.0) || a > 1.0) {
    throw std::invalid_argument("WarpSpec::linear: need 0 < a <= 1");
  }
  const double inv = 1.0 / a;
  if (std::abs(inv - std::round(inv)) > 1e-9) {
    throw std::invalid_argument("WarpSpec::linear: 1/a must be an integer");
  }
  return WarpSpec{WarpKind::linear, a};
}

WarpSpec WarpSpec::sqrt() { return WarpSpec{WarpKind::sqrt_warp, 1.0}; }

double WarpSpec::warp(double t) const {
  switch (kind) {
    case WarpKind::identity:
      return t;
    case WarpKind::linear:
      return a * t;
    case WarpKind::sqrt_warp:
      return std::sqrt(t);
  }
  throw std::invalid_argument("WarpSpec::warp: bad kind");
}

double WarpSpec::derivative(double t) const {
  switch (kind) {
    case WarpKind::identity:
      return 1.0;
    case WarpKind::linear:
      return a;
    case WarpKind::sqrt_warp:
      return t > 0.0 ? 0.5 / std::sqrt(t) :
                       std::numeric_limits<double>::infinity();
  }
  throw std::invalid_argument("WarpSpec::derivative: bad kind");
}

std::vector<double> known_warp_alphas(const WarpSpec& warp, int steps,
                                      AlphaConvention convention) {
  std::vector<double> alphas(steps);
  for (int t = 1; t <= steps; ++t) {
    double d = warp.derivative(static_cast<double>(t));
    if (convention == AlphaConvention::complement) d = 1.0 - d;
    alphas[t - 1] = std::clamp(d, kAlphaFloor, 1.0);
  }
  return alphas;
}

SampledGates sample_gates(std::span<const double> alphas, Rng& rng) {
  SampledGates out;
  out.bits.resize(alphas.size());
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    const double a = alphas[t];
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("sample_gates: alphas must lie in (0, 1)");
    }
    out.bits[t] = rng.bernoulli(a) ? 1 : 0;
  }
  out.log_q = gate_log_likelihood(out.bits, alphas);
  return out;
}

double gate_log_likelihood(std::span<const uint8_t> bits,
                           std::span<const double> alphas) {
  if (bits.size() != alphas.size()) {
    throw std::invalid_argument("gate_log_likelihood: length mismatch");
  }
  double log_q = 0.0;
  for (std::size_t t = 0; t < bits.size(); ++t) {
    log_q += bits[t] ? std::log(alphas[t]) : std::log1p(-alphas[t]);
  }
  return log_q;
}

GatingGradient gate_logq_gradient(std::span<const double> inputs,
                                  std::span<const uint8_t> bits,
                                  const GatingParams& p) {
  if (inputs.size() != bits.size()) {
    throw std::invalid_argument("gate_logq_gradient: length mismatch");
  }
  const GateTrace trace = gating_forward(inputs, p);
  const std::size_t n = inputs.size();
  GatingGradient g;
  // d log q / d phi_t = b_t - alpha_t; h_t feeds both phi_t and h_{t+1}.
  double dh_next = 0.0;  // d log q / d h_{t+1} carried backwards
  for (std::size_t ti = n; ti-- > 0;) {
    const double dphi = static_cast<double>(bits[ti]) - trace.alpha[ti];
    g.w_x += dphi * inputs[ti];
    g.w_h += dphi * trace.h[ti];
    g.b_phi += dphi;
    double dh = dphi * p.w_h;
    if (ti + 1 < n) {
      dh += dh_next * (1.0 - trace.h[ti + 1] * trace.h[ti + 1]) * p.wh_h;
    }
    const double dpre = dh * (1.0 - trace.h[ti] * trace.h[ti]);
    const double h_prev = ti == 0 ? p.h0 : trace.h[ti - 1];
    g.wh_x += dpre * inputs[ti];
    g.wh_h += dpre * h_prev;
    g.b_h += dpre;
    dh_next = dh;
  }
  return g;
}

GatingGradient score_function_gradient(
    std::span<const double> inputs,
    const std::function<double(const std::vector<uint8_t>&)>& loss_of_bits,
    const GatingParams& params, const ScoreGradientOptions& options, Rng& rng) {
  if (options.n_samples < 2) {
    throw std::invalid_argument("score_function_gradient: need >= 2 samples");
  }
  const GateTrace trace = gating_forward(inputs, params);
  std::vector<std::vector<uint8_t>> patterns(options.n_samples);
  std::vector<double> losses(options.n_samples);
  for (int i = 0; i < options.n_samples; ++i) {
    patterns[i] = sample_gates(trace.alpha, rng).bits;
    losses[i] = loss_of_bits(patterns[i]);
  }
  double mean_loss = 0.0;
  for (double l : losses) mean_loss += l;
  mean_loss /= options.n_samples;
  const double baseline = options.use_baseline ? mean_loss : 0.0;

  bool all_equal = true;
  for (double l : losses) {
    if (l != losses.front()) {
      all_equal = false;
      break;
    }
  }
  GatingGradient g;
  if (options.use_baseline && all_equal) return g;  // baseline cancels exactly

  for (int i = 0; i < options.n_samples; ++i) {
    GatingGradient gi = gate_logq_gradient(inputs, patterns[i], params);
    gi *= (losses[i] - baseline) / options.n_samples;
    g += gi;
  }
  return g;
}

GatingGradient score_function_gradient_exact(
    std::span<const double> inputs,
    const std::function<double(const std::vector<uint8_t>&)>& loss_of_bits,
    const GatingParams& params) {
  const std::size_t n = inputs.size();
  if (n > 20) {
    throw std::invalid_argument("score_function_gradient_exact: sequence too long");
  }
  const GateTrace trace = gating_forward(inputs, params);
  GatingGradient g;
  std::vector<uint8_t> bits(n);
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << n); ++pattern) {
    double q = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      bits[t] = (pattern >> t) & 1;
      q *= bits[t] ? trace.alpha[t] : 1.0 - trace.alpha[t];
    }
    GatingGradient gi = gate_logq_gradient(inputs, bits, params);
    gi *= q * loss_of_bits(bits);
    g += gi;
  }
  return g;
}

double enumerated_expected_loss(
    std::span<const double> inputs,
    const std::function<double(const std::vector<uint8_t>&)>& loss_of_bits,
    const GatingParams& params) {
  const std::size_t n = inputs.size();
  if (n > 20) {
    throw std::invalid_argument("enumerated_expected_loss: sequence too long");
  }
  const GateTrace trace = gating_forward(inputs, params);
  double expected = 0.0;
  std::vector<uint8_t> bits(n);
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << n); ++pattern) {
    double q = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      bits[t] = (pattern >> t) & 1;
      q *= bits[t] ? trace.alpha[t] : 1.0 - trace.alpha[t];
    }
    expected += q * loss_of_bits(bits);
  }
  return expected;
}

}  // namespace twiqrnn
