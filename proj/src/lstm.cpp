#include "twiqrnn/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "twiqrnn/rng.hpp"

namespace twiqrnn {

namespace {

double sigm(double a) { return 1.0 / (1.0 + std::exp(-a)); }

struct StepRecord {
  double gate[4];  // i, f, g, o (post-activation)
  double c;
  double tanh_c;
  double h;
};

std::vector<StepRecord> run_cell(std::span<const double> inputs,
                                 const LstmParams& p) {
  std::vector<StepRecord> rec(inputs.size());
  double h_prev = 0.0;
  double c_prev = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double x = inputs[t];
    double pre[4];
    for (int k = 0; k < 4; ++k) pre[k] = p.w_x[k] * x + p.w_h[k] * h_prev + p.b[k];
    StepRecord& r = rec[t];
    r.gate[LstmParams::input] = sigm(pre[LstmParams::input]);
    r.gate[LstmParams::forget] = sigm(pre[LstmParams::forget]);
    r.gate[LstmParams::cell] = std::tanh(pre[LstmParams::cell]);
    r.gate[LstmParams::output] = sigm(pre[LstmParams::output]);
    r.c = r.gate[LstmParams::forget] * c_prev +
          r.gate[LstmParams::input] * r.gate[LstmParams::cell];
    r.tanh_c = std::tanh(r.c);
    r.h = r.gate[LstmParams::output] * r.tanh_c;
    h_prev = r.h;
    c_prev = r.c;
  }
  return rec;
}

}  // namespace

std::array<double, LstmParams::count> LstmParams::flatten() const {
  return {w_x[0], w_x[1], w_x[2], w_x[3], w_h[0], w_h[1], w_h[2], w_h[3],
          b[0],   b[1],   b[2],   b[3],   w_d,    b_d};
}

LstmParams LstmParams::from_flat(std::span<const double> v) {
  if (v.size() != count) {
    throw std::invalid_argument("LstmParams::from_flat: need 14 values");
  }
  LstmParams p;
  for (int k = 0; k < 4; ++k) {
    p.w_x[k] = v[k];
    p.w_h[k] = v[4 + k];
    p.b[k] = v[8 + k];
  }
  p.w_d = v[12];
  p.b_d = v[13];
  return p;
}

LstmParams LstmParams::random_init(uint64_t seed) {
  Rng rng(seed);
  std::array<double, count> flat;
  for (auto& v : flat) v = rng.uniform(-0.5, 0.5);
  return from_flat(flat);
}

std::vector<double> lstm_forward(std::span<const double> inputs,
                                 const LstmParams& p) {
  const std::vector<StepRecord> rec = run_cell(inputs, p);
  std::vector<double> z;
  z.reserve(inputs.size());
  for (const auto& r : rec) z.push_back(p.w_d * r.h + p.b_d);
  return z;
}

double lstm_loss_and_gradient(std::span<const double> inputs,
                              std::span<const double> targets,
                              const LstmParams& p,
                              std::array<double, LstmParams::count>* grad) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw std::invalid_argument("lstm_loss_and_gradient: input/target mismatch");
  }
  const std::vector<StepRecord> rec = run_cell(inputs, p);
  const double inv_t = 1.0 / static_cast<double>(inputs.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double z = p.w_d * rec[t].h + p.b_d;
    const double e = targets[t] - z;
    loss += e * e;
  }
  loss *= inv_t;
  if (grad == nullptr) return loss;

  grad->fill(0.0);
  double dh_carry = 0.0;
  double dc_carry = 0.0;
  for (std::size_t ti = inputs.size(); ti-- > 0;) {
    const StepRecord& r = rec[ti];
    const double h_prev = ti == 0 ? 0.0 : rec[ti - 1].h;
    const double c_prev = ti == 0 ? 0.0 : rec[ti - 1].c;
    const double z = p.w_d * r.h + p.b_d;
    const double dz = 2.0 * (z - targets[ti]) * inv_t;
    (*grad)[12] += dz * r.h;  // w_d
    (*grad)[13] += dz;        // b_d
    double dh = dz * p.w_d + dh_carry;
    const double dout = dh * r.tanh_c;
    double dc = dh * r.gate[LstmParams::output] * (1.0 - r.tanh_c * r.tanh_c) +
                dc_carry;
    const double din = dc * r.gate[LstmParams::cell];
    const double dforget = dc * c_prev;
    const double dcell = dc * r.gate[LstmParams::input];
    dc_carry = dc * r.gate[LstmParams::forget];

    double dpre[4];
    dpre[LstmParams::input] =
        din * r.gate[LstmParams::input] * (1.0 - r.gate[LstmParams::input]);
    dpre[LstmParams::forget] = dforget * r.gate[LstmParams::forget] *
                               (1.0 - r.gate[LstmParams::forget]);
    dpre[LstmParams::cell] =
        dcell * (1.0 - r.gate[LstmParams::cell] * r.gate[LstmParams::cell]);
    dpre[LstmParams::output] =
        dout * r.gate[LstmParams::output] * (1.0 - r.gate[LstmParams::output]);

    dh_carry = 0.0;
    for (int k = 0; k < 4; ++k) {
      (*grad)[k] += dpre[k] * inputs[ti];
      (*grad)[4 + k] += dpre[k] * h_prev;
      (*grad)[8 + k] += dpre[k];
      dh_carry += dpre[k] * p.w_h[k];
    }
  }
  return loss;
}

}  // namespace twiqrnn
