#include "twiqrnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "twiqrnn/models.hpp"
#include "twiqrnn/rng.hpp"
#include "twiqrnn/states.hpp"

namespace twiqrnn {

double quadratic_loss(std::span<const double> z, std::span<const double> zbar) {
  if (z.size() != zbar.size() || z.empty()) {
    throw std::invalid_argument("quadratic_loss: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double e = zbar[t] - z[t];
    acc += e * e;
  }
  return acc / static_cast<double>(z.size());
}

double cross_entropy_loss(const std::vector<std::vector<double>>& marginals,
                          std::span<const int> ybar, int* floored_count) {
  if (marginals.size() != ybar.size() || marginals.empty()) {
    throw std::invalid_argument("cross_entropy_loss: length mismatch");
  }
  constexpr double kFloor = 1e-12;
  int floored = 0;
  double acc = 0.0;
  for (std::size_t t = 0; t < marginals.size(); ++t) {
    const auto& row = marginals[t];
    if (ybar[t] < 0 || static_cast<std::size_t>(ybar[t]) >= row.size()) {
      throw std::invalid_argument("cross_entropy_loss: symbol out of range");
    }
    double p = row[ybar[t]];
    if (p < kFloor) {
      p = kFloor;
      ++floored;
    }
    acc -= std::log(p);
  }
  if (floored_count != nullptr) *floored_count = floored;
  return acc / static_cast<double>(marginals.size());
}

std::vector<double> cumulative_loss_curve(std::span<const double> z,
                                          std::span<const double> zbar,
                                          int start) {
  if (z.size() != zbar.size()) {
    throw std::invalid_argument("cumulative_loss_curve: length mismatch");
  }
  if (start < 1 || static_cast<std::size_t>(start) > z.size()) {
    throw std::invalid_argument("cumulative_loss_curve: start out of range");
  }
  std::vector<double> curve;
  curve.reserve(z.size() - start + 1);
  double acc = 0.0;
  for (std::size_t t = start - 1; t < z.size(); ++t) {
    const double e = zbar[t] - z[t];
    acc += e * e;
    curve.push_back(acc);
  }
  return curve;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::qrnn: return "qrnn";
    case ModelKind::twi_qrnn: return "twi-qrnn";
    case ModelKind::sqrnn: return "sqrnn";
    case ModelKind::twi_sqrnn: return "twi-sqrnn";
    case ModelKind::lstm: return "lstm";
  }
  return "?";
}

std::string to_string(GateMode mode) {
  switch (mode) {
    case GateMode::none: return "none";
    case GateMode::known: return "known";
    case GateMode::learnt: return "learnt";
  }
  return "?";
}

uint64_t derive_seed(uint64_t base, uint64_t salt) {
  return Rng(base).fork(salt).next_u64();
}

namespace {

constexpr uint64_t kHamiltonianStream = 1;
constexpr uint64_t kCircuitInitStream = 2;
constexpr uint64_t kGateInitStream = 3;
constexpr uint64_t kScoreStream = 4;
constexpr uint64_t kEvalStream = 5;
constexpr uint64_t kShotStream = 6;

bool is_twi(ModelKind m) {
  return m == ModelKind::twi_qrnn || m == ModelKind::twi_sqrnn;
}

bool is_stochastic(ModelKind m) {
  return m == ModelKind::sqrnn || m == ModelKind::twi_sqrnn;
}

// Builds step engines for a fixed trial Hamiltonian and evaluates the
// sequence models over a parameter vector v = [theta..., c?].
class CircuitEvaluator {
 public:
  CircuitEvaluator(const TrainerConfig& cfg, uint64_t ham_seed)
      : cfg_(cfg),
        part_(cfg.n_memory, cfg.n_output),
        obs_(Observable::mean_z(cfg.n_output)),
        ham_(sample_fixed_hamiltonian(part_.total(), ham_seed, cfg.delta_t)),
        evolution_(hermitian_expm(ham_.matrix(), ham_.delta_t)) {}

  int n_angles() const {
    return cfg_.rotate_all_qubits ? part_.total() : part_.n_memory;
  }
  int param_dim(bool with_scale) const {
    return n_angles() + (with_scale ? 1 : 0);
  }

  CircuitParams make_params(std::span<const double> v, bool with_scale) const {
    CircuitParams p;
    p.rotation_axis = cfg_.rotation_axis;
    for (int q = 0; q < n_angles(); ++q) p.rotation_targets.push_back(q);
    p.theta.assign(v.begin(), v.begin() + n_angles());
    p.out_scale = with_scale ? v[n_angles()] : 1.0;
    return p;
  }

  StepEngine engine(std::span<const double> v, bool with_scale) const {
    return StepEngine(make_params(v, with_scale), evolution_, part_, obs_);
  }

  // Deterministic forward; empty alphas = plain recursion, otherwise the
  // exact gate mixture. Optional shot noise replaces each expectation by a
  // finite-sample average of measured outcomes.
  std::vector<double> forward_det(const StepEngine& eng,
                                  std::span<const double> inputs,
                                  std::span<const double> alphas, double scale,
                                  Rng* shot_rng) const {
    const std::size_t da = part_.memory_dim();
    ComplexMatrix rho = DensityMatrix::ground_state(part_.n_memory).matrix();
    std::vector<double> z;
    z.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      StepEngine::Reduced red = eng.apply(rho, inputs[t]);
      double zexp;
      std::vector<double> born = std::move(red.born);
      if (alphas.empty()) {
        zexp = red.zexp;
        rho = std::move(red.next_memory);
      } else {
        const double a = alphas[t];
        zexp = (1.0 - a) * eng.vacuum_zexp() + a * red.zexp;
        for (double& p : born) p *= a;
        born[0] += 1.0 - a;
        for (std::size_t i = 0; i < da; ++i) {
          for (std::size_t j = 0; j < da; ++j) {
            rho(i, j) = (1.0 - a) * rho(i, j) + a * red.next_memory(i, j);
          }
        }
      }
      if (shot_rng != nullptr && cfg_.shots > 0) {
        double est = 0.0;
        for (int s = 0; s < cfg_.shots; ++s) {
          const int y = shot_rng->discrete(born);
          est += obs_.matrix()(y, y).real();
        }
        zexp = est / cfg_.shots;
      }
      z.push_back(scale * zexp);
    }
    return z;
  }

  std::vector<double> forward_bits(const StepEngine& eng,
                                   std::span<const double> inputs,
                                   const std::vector<uint8_t>& bits,
                                   double scale) const {
    ComplexMatrix rho = DensityMatrix::ground_state(part_.n_memory).matrix();
    std::vector<double> z;
    z.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      if (bits[t]) {
        StepEngine::Reduced red = eng.apply(rho, inputs[t]);
        z.push_back(scale * red.zexp);
        rho = std::move(red.next_memory);
      } else {
        z.push_back(scale * eng.vacuum_zexp());
      }
    }
    return z;
  }

  std::vector<std::vector<double>> marginals(const StepEngine& eng,
                                             std::span<const double> inputs,
                                             std::span<const double> alphas) const {
    const std::size_t da = part_.memory_dim();
    ComplexMatrix rho = DensityMatrix::ground_state(part_.n_memory).matrix();
    std::vector<std::vector<double>> rows;
    rows.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      StepEngine::Reduced red = eng.apply(rho, inputs[t]);
      if (alphas.empty()) {
        rows.push_back(std::move(red.born));
        rho = std::move(red.next_memory);
      } else {
        const double a = alphas[t];
        std::vector<double> born(red.born.size());
        for (std::size_t y = 0; y < born.size(); ++y) born[y] = a * red.born[y];
        born[0] += 1.0 - a;
        rows.push_back(std::move(born));
        for (std::size_t i = 0; i < da; ++i) {
          for (std::size_t j = 0; j < da; ++j) {
            rho(i, j) = (1.0 - a) * rho(i, j) + a * red.next_memory(i, j);
          }
        }
      }
    }
    return rows;
  }

  std::vector<std::vector<double>> marginals_bits(
      const StepEngine& eng, std::span<const double> inputs,
      const std::vector<uint8_t>& bits) const {
    ComplexMatrix rho = DensityMatrix::ground_state(part_.n_memory).matrix();
    std::vector<std::vector<double>> rows;
    rows.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      if (bits[t]) {
        StepEngine::Reduced red = eng.apply(rho, inputs[t]);
        rows.push_back(std::move(red.born));
        rho = std::move(red.next_memory);
      } else {
        std::vector<double> born(part_.output_dim(), 0.0);
        born[0] = 1.0;
        rows.push_back(std::move(born));
      }
    }
    return rows;
  }

  // Single stochastic run with measurement collapse; empty alphas = always
  // apply the unitary.
  std::vector<int> sample_run(const StepEngine& eng,
                              std::span<const double> inputs,
                              std::span<const double> alphas, Rng& rng) const {
    ComplexMatrix rho = DensityMatrix::ground_state(part_.n_memory).matrix();
    std::vector<int> symbols;
    symbols.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      const bool apply_gate = alphas.empty() || rng.bernoulli(alphas[t]);
      if (apply_gate) {
        StepEngine::Reduced red = eng.apply(rho, inputs[t]);
        const int y = rng.discrete(red.born);
        rho = eng.collapse_outcome(rho, inputs[t], y, red.born[y]);
        symbols.push_back(y);
      } else {
        symbols.push_back(0);
      }
    }
    return symbols;
  }

  const QubitPartition& partition() const { return part_; }
  const FixedHamiltonian& hamiltonian() const { return ham_; }

 private:
  const TrainerConfig& cfg_;
  QubitPartition part_;
  Observable obs_;
  FixedHamiltonian ham_;
  ComplexMatrix evolution_;
};

std::vector<double> window(std::span<const double> v, int len) {
  return std::vector<double>(v.begin(), v.begin() + len);
}

}  // namespace

TrainReport train_model(const TrainData& data, ModelKind model,
                        GateMode gate_mode, const TrainerConfig& cfg,
                        uint64_t seed) {
  if (model == ModelKind::lstm) {
    if (gate_mode != GateMode::none) {
      throw std::invalid_argument("train_model: lstm takes gate mode 'none'");
    }
    return train_lstm(data, cfg, seed);
  }
  const int total_len = static_cast<int>(data.inputs.size());
  if (total_len < data.train_len + 1) {
    throw std::invalid_argument("train_model: sequence shorter than train_len + 1");
  }
  if (data.targets.size() != data.inputs.size()) {
    throw std::invalid_argument("train_model: input/target length mismatch");
  }
  if (is_twi(model) == (gate_mode == GateMode::none)) {
    throw std::invalid_argument(
        "train_model: TWI models need gate mode known/learnt, plain models 'none'");
  }
  if (gate_mode == GateMode::known &&
      data.alphas_known.size() != data.inputs.size()) {
    throw std::invalid_argument("train_model: known gate mode needs alphas");
  }
  const bool stochastic = is_stochastic(model);
  if (stochastic &&
      (data.target_symbols.size() != data.inputs.size() || data.levels.empty())) {
    throw std::invalid_argument("train_model: stochastic task needs symbols/levels");
  }

  const auto t_start = std::chrono::steady_clock::now();
  TrainReport report;
  report.model = model;
  report.gate_mode = gate_mode;
  report.seed = seed;
  report.loss_kind = stochastic ? "cross-entropy" : "quadratic";

  const CircuitEvaluator eval(cfg, derive_seed(seed, kHamiltonianStream));
  const bool with_scale = !stochastic && cfg.train_out_scale;

  // Circuit parameter vector [theta..., c?].
  Rng init_rng(derive_seed(seed, kCircuitInitStream));
  std::vector<double> v(eval.param_dim(with_scale));
  for (int k = 0; k < eval.n_angles(); ++k) {
    v[k] = init_rng.uniform(-cfg.init_range, cfg.init_range);
  }
  if (with_scale) v[eval.n_angles()] = 1.0;

  GatingParams gate;
  if (gate_mode == GateMode::learnt) {
    Rng gate_rng(derive_seed(seed, kGateInitStream));
    gate.w_x = gate_rng.uniform(-cfg.init_range, cfg.init_range);
    gate.w_h = gate_rng.uniform(-cfg.init_range, cfg.init_range);
    gate.wh_x = gate_rng.uniform(-cfg.init_range, cfg.init_range);
    gate.wh_h = gate_rng.uniform(-cfg.init_range, cfg.init_range);
    gate.b_phi = gate_rng.uniform(-cfg.init_range, cfg.init_range);
    gate.b_h = gate_rng.uniform(-cfg.init_range, cfg.init_range);
  }

  const std::vector<double> train_inputs = window(data.inputs, data.train_len);
  const std::vector<double> train_targets = window(data.targets, data.train_len);
  const std::vector<int> train_symbols =
      stochastic ? std::vector<int>(data.target_symbols.begin(),
                                    data.target_symbols.begin() + data.train_len)
                 : std::vector<int>();

  Rng score_rng(derive_seed(seed, kScoreStream));
  Rng shot_rng(derive_seed(seed, kShotStream));

  auto train_alphas = [&]() -> std::vector<double> {
    if (gate_mode == GateMode::none) return {};
    if (gate_mode == GateMode::known) {
      return window(data.alphas_known, data.train_len);
    }
    return gating_forward(train_inputs, gate).alpha;
  };

  // Deterministic training-window loss for the current gate weights.
  auto circuit_loss = [&](const std::vector<double>& params) -> double {
    const std::vector<double> alphas = train_alphas();
    const StepEngine eng = eval.engine(params, with_scale);
    if (stochastic) {
      int floored = 0;
      const double l = cross_entropy_loss(
          eval.marginals(eng, train_inputs, alphas), train_symbols, &floored);
      if (floored > 0) report.probability_floored = true;
      return l;
    }
    const double scale = with_scale ? params[eval.n_angles()] : 1.0;
    Rng* shots = cfg.shots > 0 ? &shot_rng : nullptr;
    return quadratic_loss(
        eval.forward_det(eng, train_inputs, alphas, scale, shots),
        train_targets);
  };

  try {
    NelderMeadConfig nm;
    nm.max_evals = cfg.df_evals;
    nm.initial_step = cfg.df_initial_step;

    for (int round = 0; round < cfg.df_rounds; ++round) {
      const MinimizeResult res = derivative_free_minimize(circuit_loss, v, nm);
      v = res.x;
      report.epoch_loss.push_back(res.f);

      if (gate_mode == GateMode::learnt && cfg.adam_epochs > 0) {
        const StepEngine eng = eval.engine(v, with_scale);
        const double scale = with_scale ? v[eval.n_angles()] : 1.0;
        auto loss_of_bits = [&](const std::vector<uint8_t>& bits) -> double {
          if (stochastic) {
            return cross_entropy_loss(
                eval.marginals_bits(eng, train_inputs, bits), train_symbols);
          }
          return quadratic_loss(eval.forward_bits(eng, train_inputs, bits, scale),
                                train_targets);
        };
        ScoreGradientOptions opts;
        opts.n_samples = cfg.score_samples;
        opts.use_baseline = cfg.use_baseline;
        AdamState adam_state;
        std::vector<double> w = gate.flatten();
        for (int epoch = 0; epoch < cfg.adam_epochs; ++epoch) {
          const GatingGradient g = score_function_gradient(
              train_inputs, loss_of_bits, gate, opts, score_rng);
          adam_step(w, g.flatten(), adam_state, cfg.adam);
          gate = GatingParams::from_flat(w, gate.h0);
          report.epoch_loss.push_back(circuit_loss(v));
        }
      }
    }
    report.final_train_loss = circuit_loss(v);
    if (!std::isfinite(report.final_train_loss)) {
      throw NumericalError("training loss is not finite");
    }
  } catch (const NumericalError&) {
    report.diverged = true;
    report.theta.assign(v.begin(), v.begin() + eval.n_angles());
    report.out_scale = with_scale ? v[eval.n_angles()] : 1.0;
    report.gate = gate;
    return report;
  }

  // Frozen-parameter evaluation over the full sequence.
  report.theta.assign(v.begin(), v.begin() + eval.n_angles());
  report.out_scale = with_scale ? v[eval.n_angles()] : 1.0;
  report.gate = gate;

  std::vector<double> full_alphas;
  if (gate_mode == GateMode::known) {
    full_alphas = data.alphas_known;
  } else if (gate_mode == GateMode::learnt) {
    full_alphas = gating_forward(data.inputs, gate).alpha;
  }
  report.alpha_trace = full_alphas;

  const StepEngine eng = eval.engine(v, with_scale);
  std::vector<double> z_full;
  if (stochastic) {
    Rng eval_rng(derive_seed(seed, kEvalStream));
    const std::vector<int> symbols =
        eval.sample_run(eng, data.inputs, full_alphas, eval_rng);
    z_full.reserve(symbols.size());
    for (int y : symbols) {
      if (y < 0 || static_cast<std::size_t>(y) >= data.levels.size()) {
        throw NumericalError("sampled symbol outside level grid");
      }
      z_full.push_back(data.levels[y]);
    }
  } else {
    z_full = eval.forward_det(eng, data.inputs, full_alphas, report.out_scale,
                              nullptr);
  }
  report.eval_predictions.assign(z_full.begin() + data.train_len, z_full.end());
  report.eval_targets.assign(data.targets.begin() + data.train_len,
                             data.targets.end());
  report.cumulative =
      cumulative_loss_curve(z_full, data.targets, data.train_len + 1);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

TrainReport train_lstm(const TrainData& data, const TrainerConfig& cfg,
                       uint64_t seed) {
  const int total_len = static_cast<int>(data.inputs.size());
  if (total_len < data.train_len + 1) {
    throw std::invalid_argument("train_lstm: sequence shorter than train_len + 1");
  }
  const auto t_start = std::chrono::steady_clock::now();
  TrainReport report;
  report.model = ModelKind::lstm;
  report.gate_mode = GateMode::none;
  report.seed = seed;
  report.loss_kind = "quadratic";

  const std::vector<double> train_inputs = window(data.inputs, data.train_len);
  const std::vector<double> train_targets = window(data.targets, data.train_len);

  LstmParams params = LstmParams::random_init(derive_seed(seed, kCircuitInitStream));
  std::vector<double> flat(params.flatten().begin(), params.flatten().end());
  AdamState state;
  std::array<double, LstmParams::count> grad{};
  for (int epoch = 0; epoch < cfg.lstm_epochs; ++epoch) {
    params = LstmParams::from_flat(flat);
    const double loss =
        lstm_loss_and_gradient(train_inputs, train_targets, params, &grad);
    if (!std::isfinite(loss)) {
      report.diverged = true;
      report.lstm = params;
      return report;
    }
    report.epoch_loss.push_back(loss);
    adam_step(flat, std::vector<double>(grad.begin(), grad.end()), state,
              cfg.adam);
  }
  params = LstmParams::from_flat(flat);
  report.lstm = params;
  report.final_train_loss =
      lstm_loss_and_gradient(train_inputs, train_targets, params, nullptr);

  const std::vector<double> z_full = lstm_forward(data.inputs, params);
  report.eval_predictions.assign(z_full.begin() + data.train_len, z_full.end());
  report.eval_targets.assign(data.targets.begin() + data.train_len,
                             data.targets.end());
  report.cumulative =
      cumulative_loss_curve(z_full, data.targets, data.train_len + 1);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

}  // namespace twiqrnn
