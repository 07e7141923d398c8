#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twiqrnn/circuit.hpp"
#include "twiqrnn/gating.hpp"
#include "twiqrnn/lstm.hpp"
#include "twiqrnn/optimize.hpp"

namespace twiqrnn {

// (1/T) sum (zbar_t - z_t)^2.
double quadratic_loss(std::span<const double> z, std::span<const double> zbar);

// -(1/T) sum log p(ybar_t), probabilities floored at 1e-12 before the log.
// floored_count (optional) reports how many steps hit the floor.
double cross_entropy_loss(const std::vector<std::vector<double>>& marginals,
                          std::span<const int> ybar,
                          int* floored_count = nullptr);

// Running sum of squared errors from 1-based step `start` through the end:
// C_t = sum_{s=start}^t (zbar_s - z_s)^2.
std::vector<double> cumulative_loss_curve(std::span<const double> z,
                                          std::span<const double> zbar,
                                          int start = 51);

enum class ModelKind { qrnn, twi_qrnn, sqrnn, twi_sqrnn, lstm };
enum class GateMode { none, known, learnt };

std::string to_string(ModelKind kind);
std::string to_string(GateMode mode);

// One task instance: equal-length input and target sequences, plus the
// symbol targets and level grid for the stochastic models and the known
// gate schedule for TWI models under a known warp.
struct TrainData {
  std::vector<double> inputs;
  std::vector<double> targets;
  std::vector<int> target_symbols;    // empty for deterministic tasks
  std::vector<double> levels;         // symbol -> level value
  std::vector<double> alphas_known;   // empty unless the warp is known
  int train_len = 50;
};

struct TrainerConfig {
  // Circuit layout.
  int n_memory = 3;
  int n_output = 3;
  double delta_t = 0.17;
  Axis rotation_axis = Axis::y;
  bool rotate_all_qubits = false;  // default: memory qubits only
  bool train_out_scale = true;

  // Alternation: one derivative-free pass over the circuit parameters, then
  // a block of Adam epochs over the gate weights, per round.
  int df_rounds = 10;
  int df_evals = 100;
  double df_initial_step = 0.25;
  int adam_epochs = 50;
  AdamConfig adam;
  int score_samples = 16;
  bool use_baseline = true;

  int lstm_epochs = 2000;
  double init_range = 0.5;  // uniform initialization half-width
  int shots = 0;            // 0 = exact expectations
};

struct TrainReport {
  ModelKind model = ModelKind::qrnn;
  GateMode gate_mode = GateMode::none;
  std::string loss_kind;  // "quadratic" | "cross-entropy"
  uint64_t seed = 0;

  // Final parameters; only the fields relevant to the model are meaningful.
  std::vector<double> theta;
  double out_scale = 1.0;
  GatingParams gate;
  LstmParams lstm;

  std::vector<double> epoch_loss;        // training-window loss trace
  std::vector<double> eval_predictions;  // steps train_len+1 .. T
  std::vector<double> eval_targets;
  std::vector<double> cumulative;        // cumulative squared error over eval
  std::vector<double> alpha_trace;       // per-step gate probability (TWI)
  double final_train_loss = 0.0;
  bool diverged = false;
  bool probability_floored = false;
  double wall_seconds = 0.0;  // informational; never serialized
};

// Alternating training: derivative-free minimization of the circuit loss,
// interleaved (for learnt gating) with score-function Adam updates of the
// gate weights. Training sees steps 1..train_len; evaluation rolls the full
// sequence with frozen parameters.
TrainReport train_model(const TrainData& data, ModelKind model,
                        GateMode gate_mode, const TrainerConfig& cfg,
                        uint64_t seed);

// Full-batch Adam on the MSE over the training window.
TrainReport train_lstm(const TrainData& data, const TrainerConfig& cfg,
                       uint64_t seed);

// Derived per-purpose RNG seeds so that, given one trial seed, every model
// draws the same Hamiltonian and circuit initialization.
uint64_t derive_seed(uint64_t base, uint64_t salt);

}  // namespace twiqrnn
