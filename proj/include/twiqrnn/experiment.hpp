#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "twiqrnn/datagen.hpp"
#include "twiqrnn/training.hpp"

namespace twiqrnn {

// Raised for bad configuration values; the CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat, typed key=value experiment description. Every key has a default, so
// the canonical text (and its hash, embedded in every output file) always
// lists the full configuration.
struct ExperimentConfig {
  std::string task = "cosine-remember";  // cosine-remember | spin-predict
  std::string warp = "identity";         // identity | linear | sqrt
  double warp_a = 0.1;
  std::string model = "qrnn";      // qrnn | twi-qrnn | sqrnn | twi-sqrnn | lstm
  std::string gate_mode = "none";  // none | known | learnt
  int trials = 5;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int t_steps = 200;
  int train_len = 50;
  std::string output_dir = "out";

  int n_memory = 3;
  int n_output = 3;
  double delta_t = 0.17;
  std::string rotation_axis = "y";         // x | y | z
  std::string rotation_targets = "memory"; // memory | all
  bool train_out_scale = true;

  int df_rounds = 10;
  int df_evals = 100;
  double df_initial_step = 0.25;
  int adam_epochs = 50;
  double adam_lr = 0.001;
  int score_samples = 16;
  bool use_baseline = true;
  int lstm_epochs = 2000;
  double init_range = 0.5;
  int shots = 0;

  std::string alpha_convention = "derivative";  // derivative | complement
  std::string discretize_range = "paper";       // paper ([-1,1]) | data

  // Assigns one key from its text form; throws ConfigError on unknown keys
  // or unparsable values.
  void set(const std::string& key, const std::string& value);
  static ExperimentConfig from_file(const std::string& path);
  void validate() const;

  // Full configuration as sorted key=value lines, and its FNV-1a hash.
  std::string canonical_text() const;
  std::string hash_hex() const;

  ModelKind model_kind() const;
  GateMode gate_mode_kind() const;
  TaskKind task_kind() const;
  WarpSpec warp_spec() const;
  AlphaConvention alpha_convention_kind() const;
  TrainerConfig trainer_config() const;

  std::string warp_slug() const;  // "identity" | "linear0.1" | "sqrt"
  std::string run_slug() const;   // model_gate_task_warp file-name stem
};

// Generated task data for this configuration (sequence, targets, symbols,
// known gate schedule). Deterministic; no RNG involved.
struct TaskData {
  TrainData train;
  Sequence sequence;               // the (warped) input sequence
  std::vector<double> target_values;  // same length as train.inputs
};
TaskData build_task_data(const ExperimentConfig& cfg);

// Runs all trials (concurrently when hardware allows); reports come back in
// seed order. Per-trial wall time goes to stderr, never into files.
std::vector<TrainReport> run_trials(const ExperimentConfig& cfg);

}  // namespace twiqrnn
