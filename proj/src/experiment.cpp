#include "twiqrnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace twiqrnn {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

std::vector<uint64_t> parse_seeds(const std::string& v) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("config key 'seeds': bad entry '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("config key 'seeds': empty list");
  return seeds;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
bool one_of(const T& v, std::initializer_list<T> allowed) {
  for (const auto& a : allowed) {
    if (v == a) return true;
  }
  return false;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "task") task = value;
  else if (key == "warp") warp = value;
  else if (key == "warp_a") warp_a = parse_double(value, key);
  else if (key == "model") model = value;
  else if (key == "gate_mode") gate_mode = value;
  else if (key == "trials") trials = parse_int(value, key);
  else if (key == "seeds") seeds = parse_seeds(value);
  else if (key == "t_steps") t_steps = parse_int(value, key);
  else if (key == "train_len") train_len = parse_int(value, key);
  else if (key == "output_dir") output_dir = value;
  else if (key == "n_memory") n_memory = parse_int(value, key);
  else if (key == "n_output") n_output = parse_int(value, key);
  else if (key == "delta_t") delta_t = parse_double(value, key);
  else if (key == "rotation_axis") rotation_axis = value;
  else if (key == "rotation_targets") rotation_targets = value;
  else if (key == "train_out_scale") train_out_scale = parse_bool(value, key);
  else if (key == "df_rounds") df_rounds = parse_int(value, key);
  else if (key == "df_evals") df_evals = parse_int(value, key);
  else if (key == "df_initial_step") df_initial_step = parse_double(value, key);
  else if (key == "adam_epochs") adam_epochs = parse_int(value, key);
  else if (key == "adam_lr") adam_lr = parse_double(value, key);
  else if (key == "score_samples") score_samples = parse_int(value, key);
  else if (key == "use_baseline") use_baseline = parse_bool(value, key);
  else if (key == "lstm_epochs") lstm_epochs = parse_int(value, key);
  else if (key == "init_range") init_range = parse_double(value, key);
  else if (key == "shots") shots = parse_int(value, key);
  else if (key == "alpha_convention") alpha_convention = value;
  else if (key == "discretize_range") discretize_range = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (!one_of<std::string>(task, {"cosine-remember", "spin-predict"})) {
    throw ConfigError("task must be cosine-remember or spin-predict");
  }
  if (!one_of<std::string>(warp, {"identity", "linear", "sqrt"})) {
    throw ConfigError("warp must be identity, linear or sqrt");
  }
  if (!one_of<std::string>(model,
                           {"qrnn", "twi-qrnn", "sqrnn", "twi-sqrnn", "lstm"})) {
    throw ConfigError("model must be qrnn, twi-qrnn, sqrnn, twi-sqrnn or lstm");
  }
  if (!one_of<std::string>(gate_mode, {"none", "known", "learnt"})) {
    throw ConfigError("gate_mode must be none, known or learnt");
  }
  const bool twi = model == "twi-qrnn" || model == "twi-sqrnn";
  if (twi && gate_mode == "none") {
    throw ConfigError("TWI models need gate_mode known or learnt");
  }
  if (!twi && gate_mode != "none") {
    throw ConfigError("model '" + model + "' takes gate_mode none");
  }
  if (warp == "linear") {
    try {
      (void)WarpSpec::linear(warp_a);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (static_cast<int>(seeds.size()) < trials) {
    throw ConfigError("need at least one seed per trial");
  }
  if (train_len < 1 || t_steps < train_len + 2) {
    throw ConfigError("t_steps must exceed train_len + 1");
  }
  if (n_memory < 1 || n_output < 1 || n_memory + n_output > 10) {
    throw ConfigError("register must have 1..9 memory/output qubits, total <= 10");
  }
  if (!(delta_t > 0.0)) throw ConfigError("delta_t must be positive");
  if (!one_of<std::string>(rotation_axis, {"x", "y", "z"})) {
    throw ConfigError("rotation_axis must be x, y or z");
  }
  if (!one_of<std::string>(rotation_targets, {"memory", "all"})) {
    throw ConfigError("rotation_targets must be memory or all");
  }
  if (df_rounds < 1 || adam_epochs < 0 || lstm_epochs < 1) {
    throw ConfigError("optimizer schedule values out of range");
  }
  const int dim = (rotation_targets == "all" ? n_memory + n_output : n_memory) +
                  (train_out_scale ? 1 : 0);
  if (df_evals < dim + 2) {
    throw ConfigError("df_evals must be at least parameter count + 2");
  }
  if (!(adam_lr > 0.0)) throw ConfigError("adam_lr must be positive");
  if (score_samples < 2) throw ConfigError("score_samples must be >= 2");
  if (!(init_range > 0.0)) throw ConfigError("init_range must be positive");
  if (shots < 0) throw ConfigError("shots must be >= 0");
  if (!one_of<std::string>(alpha_convention, {"derivative", "complement"})) {
    throw ConfigError("alpha_convention must be derivative or complement");
  }
  if (!one_of<std::string>(discretize_range, {"paper", "data"})) {
    throw ConfigError("discretize_range must be paper or data");
  }
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["task"] = task;
  kv["warp"] = warp;
  kv["warp_a"] = format_double(warp_a);
  kv["model"] = model;
  kv["gate_mode"] = gate_mode;
  kv["trials"] = std::to_string(trials);
  {
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(seeds[i]);
    }
    kv["seeds"] = s;
  }
  kv["t_steps"] = std::to_string(t_steps);
  kv["train_len"] = std::to_string(train_len);
  kv["n_memory"] = std::to_string(n_memory);
  kv["n_output"] = std::to_string(n_output);
  kv["delta_t"] = format_double(delta_t);
  kv["rotation_axis"] = rotation_axis;
  kv["rotation_targets"] = rotation_targets;
  kv["train_out_scale"] = train_out_scale ? "true" : "false";
  kv["df_rounds"] = std::to_string(df_rounds);
  kv["df_evals"] = std::to_string(df_evals);
  kv["df_initial_step"] = format_double(df_initial_step);
  kv["adam_epochs"] = std::to_string(adam_epochs);
  kv["adam_lr"] = format_double(adam_lr);
  kv["score_samples"] = std::to_string(score_samples);
  kv["use_baseline"] = use_baseline ? "true" : "false";
  kv["lstm_epochs"] = std::to_string(lstm_epochs);
  kv["init_range"] = format_double(init_range);
  kv["shots"] = std::to_string(shots);
  kv["alpha_convention"] = alpha_convention;
  kv["discretize_range"] = discretize_range;
  // output_dir is a workspace detail, not part of the experiment identity.
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  return text;
}

std::string ExperimentConfig::hash_hex() const {
  const std::string text = canonical_text();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelKind ExperimentConfig::model_kind() const {
  if (model == "qrnn") return ModelKind::qrnn;
  if (model == "twi-qrnn") return ModelKind::twi_qrnn;
  if (model == "sqrnn") return ModelKind::sqrnn;
  if (model == "twi-sqrnn") return ModelKind::twi_sqrnn;
  if (model == "lstm") return ModelKind::lstm;
  throw ConfigError("bad model '" + model + "'");
}

GateMode ExperimentConfig::gate_mode_kind() const {
  if (gate_mode == "none") return GateMode::none;
  if (gate_mode == "known") return GateMode::known;
  if (gate_mode == "learnt") return GateMode::learnt;
  throw ConfigError("bad gate_mode '" + gate_mode + "'");
}

TaskKind ExperimentConfig::task_kind() const {
  return task == "cosine-remember" ? TaskKind::remember : TaskKind::predict;
}

WarpSpec ExperimentConfig::warp_spec() const {
  if (warp == "identity") return WarpSpec::identity();
  if (warp == "linear") return WarpSpec::linear(warp_a);
  return WarpSpec::sqrt();
}

AlphaConvention ExperimentConfig::alpha_convention_kind() const {
  return alpha_convention == "complement" ? AlphaConvention::complement
                                          : AlphaConvention::derivative;
}

TrainerConfig ExperimentConfig::trainer_config() const {
  TrainerConfig t;
  t.n_memory = n_memory;
  t.n_output = n_output;
  t.delta_t = delta_t;
  t.rotation_axis = rotation_axis == "x"   ? Axis::x
                    : rotation_axis == "z" ? Axis::z
                                           : Axis::y;
  t.rotate_all_qubits = rotation_targets == "all";
  t.train_out_scale = train_out_scale;
  t.df_rounds = df_rounds;
  t.df_evals = df_evals;
  t.df_initial_step = df_initial_step;
  t.adam_epochs = adam_epochs;
  t.adam.lr = adam_lr;
  t.score_samples = score_samples;
  t.use_baseline = use_baseline;
  t.lstm_epochs = lstm_epochs;
  t.init_range = init_range;
  t.shots = shots;
  return t;
}

std::string ExperimentConfig::warp_slug() const {
  if (warp == "linear") {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "linear%g", warp_a);
    return buf;
  }
  return warp;
}

std::string ExperimentConfig::run_slug() const {
  return model + "_" + gate_mode + "_" + task + "_" + warp_slug();
}

TaskData build_task_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const WarpSpec warp = cfg.warp_spec();
  const bool stochastic = cfg.model == "sqrnn" || cfg.model == "twi-sqrnn";

  Sequence seq;
  if (cfg.task == "cosine-remember") {
    if (cfg.warp == "identity") {
      seq = cosine_sequence(cfg.t_steps);
    } else if (cfg.warp == "linear") {
      seq = linear_warp_hold(cosine_sequence(cfg.t_steps), cfg.warp_a);
    } else {
      // Sample the cosine on the sqrt-warped grid.
      seq = cosine_sequence(cfg.t_steps);
      for (int t = 1; t <= cfg.t_steps; ++t) {
        const double ct = warp.warp(static_cast<double>(t));
        seq.samples[t - 1] = (std::cos(3.14159265358979323846 * ct / 5.0) + 1.0) / 2.0;
        seq.times[t - 1] = ct;
      }
      seq.warp = "sqrt";
    }
  } else {
    LindbladSpec spec;
    if (cfg.warp == "linear") {
      seq = linear_warp_hold(spin_observable_sequence(WarpSpec::identity(),
                                                      cfg.t_steps, spec),
                             cfg.warp_a);
    } else {
      seq = spin_observable_sequence(warp, cfg.t_steps, spec);
    }
  }

  TaskData data;
  data.sequence = seq;
  data.train.train_len = cfg.train_len;

  const TaskKind task = cfg.task_kind();
  if (stochastic) {
    // Discretize the signal (with its t=0 extension) onto the symbol grid;
    // both inputs and targets live on the level values.
    std::vector<double> values;
    values.reserve(seq.samples.size() + 1);
    values.push_back(seq.x0);
    values.insert(values.end(), seq.samples.begin(), seq.samples.end());
    double lo = -1.0, hi = 1.0;
    if (cfg.discretize_range == "data") {
      lo = *std::min_element(values.begin(), values.end());
      hi = *std::max_element(values.begin(), values.end());
    }
    const Discretized disc =
        discretize(values, 1 << cfg.n_output, lo, hi);
    data.train.levels = disc.levels;
    const std::size_t n = seq.samples.size();
    if (task == TaskKind::remember) {
      for (std::size_t t = 1; t <= n; ++t) {
        data.train.inputs.push_back(disc.level_values[t]);
        data.train.targets.push_back(disc.level_values[t - 1]);
        data.train.target_symbols.push_back(disc.symbols[t - 1]);
      }
    } else {
      for (std::size_t t = 1; t + 1 <= n; ++t) {
        data.train.inputs.push_back(disc.level_values[t]);
        data.train.targets.push_back(disc.level_values[t + 1]);
        data.train.target_symbols.push_back(disc.symbols[t + 1]);
      }
    }
  } else {
    if (task == TaskKind::remember) {
      data.train.inputs = seq.samples;
      data.train.targets = make_targets(TaskKind::remember, seq.samples, seq.x0);
    } else {
      data.train.targets = make_targets(TaskKind::predict, seq.samples, seq.x0);
      data.train.inputs.assign(seq.samples.begin(), seq.samples.end() - 1);
    }
  }
  data.target_values = data.train.targets;

  if (cfg.gate_mode == "known") {
    data.train.alphas_known =
        known_warp_alphas(warp, static_cast<int>(data.train.inputs.size()),
                          cfg.alpha_convention_kind());
  }
  return data;
}

std::vector<TrainReport> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  const TaskData data = build_task_data(cfg);
  const ModelKind model = cfg.model_kind();
  const GateMode mode = cfg.gate_mode_kind();
  const TrainerConfig trainer = cfg.trainer_config();

  std::vector<std::future<TrainReport>> futures;
  futures.reserve(cfg.trials);
  const auto policy = std::thread::hardware_concurrency() > 1
                          ? std::launch::async
                          : std::launch::deferred;
  for (int i = 0; i < cfg.trials; ++i) {
    const uint64_t seed = cfg.seeds[i];
    futures.push_back(std::async(policy, [&, seed]() {
      return train_model(data.train, model, mode, trainer, seed);
    }));
  }
  std::vector<TrainReport> reports;
  reports.reserve(cfg.trials);
  for (auto& f : futures) {
    reports.push_back(f.get());
    const TrainReport& r = reports.back();
    std::cerr << "trial seed=" << r.seed << " model=" << to_string(r.model)
              << " gate=" << to_string(r.gate_mode)
              << (r.diverged ? " DIVERGED" : "")
              << " train_loss=" << r.final_train_loss
              << " wall=" << r.wall_seconds << "s\n";
  }
  return reports;
}

}  // namespace twiqrnn
