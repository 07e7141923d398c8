#pragma once

#include <string>
#include <vector>

#include "twiqrnn/experiment.hpp"

namespace twiqrnn {

// All emitters write deterministic bytes for a given (config, seeds): no
// timestamps, fixed '%.17g' number formatting, config hash in a leading
// comment. Wall-clock timings never enter these files.

std::string format_g17(double v);

// step,continuous_time,x,target[,symbol]
void write_sequence_csv(const std::string& path, const ExperimentConfig& cfg,
                        const TaskData& data);

// Per-trial evaluation table: step,x,target,prediction,sq_error,cumulative
// (plus alpha for TWI models).
void write_trial_csv(const std::string& path, const ExperimentConfig& cfg,
                     const TaskData& data, const TrainReport& report);

// Final parameters and training trace for one trial.
void write_trial_json(const std::string& path, const ExperimentConfig& cfg,
                      const TrainReport& report);

// Cross-trial mean/stderr of the cumulative curve.
void write_aggregate_json(const std::string& path, const ExperimentConfig& cfg,
                          const std::vector<TrainReport>& reports);

// step,known_dcdt,learnt_alpha for the trained gate of one trial.
void write_alpha_csv(const std::string& path, const ExperimentConfig& cfg,
                     const TaskData& data, const GatingParams& gate);

// Gate parameters back from a trial JSON (for export-alpha / eval).
struct LoadedTrial {
  TrainReport report;
  std::string config_hash;
};
LoadedTrial load_trial_json(const std::string& path);

// Static line chart of cumulative curves, one polyline per model/gate pair
// found in the given trial CSVs.
void write_plot_svg(const std::string& path,
                    const std::vector<std::string>& trial_csvs);

}  // namespace twiqrnn
