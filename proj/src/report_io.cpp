#include "twiqrnn/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace twiqrnn {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

json params_json(const TrainReport& r) {
  json j;
  j["theta"] = r.theta;
  j["out_scale"] = r.out_scale;
  j["gate"] = {{"w_x", r.gate.w_x},   {"w_h", r.gate.w_h},
               {"wh_x", r.gate.wh_x}, {"wh_h", r.gate.wh_h},
               {"b_phi", r.gate.b_phi}, {"b_h", r.gate.b_h},
               {"h0", r.gate.h0}};
  if (r.model == ModelKind::lstm) {
    const auto flat = r.lstm.flatten();
    j["lstm"] = std::vector<double>(flat.begin(), flat.end());
  }
  return j;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_sequence_csv(const std::string& path, const ExperimentConfig& cfg,
                        const TaskData& data) {
  std::ofstream out = open_out(path);
  const bool with_symbols = !data.train.target_symbols.empty();
  out << "# twiqrnn gen-data task=" << cfg.task << " warp=" << cfg.warp_slug()
      << "\n";
  out << "# config_hash=" << cfg.hash_hex() << "\n";
  out << "step,continuous_time,x,target" << (with_symbols ? ",symbol" : "")
      << "\n";
  for (std::size_t t = 0; t < data.train.inputs.size(); ++t) {
    out << (t + 1) << ',' << format_g17(data.sequence.times[t]) << ','
        << format_g17(data.train.inputs[t]) << ','
        << format_g17(data.train.targets[t]);
    if (with_symbols) out << ',' << data.train.target_symbols[t];
    out << "\n";
  }
}

void write_trial_csv(const std::string& path, const ExperimentConfig& cfg,
                     const TaskData& data, const TrainReport& report) {
  std::ofstream out = open_out(path);
  const bool with_alpha = !report.alpha_trace.empty();
  out << "# twiqrnn train model=" << to_string(report.model)
      << " gate=" << to_string(report.gate_mode) << " task=" << cfg.task
      << " warp=" << cfg.warp_slug() << "\n";
  out << "# config_hash=" << cfg.hash_hex() << " seed=" << report.seed << "\n";
  out << "step,x,target,prediction,sq_error,cumulative"
      << (with_alpha ? ",alpha" : "") << "\n";
  const int start = data.train.train_len;  // 0-based eval start
  for (std::size_t k = 0; k < report.eval_predictions.size(); ++k) {
    const std::size_t t = start + k;
    const double err = report.eval_targets[k] - report.eval_predictions[k];
    out << (t + 1) << ',' << format_g17(data.train.inputs[t]) << ','
        << format_g17(report.eval_targets[k]) << ','
        << format_g17(report.eval_predictions[k]) << ','
        << format_g17(err * err) << ',' << format_g17(report.cumulative[k]);
    if (with_alpha) out << ',' << format_g17(report.alpha_trace[t]);
    out << "\n";
  }
}

void write_trial_json(const std::string& path, const ExperimentConfig& cfg,
                      const TrainReport& report) {
  json j;
  j["kind"] = "twiqrnn-trial";
  j["config_hash"] = cfg.hash_hex();
  j["model"] = to_string(report.model);
  j["gate_mode"] = to_string(report.gate_mode);
  j["loss_kind"] = report.loss_kind;
  j["seed"] = report.seed;
  j["diverged"] = report.diverged;
  j["probability_floored"] = report.probability_floored;
  j["final_train_loss"] = report.final_train_loss;
  j["params"] = params_json(report);
  j["epoch_loss"] = report.epoch_loss;
  j["final_cumulative"] =
      report.cumulative.empty() ? 0.0 : report.cumulative.back();
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_aggregate_json(const std::string& path, const ExperimentConfig& cfg,
                          const std::vector<TrainReport>& reports) {
  json j;
  j["kind"] = "twiqrnn-aggregate";
  j["config_hash"] = cfg.hash_hex();
  j["model"] = cfg.model;
  j["gate_mode"] = cfg.gate_mode;
  j["task"] = cfg.task;
  j["warp"] = cfg.warp_slug();
  j["trials"] = static_cast<int>(reports.size());
  std::vector<uint64_t> seeds;
  std::vector<double> finals;
  bool complete = true;
  std::size_t curve_len = 0;
  for (const auto& r : reports) {
    seeds.push_back(r.seed);
    if (r.diverged) {
      complete = false;
      continue;
    }
    finals.push_back(r.cumulative.empty() ? 0.0 : r.cumulative.back());
    curve_len = std::max(curve_len, r.cumulative.size());
  }
  j["seeds"] = seeds;
  j["complete"] = complete;
  j["final_cumulative"] = finals;

  std::vector<double> mean(curve_len, 0.0), stderr_curve(curve_len, 0.0);
  int used = 0;
  for (const auto& r : reports) {
    if (r.diverged) continue;
    ++used;
    for (std::size_t k = 0; k < curve_len; ++k) mean[k] += r.cumulative[k];
  }
  if (used > 0) {
    for (auto& v : mean) v /= used;
    if (used > 1) {
      for (const auto& r : reports) {
        if (r.diverged) continue;
        for (std::size_t k = 0; k < curve_len; ++k) {
          const double d = r.cumulative[k] - mean[k];
          stderr_curve[k] += d * d;
        }
      }
      for (auto& v : stderr_curve) {
        v = std::sqrt(v / (used - 1) / used);
      }
    }
  }
  j["mean_curve"] = mean;
  j["stderr_curve"] = stderr_curve;
  j["mean_final_cumulative"] = mean.empty() ? 0.0 : mean.back();
  j["stderr_final_cumulative"] =
      stderr_curve.empty() ? 0.0 : stderr_curve.back();
  std::vector<int> steps(curve_len);
  for (std::size_t k = 0; k < curve_len; ++k) {
    steps[k] = cfg.train_len + 1 + static_cast<int>(k);
  }
  j["steps"] = steps;
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_alpha_csv(const std::string& path, const ExperimentConfig& cfg,
                     const TaskData& data, const GatingParams& gate) {
  std::ofstream out = open_out(path);
  const WarpSpec warp = cfg.warp_spec();
  const std::vector<double> known = known_warp_alphas(
      warp, static_cast<int>(data.train.inputs.size()),
      cfg.alpha_convention_kind());
  const GateTrace trace = gating_forward(data.train.inputs, gate);
  out << "# twiqrnn export-alpha task=" << cfg.task
      << " warp=" << cfg.warp_slug() << "\n";
  out << "# config_hash=" << cfg.hash_hex() << "\n";
  out << "step,known_dcdt,learnt_alpha\n";
  for (std::size_t t = 0; t < known.size(); ++t) {
    out << (t + 1) << ',' << format_g17(known[t]) << ','
        << format_g17(trace.alpha[t]) << "\n";
  }
}

LoadedTrial load_trial_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  json j;
  in >> j;
  if (j.value("kind", "") != "twiqrnn-trial") {
    throw std::runtime_error(path + ": not a trial report");
  }
  LoadedTrial out;
  out.config_hash = j.value("config_hash", "");
  TrainReport& r = out.report;
  const std::string model = j.value("model", "qrnn");
  for (ModelKind k : {ModelKind::qrnn, ModelKind::twi_qrnn, ModelKind::sqrnn,
                      ModelKind::twi_sqrnn, ModelKind::lstm}) {
    if (to_string(k) == model) r.model = k;
  }
  const std::string gate = j.value("gate_mode", "none");
  for (GateMode m : {GateMode::none, GateMode::known, GateMode::learnt}) {
    if (to_string(m) == gate) r.gate_mode = m;
  }
  r.loss_kind = j.value("loss_kind", "");
  r.seed = j.value("seed", uint64_t{0});
  r.diverged = j.value("diverged", false);
  r.final_train_loss = j.value("final_train_loss", 0.0);
  const json& p = j.at("params");
  r.theta = p.value("theta", std::vector<double>{});
  r.out_scale = p.value("out_scale", 1.0);
  const json& g = p.at("gate");
  r.gate.w_x = g.value("w_x", 0.0);
  r.gate.w_h = g.value("w_h", 0.0);
  r.gate.wh_x = g.value("wh_x", 0.0);
  r.gate.wh_h = g.value("wh_h", 0.0);
  r.gate.b_phi = g.value("b_phi", 0.0);
  r.gate.b_h = g.value("b_h", 0.0);
  r.gate.h0 = g.value("h0", 0.0);
  if (p.contains("lstm")) {
    const std::vector<double> flat = p["lstm"].get<std::vector<double>>();
    r.lstm = LstmParams::from_flat(flat);
  }
  return out;
}

namespace {

struct CurveGroup {
  std::vector<std::vector<double>> curves;  // cumulative column per trial
  std::vector<int> steps;
};

}  // namespace

void write_plot_svg(const std::string& path,
                    const std::vector<std::string>& trial_csvs) {
  std::map<std::string, CurveGroup> groups;
  for (const auto& file : trial_csvs) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read '" + file + "'");
    std::string line;
    std::string label = file;
    std::vector<double> curve;
    std::vector<int> steps;
    int cum_col = -1;
    while (std::getline(in, line)) {
      if (line.rfind("# twiqrnn train", 0) == 0) {
        const auto mpos = line.find("model=");
        const auto gpos = line.find("gate=");
        if (mpos != std::string::npos && gpos != std::string::npos) {
          const std::string m = line.substr(mpos + 6, line.find(' ', mpos + 6) - mpos - 6);
          const std::string g = line.substr(gpos + 5, line.find(' ', gpos + 5) - gpos - 5);
          label = m + "/" + g;
        }
        continue;
      }
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cum_col < 0) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i] == "cumulative") cum_col = static_cast<int>(i);
        }
        if (cum_col < 0) {
          throw std::runtime_error(file + ": no cumulative column");
        }
        continue;
      }
      if (static_cast<int>(cells.size()) <= cum_col) {
        throw std::runtime_error(file + ": malformed row");
      }
      steps.push_back(std::stoi(cells[0]));
      curve.push_back(std::stod(cells[cum_col]));
    }
    CurveGroup& grp = groups[label];
    if (!curve.empty()) {
      grp.curves.push_back(std::move(curve));
      if (grp.steps.empty()) grp.steps = std::move(steps);
    }
  }

  const int width = 720, height = 480;
  const int ml = 60, mr = 160, mt = 20, mb = 40;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  bool any = false;
  double xmin = 1e300, xmax = -1e300, ymax = 0.0;
  std::map<std::string, std::vector<double>> means;
  for (const auto& [label, grp] : groups) {
    if (grp.curves.empty()) continue;
    std::vector<double> mean(grp.steps.size(), 0.0);
    for (const auto& c : grp.curves) {
      for (std::size_t k = 0; k < mean.size() && k < c.size(); ++k) {
        mean[k] += c[k];
      }
    }
    for (auto& v : mean) v /= grp.curves.size();
    xmin = std::min(xmin, static_cast<double>(grp.steps.front()));
    xmax = std::max(xmax, static_cast<double>(grp.steps.back()));
    for (double v : mean) ymax = std::max(ymax, v);
    means[label] = std::move(mean);
    any = true;
  }

  if (!any) {
    std::cerr << "warning: plot input has no evaluation rows\n";
    out << "<text x=\"24\" y=\"40\">no data</text>\n</svg>\n";
    return;
  }
  if (ymax <= 0.0) ymax = 1.0;

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  auto px = [&](double step) {
    return ml + (step - xmin) / std::max(1.0, xmax - xmin) * (width - ml - mr);
  };
  auto py = [&](double v) { return height - mb - v / ymax * (height - mt - mb); };

  // Axes.
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\""
      << height - 8 << "\" text-anchor=\"middle\" font-size=\"13\">step</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + (height - mt - mb) / 2)
      << "\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (mt + (height - mt - mb) / 2)
      << ")\" text-anchor=\"middle\">cumulative loss</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", ymax);
  out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << height - mb
      << "\" text-anchor=\"end\" font-size=\"11\">0</text>\n";

  int idx = 0;
  for (const auto& [label, mean] : means) {
    const auto& steps = groups[label].steps;
    out << "<polyline fill=\"none\" stroke=\"" << colors[idx % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < mean.size(); ++k) {
      out << px(steps[k]) << ',' << py(mean[k]) << ' ';
    }
    out << "\"/>\n";
    const int ly = mt + 16 + 18 * idx;
    out << "<line x1=\"" << width - mr + 10 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << width - mr + 34 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << colors[idx % 8] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - mr + 40 << "\" y=\"" << ly
        << "\" font-size=\"12\">" << label << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace twiqrnn
