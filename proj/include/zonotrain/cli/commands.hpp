/*
 * Copyright 2026 The zonotrain Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ZONOTRAIN_CLI_COMMANDS_HPP
#define ZONOTRAIN_CLI_COMMANDS_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "zonotrain/cli/config.hpp"
#include "zonotrain/zonotrain.hpp"

namespace zonotrain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 2;
inline constexpr int kExitNumeric = 3;

/// Values given on the command line; each one replaces its config key.
struct Overrides {
  std::optional<std::string> model;
  std::optional<std::string> out;
  std::optional<Backend> backend;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
};

namespace fs = std::filesystem;

/// Reads the config (defaults when `path` is empty), resolves data paths
/// relative to the config file and applies the overrides.
inline RunConfig load_run_config(const std::string& path, const Overrides& ov,
                                 bool epsilon_targets_training) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    cfg = parse_config(in);
    const fs::path base = fs::absolute(path).parent_path();
    for (std::string* p : {&cfg.data.train_images, &cfg.data.train_labels, &cfg.data.test_images,
                           &cfg.data.test_labels}) {
      if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
  }
  if (ov.model) cfg.model.path = *ov.model;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.backend) {
    cfg.eval.backend = *ov.backend;
    cfg.train.backend = *ov.backend;
  }
  if (ov.epsilon) {
    if (epsilon_targets_training) {
      cfg.train.epsilon = *ov.epsilon;
    } else {
      cfg.eval.epsilon = *ov.epsilon;
    }
  }
  if (ov.seed) cfg.seed = *ov.seed;
  cfg.train.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

struct Splits {
  Dataset train;
  Dataset test;
};

inline Splits load_data(const DataConfig& d) {
  Splits s;
  if (d.kind == DatasetKind::Synthetic2d) {
    s.train = synthetic_2d();
    s.test = s.train;
  } else {
    auto check = [](const std::string& p) {
      if (!fs::exists(p)) throw ConfigError("dataset file not found: '" + p + "'");
    };
    for (const auto* p : {&d.train_images, &d.train_labels, &d.test_images, &d.test_labels}) check(*p);
    s.train = load_mnist_idx(d.train_images, d.train_labels);
    s.test = load_mnist_idx(d.test_images, d.test_labels);
  }
  s.train = s.train.head(d.train_limit);
  s.test = s.test.head(d.test_limit);
  return s;
}

inline const Dataset& eval_split(const RunConfig& cfg, const Splits& s) {
  return cfg.eval.use_train_split ? s.train : s.test;
}

inline fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline Network load_model_for(const RunConfig& cfg, const Dataset& data) {
  if (cfg.model.path.empty()) throw ConfigError("no model given (use --model or [model] path)");
  if (!fs::exists(cfg.model.path)) throw ConfigError("model file not found: '" + cfg.model.path + "'");
  Network net = load_model(cfg.model.path);
  if (net.input_dim() != data.input_dim() || net.output_dim() != data.num_classes) {
    throw ConfigError("model expects " + std::to_string(net.input_dim()) + " inputs and " +
                      std::to_string(net.output_dim()) + " classes, dataset has " +
                      std::to_string(data.input_dim()) + " inputs and " +
                      std::to_string(data.num_classes) + " classes");
  }
  return net;
}

inline AttackConfig attack_config(const RunConfig& cfg) {
  AttackConfig a = cfg.attack;
  a.epsilon = cfg.eval.epsilon;
  return a;
}

inline nlohmann::ordered_json metrics_json(const Metrics& m, const RunConfig& cfg, std::size_t n) {
  nlohmann::ordered_json j;
  j["samples"] = n;
  j["epsilon"] = cfg.eval.epsilon;
  j["backend"] = std::string(to_string(cfg.eval.backend));
  j["clean"] = m.clean;
  j["falsified"] = m.falsified;
  j["falsified_fraction"] = m.falsified_fraction;
  j["fast_verified"] = m.fast_verified;
  j["conflicts"] = m.conflicts;
  return j;
}

inline int cmd_train(const RunConfig& cfg, std::ostream& log) {
  const Splits data = load_data(cfg.data);
  const fs::path out = ensure_out_dir(cfg);
  Network net = init_params({cfg.model.widths, cfg.model.activation}, cfg.seed);
  if (cfg.data.normalize) net = normalize_into_network(kMnistMean, kMnistStd, net);
  const auto result = train(net, data.train, cfg.train, [&log](const EpochMetrics& e) {
    log << "epoch " << e.epoch << " loss " << format_number(e.mean_set_loss) << " acc "
        << format_number(e.train_accuracy) << '\n';
  });
  const fs::path model_path = cfg.model.path.empty() ? out / "model.znt" : fs::path(cfg.model.path);
  save_model(result.network, model_path.string());
  metrics_csv(result.log, cfg.log_wall_time).write((out / "metrics.csv").string());

  const Dataset& held_out = eval_split(cfg, data);
  const Metrics m = evaluate(result.network, held_out, cfg.eval.epsilon, attack_config(cfg),
                             {cfg.eval.backend});
  auto j = metrics_json(m, cfg, held_out.size());
  j["train_accuracy"] = result.log.back().train_accuracy;
  j["model"] = model_path.string();
  write_text(out / "summary.json", j.dump(2) + "\n");
  log << "clean " << format_number(m.clean) << " falsified " << format_number(m.falsified)
      << " fast_verified " << format_number(m.fast_verified) << '\n';
  return kExitOk;
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& log, bool write_verdicts) {
  const Splits data = load_data(cfg.data);
  const Dataset& split = eval_split(cfg, data);
  const Network net = load_model_for(cfg, split);
  const fs::path out = ensure_out_dir(cfg);
  const Metrics m = evaluate(net, split, cfg.eval.epsilon, attack_config(cfg), {cfg.eval.backend});
  if (write_verdicts) verdict_csv(m).write((out / "verdicts.csv").string());
  write_text(out / "summary.json", metrics_json(m, cfg, split.size()).dump(2) + "\n");
  log << "clean " << format_number(m.clean) << " falsified " << format_number(m.falsified)
      << " fast_verified " << format_number(m.fast_verified) << '\n';
  return kExitOk;
}

inline int cmd_attack(const RunConfig& cfg, std::ostream& log) {
  const Splits data = load_data(cfg.data);
  const Dataset& split = eval_split(cfg, data);
  const Network net = load_model_for(cfg, split);
  const fs::path out = ensure_out_dir(cfg);
  const AttackConfig a = attack_config(cfg);
  CsvWriter csv({"index", "label", "clean_prediction", "attack_prediction", "success", "linf_distance"});
  std::size_t successes = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const Vector& x = split.inputs[i];
    const Index label = split.labels[i];
    const Vector adv = pgd(net, x, split.target(i), a);
    const Index clean = classify(predict(net, x));
    const Index attacked = classify(predict(net, adv));
    const bool success = clean == label && attacked != label;
    successes += success;
    csv.add_row({std::to_string(i), std::to_string(label), std::to_string(clean),
                 std::to_string(attacked), success ? "1" : "0",
                 format_number((adv - x).cwiseAbs().maxCoeff())});
  }
  csv.write((out / "attack.csv").string());
  nlohmann::ordered_json j;
  j["samples"] = split.size();
  j["epsilon"] = a.epsilon;
  j["successes"] = successes;
  j["success_rate"] = static_cast<double>(successes) / static_cast<double>(split.size());
  write_text(out / "attack_summary.json", j.dump(2) + "\n");
  log << "attack successes " << successes << " / " << split.size() << '\n';
  return kExitOk;
}

inline int cmd_max_radius(const RunConfig& cfg, std::ostream& log) {
  const Splits data = load_data(cfg.data);
  const Dataset& split = eval_split(cfg, data);
  const Network net = load_model_for(cfg, split);
  const fs::path out = ensure_out_dir(cfg);
  const auto& mr = cfg.max_radius;
  CsvWriter csv({"index", "label", "predicted", "max_radius"});
  std::vector<double> radii;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const double r = max_verified_radius(net, split.inputs[i], split.labels[i], mr.lo, mr.hi,
                                         mr.iterations, cfg.eval.backend);
    radii.push_back(r);
    csv.add_row({std::to_string(i), std::to_string(split.labels[i]),
                 std::to_string(classify(predict(net, split.inputs[i]))), format_number(r)});
  }
  csv.write((out / "max_radius.csv").string());
  double mean = 0.0;
  for (double r : radii) mean += r;
  mean /= static_cast<double>(radii.size());
  double var = 0.0;
  for (double r : radii) var += (r - mean) * (r - mean);
  const double stddev = std::sqrt(var / static_cast<double>(radii.size()));
  double best = 0.0;
  for (double r : radii) best = std::max(best, r);
  nlohmann::ordered_json j;
  j["samples"] = split.size();
  j["backend"] = std::string(to_string(cfg.eval.backend));
  j["resolution"] = (mr.hi - mr.lo) / std::pow(2.0, mr.iterations);
  j["mean"] = mean;
  j["std"] = stddev;
  j["max"] = best;
  write_text(out / "max_radius_summary.json", j.dump(2) + "\n");
  log << "max radius mean " << format_number(mean) << " std " << format_number(stddev) << '\n';
  return kExitOk;
}

struct EnclosureRow {
  double lower = 0.0;
  double upper = 0.0;
  ActivationKind kind = ActivationKind::Tanh;
  double area_ours = 0.0;
  double area_singh = 0.0;
};

inline EnclosureRow compare_enclosure(double l, double u, ActivationKind kind) {
  const double slope = linear_slope(l, u, kind);
  const auto err = approx_errors(slope, l, u, kind);
  const auto singh = singh_enclose(l, u, kind);
  return {l, u, kind, enclosure_area(err.lower, err.upper, l, u),
          enclosure_area(-singh.error, singh.error, l, u)};
}

/// Rows for every grid pair l <= u, followed by `random_rows` seeded random intervals.
inline std::vector<EnclosureRow> enclosure_rows(const EnclosureGridConfig& g, std::uint64_t seed) {
  std::vector<EnclosureRow> rows;
  std::vector<double> grid;
  for (int i = 0; i <= g.grid_steps; ++i) {
    grid.push_back(g.min_bound + (g.max_bound - g.min_bound) * i / g.grid_steps);
  }
  for (ActivationKind kind : g.kinds) {
    if (kind == ActivationKind::Relu) throw ConfigError("enclosures.kinds: relu has no comparison baseline");
    for (std::size_t a = 0; a < grid.size(); ++a) {
      for (std::size_t b = a; b < grid.size(); ++b) rows.push_back(compare_enclosure(grid[a], grid[b], kind));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> bound(g.min_bound, g.max_bound);
    for (std::size_t r = 0; r < g.random_rows; ++r) {
      double l = bound(rng);
      double u = bound(rng);
      if (l > u) std::swap(l, u);
      rows.push_back(compare_enclosure(l, u, kind));
    }
  }
  return rows;
}

inline int cmd_compare_enclosures(const RunConfig& cfg, std::ostream& log) {
  const fs::path out = ensure_out_dir(cfg);
  const auto rows = enclosure_rows(cfg.enclosures, cfg.seed);
  CsvWriter csv({"l", "u", "kind", "area_ours", "area_singh"});
  std::size_t violations = 0;
  for (const auto& r : rows) {
    violations += r.area_ours > r.area_singh + 1e-12;
    csv.add_row({format_number(r.lower), format_number(r.upper), std::string(to_string(r.kind)),
                 format_number(r.area_ours), format_number(r.area_singh)});
  }
  csv.write((out / "enclosures.csv").string());
  log << rows.size() << " rows, " << violations << " violations\n";
  return kExitOk;
}

} // namespace zonotrain::cli

#endif
