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

#ifndef ZONOTRAIN_CLI_CONFIG_HPP
#define ZONOTRAIN_CLI_CONFIG_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "zonotrain/attack.hpp"
#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/optim.hpp"
#include "zonotrain/set_propagation.hpp"
#include "zonotrain/train.hpp"

namespace zonotrain::cli {

/// Raised for any user-facing configuration problem.
class ConfigError : public Error {
public:
  using Error::Error;
};

enum class DatasetKind : std::uint8_t { Synthetic2d, Mnist };

struct DataConfig {
  DatasetKind kind = DatasetKind::Synthetic2d;
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t train_limit = 0; // 0 keeps every sample
  std::size_t test_limit = 0;
  bool normalize = false;
};

struct ModelConfig {
  std::vector<Index> widths{2, 100, 100, 100, 100, 100, 2};
  ActivationKind activation = ActivationKind::Relu;
  std::string path;
};

struct EvalConfig {
  double epsilon = 0.0;
  Backend backend = Backend::Zonotope;
  bool use_train_split = false;
};

struct MaxRadiusConfig {
  double lo = 0.0;
  double hi = 0.5;
  int iterations = 10;
};

struct EnclosureGridConfig {
  std::vector<ActivationKind> kinds{ActivationKind::Tanh, ActivationKind::Sigmoid};
  double min_bound = -4.0;
  double max_bound = 4.0;
  int grid_steps = 9;
  std::size_t random_rows = 0;
};

/// Everything a command may need; filled from an INI file plus flag overrides.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool log_wall_time = true;
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  AttackConfig attack;
  MaxRadiusConfig max_radius;
  EnclosureGridConfig enclosures;
};

namespace detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"run", {"seed", "out_dir", "log_wall_time"}},
      {"data",
       {"dataset", "train_images", "train_labels", "test_images", "test_labels", "train_limit",
        "test_limit", "normalize"}},
      {"model", {"widths", "activation", "path"}},
      {"train",
       {"method", "epochs", "batch_size", "learning_rate", "optimizer", "grad_clip_norm",
        "warmup_epochs", "rampup_epochs", "lr_decay_epochs", "lr_decay_factor", "backend",
        "input_set_mode", "fgsm_attacks", "epsilon", "tau"}},
      {"eval", {"epsilon", "backend", "split"}},
      {"attack", {"iterations", "step_size"}},
      {"max_radius", {"lo", "hi", "iterations"}},
      {"enclosures", {"kinds", "min_bound", "max_bound", "grid_steps", "random_rows"}},
  };
  return s;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

template <>
inline bool parse_value<bool>(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

class Reader {
public:
  explicit Reader(const ptree& tree) : tree_(tree) {}

  template <typename T>
  void get(const std::string& section, const std::string& key, T& target) const {
    if (auto raw = text(section, key)) target = parse_value<T>(section + "." + key, *raw);
  }

  [[nodiscard]] std::optional<std::string> text(const std::string& section,
                                                const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto value = sec->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return *value;
  }

private:
  const ptree& tree_;
};

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

} // namespace detail

/// Parses the INI text; unknown sections or keys are rejected.
inline RunConfig parse_config(std::istream& in) {
  detail::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto& schema = detail::schema();
  for (const auto& [section, body] : tree) {
    const auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (it->second.count(key) == 0) {
        throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
      }
    }
  }

  RunConfig cfg;
  const detail::Reader r(tree);
  r.get("run", "seed", cfg.seed);
  r.get("run", "out_dir", cfg.out_dir);
  r.get("run", "log_wall_time", cfg.log_wall_time);

  if (auto v = r.text("data", "dataset")) {
    if (*v == "synthetic2d") {
      cfg.data.kind = DatasetKind::Synthetic2d;
    } else if (*v == "mnist") {
      cfg.data.kind = DatasetKind::Mnist;
    } else {
      throw ConfigError("config key 'data.dataset': expected synthetic2d or mnist, got '" + *v + "'");
    }
  }
  r.get("data", "train_images", cfg.data.train_images);
  r.get("data", "train_labels", cfg.data.train_labels);
  r.get("data", "test_images", cfg.data.test_images);
  r.get("data", "test_labels", cfg.data.test_labels);
  r.get("data", "train_limit", cfg.data.train_limit);
  r.get("data", "test_limit", cfg.data.test_limit);
  r.get("data", "normalize", cfg.data.normalize);

  if (auto v = r.text("model", "widths")) {
    cfg.model.widths.clear();
    for (const auto& item : detail::split_list(*v)) {
      cfg.model.widths.push_back(detail::parse_value<Index>("model.widths", item));
    }
  }
  if (auto v = r.text("model", "activation")) {
    cfg.model.activation = detail::wrap("model.activation", [&] { return parse_activation(*v); });
  }
  r.get("model", "path", cfg.model.path);

  auto& t = cfg.train;
  if (auto v = r.text("train", "method")) {
    t.method = detail::wrap("train.method", [&] { return parse_train_method(*v); });
  }
  r.get("train", "epochs", t.epochs);
  r.get("train", "batch_size", t.batch_size);
  r.get("train", "learning_rate", t.learning_rate);
  if (auto v = r.text("train", "optimizer")) {
    t.optimizer = detail::wrap("train.optimizer", [&] { return parse_optimizer(*v); });
  }
  r.get("train", "grad_clip_norm", t.grad_clip_norm);
  r.get("train", "warmup_epochs", t.schedule.warmup_epochs);
  r.get("train", "rampup_epochs", t.schedule.rampup_epochs);
  if (auto v = r.text("train", "lr_decay_epochs")) {
    t.schedule.lr_decay_epochs.clear();
    for (const auto& item : detail::split_list(*v)) {
      t.schedule.lr_decay_epochs.push_back(detail::parse_value<int>("train.lr_decay_epochs", item));
    }
  }
  r.get("train", "lr_decay_factor", t.schedule.lr_decay_factor);
  if (auto v = r.text("train", "backend")) {
    t.backend = detail::wrap("train.backend", [&] { return parse_backend(*v); });
  }
  if (auto v = r.text("train", "input_set_mode")) {
    t.input_set_mode = detail::wrap("train.input_set_mode", [&] { return parse_input_set_mode(*v); });
  }
  r.get("train", "fgsm_attacks", t.fgsm_attacks);
  r.get("train", "epsilon", t.epsilon);
  r.get("train", "tau", t.tau);

  r.get("eval", "epsilon", cfg.eval.epsilon);
  if (auto v = r.text("eval", "backend")) {
    cfg.eval.backend = detail::wrap("eval.backend", [&] { return parse_backend(*v); });
  }
  if (auto v = r.text("eval", "split")) {
    if (*v != "train" && *v != "test") {
      throw ConfigError("config key 'eval.split': expected train or test, got '" + *v + "'");
    }
    cfg.eval.use_train_split = *v == "train";
  }

  r.get("attack", "iterations", cfg.attack.iterations);
  r.get("attack", "step_size", cfg.attack.step_size);

  r.get("max_radius", "lo", cfg.max_radius.lo);
  r.get("max_radius", "hi", cfg.max_radius.hi);
  r.get("max_radius", "iterations", cfg.max_radius.iterations);

  if (auto v = r.text("enclosures", "kinds")) {
    cfg.enclosures.kinds.clear();
    for (const auto& item : detail::split_list(*v)) {
      cfg.enclosures.kinds.push_back(
          detail::wrap("enclosures.kinds", [&] { return parse_activation(item); }));
    }
  }
  r.get("enclosures", "min_bound", cfg.enclosures.min_bound);
  r.get("enclosures", "max_bound", cfg.enclosures.max_bound);
  r.get("enclosures", "grid_steps", cfg.enclosures.grid_steps);
  r.get("enclosures", "random_rows", cfg.enclosures.random_rows);

  cfg.train.seed = cfg.seed;
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Checks everything that does not depend on the command.
inline void validate(const RunConfig& cfg) {
  if (cfg.model.widths.size() < 2) throw ConfigError("model.widths: need at least two widths");
  for (Index w : cfg.model.widths) {
    if (w <= 0) throw ConfigError("model.widths: widths must be positive");
  }
  detail::wrap("train", [&] {
    cfg.train.validate();
    return 0;
  });
  if (!(cfg.eval.epsilon >= 0.0)) throw ConfigError("eval.epsilon must be non-negative");
  detail::wrap("attack", [&] {
    AttackConfig a = cfg.attack;
    a.epsilon = cfg.eval.epsilon;
    a.validate();
    return 0;
  });
  if (!(cfg.max_radius.hi > cfg.max_radius.lo) || cfg.max_radius.lo < 0.0) {
    throw ConfigError("max_radius: need 0 <= lo < hi");
  }
  if (cfg.max_radius.iterations < 1) throw ConfigError("max_radius.iterations must be >= 1");
  if (!(cfg.enclosures.max_bound >= cfg.enclosures.min_bound)) {
    throw ConfigError("enclosures: max_bound must be >= min_bound");
  }
  if (cfg.enclosures.grid_steps < 1) throw ConfigError("enclosures.grid_steps must be >= 1");
  if (cfg.data.kind == DatasetKind::Mnist &&
      (cfg.data.train_images.empty() || cfg.data.train_labels.empty() ||
       cfg.data.test_images.empty() || cfg.data.test_labels.empty())) {
    throw ConfigError("data: mnist needs train_images, train_labels, test_images and test_labels");
  }
}

} // namespace zonotrain::cli

#endif
