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

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zonotrain/cli/commands.hpp"

using namespace zonotrain;
using namespace zonotrain::cli;

int main(int argc, char** argv) {
  CLI::App app{"Set-based training and fast verification of feed-forward networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string model;
  std::string out;
  std::string backend;
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"train", "train a network and write model, metrics.csv and summary.json"},
      {"eval", "clean, falsified and fast-verified accuracy"},
      {"verify", "per-sample verdicts (verdicts.csv) and summary.json"},
      {"attack", "PGD attack per sample (attack.csv)"},
      {"max-radius", "largest verifiable radius per sample (max_radius.csv)"},
      {"compare-enclosures", "enclosure areas against the parallel-line baseline (enclosures.csv)"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--model", model, "model file");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--backend", backend, "zono, zono-int-err or ibp");
    sub->add_option("--epsilon", epsilon, "perturbation radius");
    sub->add_option("--seed", seed, "random seed");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Overrides ov;
    if (sub->count("--model") > 0) ov.model = model;
    if (sub->count("--out") > 0) ov.out = out;
    if (sub->count("--backend") > 0) ov.backend = parse_backend(backend);
    if (sub->count("--epsilon") > 0) ov.epsilon = epsilon;
    if (sub->count("--seed") > 0) ov.seed = seed;
    const RunConfig cfg = load_run_config(config_path, ov, name == "train");

    if (name == "train") return cmd_train(cfg, std::cout);
    if (name == "eval") return cmd_eval(cfg, std::cout, false);
    if (name == "verify") return cmd_eval(cfg, std::cout, true);
    if (name == "attack") return cmd_attack(cfg, std::cout);
    if (name == "max-radius") return cmd_max_radius(cfg, std::cout);
    return cmd_compare_enclosures(cfg, std::cout);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUserError;
  }
}
