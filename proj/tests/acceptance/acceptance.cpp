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

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "zonotrain/cli/commands.hpp"

namespace fs = std::filesystem;
using namespace zonotrain;
using namespace zonotrain::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const Backend kBackends[] = {Backend::Zonotope, Backend::ZonotopeIntervalErrors, Backend::Ibp};
const ActivationKind kKinds[] = {ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Sigmoid};

// Evaluation runs collected by criteria 6 and 7 for the consistency check.
struct EvaluationRun {
  std::string name;
  Metrics zono;
  Metrics ibp;
};
std::vector<EvaluationRun> g_runs;

EvaluationRun evaluate_both(const std::string& name, const Network& net, const Dataset& data, double eps) {
  EvaluationRun run{name, {}, {}};
  run.zono = evaluate(net, data, eps, AttackConfig{});
  EvaluateOptions ibp;
  ibp.backend = Backend::Ibp;
  run.ibp = evaluate(net, data, eps, AttackConfig{}, ibp);
  return run;
}

Outcome enclosure_soundness() {
  std::mt19937_64 rng(1001);
  std::size_t violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ActivationKind kind = kKinds[trial % 3];
    std::uniform_int_distribution<int> layers(1, 3);
    std::uniform_int_distribution<Index> dims(1, 8);
    const Index n0 = dims(rng);
    const auto net = random_network(rng, n0, dims(rng), layers(rng), 32, kind);
    const Index q = dims(rng);
    const Zonotope in(uniform_vector(rng, n0, -1.0, 1.0), uniform_matrix(rng, n0, q, -0.5, 0.5));
    for (Backend b : kBackends) {
      const Interval hull = interval_hull(set_forward(net, in, b).output);
      for (int s = 0; s < 1000; ++s) {
        const Vector y = predict(net, sample_point(rng, in));
        const double out = std::max((hull.lower - y).maxCoeff(), (y - hull.upper).maxCoeff());
        worst = std::max(worst, out);
        violations += out > 1e-9;
      }
    }
  }
  return {violations == 0, "100 networks x 3 backends x 1000 samples, violations " +
                               std::to_string(violations) + ", worst excess " + fmt("%.3g", worst)};
}

Outcome approximation_errors() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> bound(-6.0, 6.0);
  double worst = 0.0;
  for (ActivationKind kind : kKinds) {
    for (int i = 0; i < 10000; ++i) {
      double l = bound(rng);
      double u = bound(rng);
      if (l > u) std::swap(l, u);
      const double slope = linear_slope(l, u, kind);
      const auto err = approx_errors(slope, l, u, kind);
      const auto [glo, ghi] = grid_errors(kind, slope, l, u, 100000);
      worst = std::max({worst, std::abs(err.lower - glo), std::abs(err.upper - ghi)});
    }
  }
  return {worst <= 1e-6, "3 x 10^4 intervals, max deviation from grid search " + fmt("%.3g", worst)};
}

Outcome area_dominance() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> bound(-6.0, 6.0);
  std::size_t violations = 0;
  for (ActivationKind kind : {ActivationKind::Tanh, ActivationKind::Sigmoid}) {
    for (int i = 0; i < 10000; ++i) {
      double l = bound(rng);
      double u = bound(rng);
      if (l > u) std::swap(l, u);
      const auto row = cli::compare_enclosure(l, u, kind);
      violations += row.area_ours > row.area_singh + 1e-12;
    }
  }
  const auto ref = cli::compare_enclosure(-1.0, 1.0, ActivationKind::Tanh);
  const bool pair = std::abs(ref.area_ours - 0.327020) <= 1e-4 && std::abs(ref.area_singh - 1.366480) <= 1e-4;
  return {violations == 0 && pair, "violations " + std::to_string(violations) + ", tanh [-1,1] areas (" +
                                       fmt("%.6f", ref.area_ours) + ", " + fmt("%.6f", ref.area_singh) + ")"};
}

Outcome gradient_fidelity() {
  std::mt19937_64 rng(1004);
  std::size_t bad = 0;
  std::size_t total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const ActivationKind kind = kKinds[trial % 3];
    const double eps = trial % 2 == 0 ? 0.01 : 0.05;
    const double tau = (trial / 2) % 2 == 0 ? 0.1 : 0.5;
    const Index classes = 2 + trial % 3;
    Network net;
    Zonotope in;
    do {
      net = random_network(rng, 3, classes, 1 + trial % 3, 16, kind);
      in = linf_ball(uniform_vector(rng, 3, 0.0, 1.0), eps);
    } while (min_bound_clearance(net, in, Backend::Zonotope) < 1e-3);
    const Vector t = one_hot(trial % classes, classes);
    const SetLossConfig cfg{tau, eps};
    const auto fwd = set_forward(net, in);
    const auto g = set_backward(net, fwd.trace, set_loss_gradient(t, fwd.output, cfg));
    const auto f = [&] { return set_loss(t, set_forward(net, in).output, cfg); };
    for (std::size_t k = 0; k < net.size(); ++k) {
      auto* lin = std::get_if<Linear>(&net.layer(k));
      if (lin == nullptr) continue;
      for (Index i = 0; i < lin->weights.size(); ++i, ++total) {
        bad += !rel_close(central_difference(f, lin->weights.data()[i], 1e-6), g.weights[k].data()[i], 1e-4);
      }
      for (Index i = 0; i < lin->bias.size(); ++i, ++total) {
        bad += !rel_close(central_difference(f, lin->bias(i), 1e-6), g.biases[k](i), 1e-4);
      }
    }
  }
  return {bad == 0, std::to_string(total) + " parameter entries, mismatches " + std::to_string(bad)};
}

Outcome degeneracy() {
  const Dataset data = synthetic_2d();
  double worst = 0.0;
  for (ActivationKind kind : kKinds) {
    const Network init = init_params({{2, 32, 32, 2}, kind}, 11);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 10;
    cfg.epochs = 10;
    cfg.seed = 11;
    cfg.method = TrainMethod::Set;
    const Network set = train(init, data, cfg).network;
    cfg.method = TrainMethod::Point;
    const Network point = train(init, data, cfg).network;
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (const auto* a = std::get_if<Linear>(&set.layer(k))) {
        const auto& b = std::get<Linear>(point.layer(k));
        worst = std::max({worst, (a->weights - b.weights).cwiseAbs().maxCoeff(), (a->bias - b.bias).cwiseAbs().maxCoeff()});
      }
    }
  }
  return {worst <= 1e-12, "20 SGD steps x 3 activations, max parameter difference " + fmt("%.3g", worst)};
}

Outcome two_dimensional_benchmark() {
  const Dataset data = synthetic_2d();
  int dominated = 0;
  bool all_perfect = true;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Network init = init_params({{2, 100, 100, 100, 100, 100, 2}, ActivationKind::Relu}, seed);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 10;
    cfg.learning_rate = 0.01;
    cfg.seed = seed;
    cfg.method = TrainMethod::Point;
    const Network point = train(init, data, cfg).network;
    cfg.method = TrainMethod::Set;
    cfg.epsilon = 0.05;
    cfg.tau = 0.1;
    const Network set = train(init, data, cfg).network;
    const auto rp = evaluate_both("2d point seed " + std::to_string(seed), point, data, 0.05);
    const auto rs = evaluate_both("2d set seed " + std::to_string(seed), set, data, 0.05);
    g_runs.push_back(rp);
    g_runs.push_back(rs);
    all_perfect = all_perfect && rp.zono.clean == 1.0 && rs.zono.clean == 1.0;
    dominated += rs.zono.fast_verified > rp.zono.fast_verified;
    detail << " [seed " << seed << ": acc " << rp.zono.clean << "/" << rs.zono.clean << ", verified "
           << rp.zono.fast_verified << "/" << rs.zono.fast_verified << "]";
  }
  return {all_perfect && dominated >= 4,
          "point/set; 100% accuracy on all runs: " + std::string(all_perfect ? "yes" : "no") +
              ", set verified > point verified in " + std::to_string(dominated) + "/5 seeds;" + detail.str()};
}

Outcome mnist_mlp() {
  const fs::path dir = fs::path(ZONOTRAIN_SOURCE_DIR) / "data" / "mnist";
  if (!fs::exists(dir / "train-images-idx3-ubyte")) {
    return {false, "MNIST files missing; run scripts/prepare_mnist.py"};
  }
  const Dataset train_set = load_mnist_idx((dir / "train-images-idx3-ubyte").string(), (dir / "train-labels-idx1-ubyte").string());
  const Dataset test_set = load_mnist_idx((dir / "t10k-images-idx3-ubyte").string(), (dir / "t10k-labels-idx1-ubyte").string()).head(1000);
  const Network init = normalize_into_network(kMnistMean, kMnistStd, init_params({{784, 100, 100, 10}, ActivationKind::Relu}, 1));
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 64;
  cfg.learning_rate = 5e-3;
  cfg.seed = 1;
  cfg.method = TrainMethod::Point;
  const Network point = train(init, train_set, cfg).network;
  cfg.method = TrainMethod::Set;
  cfg.epsilon = 0.1;
  cfg.tau = 0.1;
  cfg.schedule.warmup_epochs = 1;
  cfg.schedule.rampup_epochs = 4;
  const Network set = train(init, train_set, cfg).network;
  const auto rp = evaluate_both("mnist point", point, test_set, 0.1);
  const auto rs = evaluate_both("mnist set", set, test_set, 0.1);
  g_runs.push_back(rp);
  g_runs.push_back(rs);
  const double gap = rs.zono.fast_verified - rp.zono.fast_verified;
  return {gap >= 0.30 && rs.zono.clean >= 0.85,
          "1000 test samples at eps 0.1: point clean " + fmt("%.3f", rp.zono.clean) + " verified " +
              fmt("%.3f", rp.zono.fast_verified) + "; set clean " + fmt("%.3f", rs.zono.clean) + " verified " +
              fmt("%.3f", rs.zono.fast_verified) + "; gap " + fmt("%.3f", gap)};
}

Outcome complexity_scaling() {
  std::mt19937_64 rng(1008);
  const Network net = random_network(rng, 64, 10, 2, 32, ActivationKind::Tanh);
  const Vector c = uniform_vector(rng, 64, 0.0, 1.0);
  const Zonotope small(c, uniform_matrix(rng, 64, 1024, -1e-3, 1e-3));
  const Zonotope large(c, uniform_matrix(rng, 64, 2048, -1e-3, 1e-3));
  auto time_once = [&net](const Zonotope& z) {
    const auto t0 = Clock::now();
    const auto out = set_forward(net, z);
    volatile double sink = out.output.center()(0);
    (void)sink;
    return seconds_since(t0);
  };
  std::vector<double> ratios;
  for (int trial = 0; trial < 20; ++trial) {
    double a = 0.0;
    double b = 0.0;
    for (int r = 0; r < 5; ++r) {
      a += time_once(small);
      b += time_once(large);
    }
    ratios.push_back(b / a);
  }
  std::nth_element(ratios.begin(), ratios.begin() + 10, ratios.end());
  const double median = ratios[10];
  return {median >= 1.5 && median <= 3.0, "median time ratio q=2048 vs q=1024 over 20 trials: " + fmt("%.3f", median)};
}

Outcome verifier_consistency() {
  if (g_runs.empty()) return {false, "no evaluation runs recorded"};
  std::size_t conflicts = 0;
  std::size_t ibp_only = 0;
  std::size_t samples = 0;
  for (const auto& run : g_runs) {
    conflicts += run.zono.conflicts + run.ibp.conflicts;
    for (std::size_t i = 0; i < run.zono.verdicts.size(); ++i, ++samples) {
      ibp_only += run.ibp.verdicts[i].verified && !run.zono.verdicts[i].verified;
    }
  }
  return {conflicts == 0 && ibp_only == 0,
          std::to_string(g_runs.size()) + " runs, " + std::to_string(samples) + " samples: verified+falsified " +
              std::to_string(conflicts) + ", ibp-verified but not zonotope-verified " + std::to_string(ibp_only)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome serialization() {
  const fs::path root = fs::temp_directory_path() / "zonotrain_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  std::mt19937_64 rng(1010);
  bool models_ok = true;
  for (ActivationKind kind : kKinds) {
    const Network net = random_network(rng, 7, 4, 3, 20, kind);
    const auto file = (root / "m.znt").string();
    save_model(net, file);
    const Network back = load_model(file);
    models_ok = models_ok && back == net && serialize(back) == serialize(net);
  }
  auto cfg = cli::parse_config_string(
      "[run]\nseed = 5\nlog_wall_time = false\n[model]\nwidths = 2, 32, 32, 2\n"
      "[train]\nepochs = 30\nbatch_size = 10\nepsilon = 0.05\ntau = 0.1\n"
      "[eval]\nepsilon = 0.05\nsplit = train\n[enclosures]\nrandom_rows = 100\n");
  std::ostringstream sink;
  const std::vector<std::string> files{"metrics.csv", "verdicts.csv", "attack.csv", "max_radius.csv", "enclosures.csv", "model.znt"};
  for (const char* name : {"a", "b"}) {
    cfg.out_dir = (root / name).string();
    cfg.model.path.clear();
    cli::cmd_train(cfg, sink);
    cfg.model.path = (root / name / "model.znt").string();
    cli::cmd_eval(cfg, sink, true);
    cli::cmd_attack(cfg, sink);
    cli::cmd_max_radius(cfg, sink);
    cli::cmd_compare_enclosures(cfg, sink);
  }
  std::size_t identical = 0;
  for (const auto& f : files) {
    const std::string a = slurp(root / "a" / f);
    identical += !a.empty() && a == slurp(root / "b" / f);
  }
  fs::remove_all(root);
  return {models_ok && identical == files.size(),
          std::string("model round trip ") + (models_ok ? "bit-exact" : "differs") + ", " +
              std::to_string(identical) + "/" + std::to_string(files.size()) + " outputs byte-identical"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"enclosure soundness", enclosure_soundness},
      {"approximation errors vs grid search", approximation_errors},
      {"enclosure area dominance", area_dominance},
      {"set gradient vs finite differences", gradient_fidelity},
      {"degenerate set training equals point training", degeneracy},
      {"2D benchmark", two_dimensional_benchmark},
      {"MNIST MLP", mnist_mlp},
      {"set_forward scaling in generator count", complexity_scaling},
      {"verifier consistency", verifier_consistency},
      {"serialization and reproducibility", serialization},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << ", "
              << fmt("%.1f", seconds_since(t0)) << " s): " << o.detail << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
