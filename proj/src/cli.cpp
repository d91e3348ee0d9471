#include "relucert/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "relucert/certifier.hpp"
#include "relucert/lower_bound.hpp"
#include "relucert/model_io.hpp"
#include "relucert/oracle.hpp"
#include "relucert/records.hpp"

namespace relucert {

namespace {

using nlohmann::json;

std::size_t resolve_jobs(std::size_t jobs, std::size_t instances) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  return std::min(jobs, std::max<std::size_t>(instances, 1));
}

// Runs fn(i) for every instance on a small pool and streams each record as
// soon as every earlier record has been printed, so partial output is usable
// while later instances are still running. Returns the first per-instance
// error, if any.
std::string run_instances(std::size_t count, std::size_t jobs, std::ostream& out,
                          const std::function<json(std::size_t)>& fn) {
  std::vector<std::optional<json>> slots(count);
  std::vector<std::string> errors(count);
  std::mutex mu;
  std::size_t flushed = 0;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      json record;
      std::string error;
      try {
        record = fn(i);
        validate_record(record);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard<std::mutex> lock(mu);
      slots[i] = std::move(record);
      errors[i] = std::move(error);
      while (flushed < count && slots[flushed]) {
        if (errors[flushed].empty()) out << slots[flushed]->dump() << '\n';
        flushed += 1;
      }
    }
  };

  jobs = resolve_jobs(jobs, count);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  out.flush();
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i].empty()) {
      return "instance " + std::to_string(i) + ": " + errors[i];
    }
  }
  return {};
}

struct LoadedProblem {
  Network net;
  std::vector<InputPoint> inputs;
};

LoadedProblem load_problem(const std::string& model_path,
                           const std::string& inputs_path) {
  LoadedProblem p{load_model(model_path), load_inputs(inputs_path)};
  for (std::size_t i = 0; i < p.inputs.size(); ++i) {
    if (p.inputs[i].size() != p.net.input_dim()) {
      throw InputError(inputs_path + ": input " + std::to_string(i) + " has " +
                       std::to_string(p.inputs[i].size()) +
                       " entries but the model expects " +
                       std::to_string(p.net.input_dim()));
    }
  }
  return p;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"L2 local-robustness certification for feed-forward ReLU classifiers"};
  app.require_subcommand(1);

  std::string model_path;
  std::string inputs_path;
  double epsilon = 0.0;
  double epsilon_max = 0.0;
  bool full_queue = false;
  bool exact_fallback = false;
  std::size_t batch_size = 32;
  std::int64_t timeout_ms = 0;
  std::size_t jobs = 0;
  std::string fixture_spec;
  std::string out_path;
  double oracle_epsilon = -1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_path, "model file (JSON)")->required();
    cmd->add_option("--inputs", inputs_path, "inputs file (JSON array of vectors)")
        ->required();
    cmd->add_option("--jobs", jobs, "worker pool size (default: logical cores)")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* certify_cmd =
      app.add_subcommand("certify", "decide robustness within an L2 ball");
  add_common(certify_cmd);
  certify_cmd->add_option("--epsilon", epsilon, "ball radius")
      ->required()
      ->check(CLI::PositiveNumber);
  certify_cmd->add_flag("--full-queue", full_queue,
                        "keep searching past unresolved boundaries");
  certify_cmd->add_flag("--exact-fallback", exact_fallback,
                        "resolve unresolved boundaries with the exact solver");
  certify_cmd->add_option("--batch-size", batch_size, "constraints dequeued per step")
      ->check(CLI::PositiveNumber);
  certify_cmd->add_option("--timeout-ms", timeout_ms, "per-instance time budget")
      ->check(CLI::PositiveNumber);

  CLI::App* lower_cmd = app.add_subcommand(
      "lower-bound", "certified lower bound on minimal adversarial distortion");
  add_common(lower_cmd);
  lower_cmd->add_option("--epsilon-max", epsilon_max, "search radius cap")
      ->required()
      ->check(CLI::PositiveNumber);
  lower_cmd->add_option("--timeout-ms", timeout_ms, "per-instance time budget")
      ->check(CLI::PositiveNumber);

  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "exact minimal distortion by brute force (tiny models only)");
  add_common(oracle_cmd);
  oracle_cmd->add_option("--epsilon", oracle_epsilon,
                         "also report whether the model is robust at this radius")
      ->check(CLI::NonNegativeNumber);

  CLI::App* gen_cmd =
      app.add_subcommand("gen-fixture", "write a deterministic random model");
  gen_cmd->add_option("--spec", fixture_spec,
                      "e.g. input_dim=2,hidden=4x4,num_classes=3,seed=7,scale=1.0")
      ->required();
  gen_cmd->add_option("--out", out_path, "output model path")->required();

  try {
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (gen_cmd->parsed()) {
      save_model(generate_fixture(parse_fixture_spec(fixture_spec)), out_path);
      return 0;
    }

    const LoadedProblem problem = load_problem(model_path, inputs_path);
    std::string failure;

    if (certify_cmd->parsed()) {
      CertifyConfig config;
      config.epsilon = epsilon;
      config.full_queue = full_queue;
      config.exact_fallback = exact_fallback;
      config.batch_size = batch_size;
      if (timeout_ms > 0) config.timeout = std::chrono::milliseconds(timeout_ms);
      failure = run_instances(problem.inputs.size(), jobs, out, [&](std::size_t i) {
        return certify_record(i, epsilon, certify(problem.net, problem.inputs[i], config));
      });
    } else if (lower_cmd->parsed()) {
      LowerBoundConfig config;
      if (timeout_ms > 0) config.timeout = std::chrono::milliseconds(timeout_ms);
      failure = run_instances(problem.inputs.size(), jobs, out, [&](std::size_t i) {
        return lower_bound_record(
            i, epsilon_max,
            certified_lower_bound(problem.net, problem.inputs[i], epsilon_max, config));
      });
    } else {
      if (problem.net.total_hidden() > kOracleMaxNeurons) {
        throw CapacityError("model has " + std::to_string(problem.net.total_hidden()) +
                            " hidden neurons; the oracle handles at most " +
                            std::to_string(kOracleMaxNeurons));
      }
      std::optional<double> eps;
      if (oracle_epsilon >= 0.0) eps = oracle_epsilon;
      failure = run_instances(problem.inputs.size(), jobs, out, [&](std::size_t i) {
        return oracle_record(i, exact_min_distortion(problem.net, problem.inputs[i]), eps);
      });
    }

    if (!failure.empty()) {
      err << "error: " << failure << '\n';
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace relucert
