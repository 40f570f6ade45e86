/*
 *  Copyright 2026 The slicesim Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "slicesim/slicesim.hpp"

namespace fs = std::filesystem;
using namespace slicesim;

namespace {

enum Exit : int { kOk = 0, kInvalid = 1, kInvariant = 2, kMismatch = 3 };

void print_diagnostics(std::ostream& os, const std::string& path, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) os << path << ':' << d.line << ": " << d.message << '\n';
}

int cmd_validate(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  }
  auto [scenario, diags] = parse_scenario(text);
  if (!diags.empty()) {
    print_diagnostics(std::cout, path, diags);
    return kInvalid;
  }
  std::cout << "OK\n";
  return kOk;
}

int run_one(const std::string& path, std::uint64_t seed, const std::string& trace_out, const std::string& metrics_out,
            bool check, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(path);
  } catch (const ScenarioError& e) {
    print_diagnostics(err, path, e.diagnostics());
    return kInvalid;
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << '\n';
    return kInvalid;
  }
  try {
    auto result = run_scenario(scenario, seed, check ? std::optional(true) : std::nullopt);
    if (!trace_out.empty()) write_file(trace_out, result.trace_text());
    if (!metrics_out.empty()) write_file(metrics_out, result.metrics_csv());
  } catch (const InvariantViolation& e) {
    err << path << ": " << e.what() << '\n';
    return kInvariant;
  }
  return kOk;
}

fs::path resolve_golden(const std::string& golden) {
  fs::path p(golden);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("SLICESIM_GOLDEN_DIR"); dir && *dir) return fs::path(dir) / p;
  return p;
}

int cmd_diff_golden(const std::string& trace_path, const std::string& golden_path) {
  try {
    const auto actual = load_projection(read_file(trace_path));
    const auto golden = load_projection(read_file(resolve_golden(golden_path).string()));
    const auto diff = diff_projection(actual, golden);
    if (diff.equal) {
      std::cout << "MATCH " << actual.size() << " lines\n";
      return kOk;
    }
    std::cout << "MISMATCH at line " << diff.first_divergence << "\n  expected: " << diff.expected
              << "\n  actual:   " << diff.actual << '\n';
    return kMismatch;
  } catch (const TraceFormatError& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  }
}

int cmd_sweep(const std::vector<std::string>& paths, const std::string& out_dir, std::uint64_t seed, bool check,
              unsigned jobs) {
  fs::create_directories(out_dir);
  std::vector<int> codes(paths.size(), kOk);
  std::mutex err_mutex;
  std::size_t next = 0;
  std::mutex next_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(next_mutex);
        if (next >= paths.size()) return;
        i = next++;
      }
      const auto stem = fs::path(paths[i]).stem().string();
      std::ostringstream err;
      codes[i] = run_one(paths[i], seed, (fs::path(out_dir) / (stem + ".trace")).string(),
                         (fs::path(out_dir) / (stem + ".metrics.csv")).string(), check, err);
      if (!err.str().empty()) {
        std::lock_guard lock(err_mutex);
        std::cerr << err.str();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int worst = kOk;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicesim: inter-slice switching simulator"};
  app.require_subcommand(1);

  std::string path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", path, "Scenario file")->required();

  std::uint64_t seed = 0;
  std::string trace_out, metrics_out;
  bool check = false;
  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("scenario", path, "Scenario file")->required();
  run->add_option("--seed", seed, "Seed for randomized scenario fields");
  run->add_option("--trace-out", trace_out, "Trace output file");
  run->add_option("--metrics-out", metrics_out, "Metrics CSV output file");
  run->add_flag("--check-invariants", check, "Assert model invariants at every event");

  std::string trace_path, golden_path;
  auto* diff = app.add_subcommand("diff-golden", "Compare a trace against a golden projection");
  diff->add_option("trace", trace_path, "Trace file")->required();
  diff->add_option("golden", golden_path, "Golden file (relative paths resolve under $SLICESIM_GOLDEN_DIR)")->required();

  std::vector<std::string> paths;
  std::string out_dir = "sweep-out";
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run several scenarios");
  sweep->add_option("scenarios", paths, "Scenario files")->required();
  sweep->add_option("--out-dir", out_dir, "Output directory");
  sweep->add_option("--seed", seed, "Seed for every run");
  sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  sweep->add_flag("--check-invariants", check, "Assert model invariants at every event");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  if (*validate) return cmd_validate(path);
  if (*run) return run_one(path, seed, trace_out, metrics_out, check, std::cerr);
  if (*diff) return cmd_diff_golden(trace_path, golden_path);
  if (*sweep) return cmd_sweep(paths, out_dir, seed, check, jobs);
  return kInvalid;
}
