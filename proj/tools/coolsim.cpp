// coolsim: scenario runner for the collective cooling models.
//
//   coolsim run <config>... [--out PATH] [--assert] [--jobs K]
//   coolsim compare <config>
//   coolsim algebra <config>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "coolsim/error.hpp"
#include "coolsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace coolsim;

namespace {

enum Exit : int { ok = 0, config_error = 2, refused = 3, integration = 4, assertion = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::refused_run:
    case ErrorKind::resource_limit: return refused;
    case ErrorKind::integration_failure: return integration;
    default: return config_error;
  }
}

struct Job {
  fs::path config;
  fs::path csv;
  int code = ok;
  std::string message;
  std::string summary;
};

fs::path default_output(const fs::path& config_path, const ScenarioConfig& cfg) {
  if (!cfg.output_path.empty()) return cfg.output_path;
  auto p = config_path.filename();
  p.replace_extension(".csv");
  return p;
}

void run_job(Job& job, const std::optional<fs::path>& out, bool out_is_dir, bool check) {
  try {
    const auto cfg = load_config(job.config);
    if (out) {
      job.csv = out_is_dir ? *out / default_output(job.config, cfg).filename() : *out;
    } else {
      job.csv = default_output(job.config, cfg);
    }
    const auto result = run_scenario(cfg);
    // Everything is computed before the first byte is written.
    const std::string report = format_report(result.report);
    fs::path report_path = job.csv;
    report_path += ".report";
    if (!result.report.algebra) write_file_atomic(job.csv, format_csv(result));
    write_file_atomic(report_path, report);

    const auto& r = result.report;
    job.summary = r.algebra ? "max_commutator_residual=" + format_number(r.algebra->max_commutator_residual())
                            : "fitted_rate=" + format_number(r.fitted_rate) +
                                  " analytic_rate=" + format_number(r.analytic_rate) +
                                  " relative_rate_error=" + format_number(r.relative_rate_error);
    for (const auto& w : r.warnings) job.message += "warning: " + w + "\n";
    if (check) {
      for (const auto& f : assert_thresholds(cfg, r)) {
        job.message += "assert: " + f + "\n";
        job.code = assertion;
      }
    }
  } catch (const Error& e) {
    job.code = exit_code(e.kind());
    job.message += std::string("error: ") + e.what() + "\n";
  } catch (const std::exception& e) {
    job.code = config_error;
    job.message += std::string("error: ") + e.what() + "\n";
  }
}

int cmd_run(const std::vector<std::string>& configs, const std::optional<fs::path>& out, bool check,
            std::size_t jobs_limit) {
  std::vector<Job> jobs(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) jobs[i].config = configs[i];
  const bool out_is_dir = out && (configs.size() > 1 || fs::is_directory(*out));

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(jobs[i], out, out_is_dir, check);
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs_limit, 1, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = ok;
  for (const auto& job : jobs) {
    std::cerr << job.message;
    if (!job.summary.empty()) std::cout << job.config.string() << " -> " << job.csv.string() << ": " << job.summary << "\n";
    code = std::max(code, job.code);
  }
  return code;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config_error;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity cooling of collective and individual particle motion"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run scenarios, write CSV and report files");
  std::vector<std::string> run_configs;
  std::string out;
  bool check = false;
  std::size_t jobs = 1;
  run->add_option("config", run_configs, "Scenario config files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output CSV (a directory when several configs are given)");
  run->add_flag("--assert", check, "Exit with status 5 when an acceptance threshold fails");
  run->add_option("--jobs", jobs, "Scenarios run concurrently")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "Cross-check two evolution backends");
  std::string compare_config;
  compare->add_option("config", compare_config, "Scenario config file")->required()->check(CLI::ExistingFile);

  auto* algebra = app.add_subcommand("algebra", "Print the operator-algebra residuals");
  std::string algebra_config;
  algebra->add_option("config", algebra_config, "Scenario config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  if (*run) {
    std::optional<fs::path> out_path;
    if (!out.empty()) out_path = out;
    return cmd_run(run_configs, out_path, check, jobs);
  }
  if (*compare) {
    return guarded([&] {
      std::cout << format_deviation(compare_backends(load_config(compare_config)));
      return ok;
    });
  }
  return guarded([&] {
    auto cfg = load_config(algebra_config);
    cfg.scenario = Scenario::algebra_checks;
    RunReport rep;
    rep.scenario = cfg.scenario;
    rep.algebra = algebra_checks(cfg);
    std::cout << format_report(rep);
    return ok;
  });
}
