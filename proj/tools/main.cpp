#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dlsa/errors.hpp"
#include "dlsa/pipeline.hpp"
#include "dlsa/results.hpp"
#include "dlsa/simulation.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConfig = 4;

void write_report(const dlsa::sim::SimulationReport& report, const std::filesystem::path& dir,
                  const std::string& stem) {
  std::filesystem::create_directories(dir);
  dlsa::io::write_text(dir / (stem + ".txt"), dlsa::sim::format_table(report));
  dlsa::io::write_json(dir / (stem + ".json"), dlsa::io::report_json(report));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed least squares approximation for GLM-type models"};
  app.require_subcommand(1);

  dlsa::RunConfig fit_cfg;
  std::string input, schema, partition = "round-robin";
  bool no_shrink = false;
  auto* fit = app.add_subcommand("fit", "Fit a CSV file split into K simulated workers");
  fit->add_option("--family", fit_cfg.family, "linear|logistic|poisson|cox|ordered-probit")->required();
  fit->add_option("--input", input, "CSV file with a header row")->required();
  fit->add_option("--schema", schema, "JSON column schema")->required();
  fit->add_option("--k", fit_cfg.k, "Number of partitions")->required();
  fit->add_option("--partition", partition, "round-robin|contiguous|by-column:<col>");
  fit->add_flag("--no-shrink", no_shrink, "Skip the adaptive Lasso path and DBIC selection");
  fit->add_flag("--csl", fit_cfg.csl, "Also compute the one-step CSL estimator (second round)");
  fit->add_option("--seed", fit_cfg.seed, "Seed for the round-robin shuffle");
  fit->add_option("--threads", fit_cfg.threads, "Worker threads (0 = hardware)");
  fit->add_option("--out", fit_cfg.out_dir, "Output directory")->required();

  dlsa::sim::ScenarioSpec spec;
  int setting = 1;
  std::filesystem::path sim_out;
  bool full_grid = false;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
  simulate->add_option("--example", spec.example, "1 linear, 2 logistic, 3 poisson, 4 cox, 5 ordered-probit")
      ->required();
  simulate->add_option("--setting", setting, "1 i.i.d., 2 heterogeneous")->check(CLI::IsMember({1, 2}));
  simulate->add_option("--n", spec.n_total, "Total sample size");
  simulate->add_option("--k", spec.workers, "Number of workers");
  simulate->add_option("--r", spec.replications, "Replications");
  simulate->add_option("--seed", spec.seed, "Base seed");
  simulate->add_option("--threads", spec.threads, "Threads (0 = hardware)");
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_flag("--full-grid", full_grid,
                     "Run N in {10000, 20000, 100000} with K in {5, 5, 10}, both settings, R = 500");

  std::filesystem::path summaries_dir, combine_out;
  bool combine_no_shrink = false;
  auto* combine = app.add_subcommand("combine", "Combine pre-computed summary envelopes");
  combine->add_option("--summaries", summaries_dir, "Directory of *.dlsa envelopes")->required();
  combine->add_option("--out", combine_out, "Output directory (defaults to the summaries directory)");
  combine->add_flag("--no-shrink", combine_no_shrink, "Skip the adaptive Lasso path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*fit) {
      fit_cfg.shrink = !no_shrink;
      fit_cfg.source = dlsa::FileSource{input, schema, dlsa::io::PartitionPlan::parse(partition)};
      const auto result = dlsa::run_pipeline(fit_cfg);
      std::cout << dlsa::summary_text(result);
    } else if (*simulate) {
      spec.setting = static_cast<dlsa::sim::Setting>(setting);
      if (full_grid) {
        spec.replications = 500;
        for (int s : {1, 2}) {
          for (auto [n, k] : {std::pair<std::uint64_t, std::uint64_t>{10000, 5}, {20000, 5}, {100000, 10}}) {
            auto grid = spec;
            grid.setting = static_cast<dlsa::sim::Setting>(s);
            grid.n_total = n;
            grid.workers = k;
            const auto report = dlsa::sim::run_scenario(grid);
            write_report(report, sim_out,
                         "report_setting" + std::to_string(s) + "_n" + std::to_string(n));
            std::cout << dlsa::sim::format_table(report) << "\n";
          }
        }
        return 0;
      }
      dlsa::RunConfig cfg;
      cfg.source = dlsa::SimulateSource{spec, 0};
      cfg.k = spec.workers;
      cfg.csl = true;
      cfg.out_dir = sim_out;
      cfg.threads = spec.threads;
      cfg.seed = spec.seed;
      cfg.validate();
      const auto report = dlsa::sim::run_scenario(spec);
      dlsa::run_pipeline(cfg);
      write_report(report, sim_out, "report");
      std::cout << dlsa::sim::format_table(report);
    } else if (*combine) {
      auto result = dlsa::combine_summaries(dlsa::read_summaries(summaries_dir), !combine_no_shrink);
      dlsa::write_outputs(result, combine_out.empty() ? summaries_dir : combine_out);
      std::cout << dlsa::summary_text(result);
    }
  } catch (const dlsa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dlsa::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dlsa::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
