// Command-line driver: tic <subcommand> --config <path> --out <dir>
//                          [--seed N] [--threads N]
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tic/config.hpp"
#include "tic/errors.hpp"
#include "tic/runner.hpp"
#include "tic/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium policies and strong-equilibrium verification for "
               "moment-objective control of a linear SDE"};
  app.set_version_flag("--version", std::string(tic::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;

  for (const char* name : {"moments", "solve", "verify", "sweep", "simulate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override simulation seed")
        ->each([&seed_given](const std::string&) { seed_given = true; });
    sub->add_option("--threads", threads, "worker threads (or TIC_THREADS)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const tic::ExperimentConfig config = tic::load_config_file(config_path);
    tic::RunOptions options;
    options.out_dir = out_dir;
    if (seed_given) options.seed = seed;
    options.threads = tic::resolve_threads(threads);

    const std::string name = app.get_subcommands().front()->get_name();
    const tic::RunResult result =
        tic::run(tic::subcommand_from_name(name), config, options);

    for (const std::string& file : result.files) std::cout << file << '\n';
    if (!result.verdict.empty())
      std::cout << "verdict: " << result.verdict << " (witnesses: " << result.witness_count
                << ")\n";
    return 0;
  } catch (const tic::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const tic::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const tic::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
