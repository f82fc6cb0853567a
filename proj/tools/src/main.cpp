#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "strictlyap/cli/commands.hpp"
#include "strictlyap/cli/config.hpp"
#include "strictlyap/cli/fixtures.hpp"

namespace cli = strictlyap::cli;

int main(int argc, char** argv) {
  CLI::App app{"Strict Lyapunov function construction and checking"};
  app.require_subcommand(1);

  std::string config_path;
  std::string fixture;
  std::string check;
  std::string example;
  std::string reference;
  bool print_config = false;
  cli::RunOptions opts;
  std::uint64_t seed = 0;
  std::size_t samples = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      auto* c = sub->add_option("--config", config_path, "Problem file");
      auto* f = sub->add_option("--fixture", fixture, "Built-in problem instead of a file");
      c->excludes(f);
    }
    sub->add_option("--out", opts.out_dir, "Directory for CSV output")->capture_default_str();
    sub->add_option("--seed", seed, "Sampling seed (overrides the config)");
    sub->add_option("--samples", samples, "Number of samples per check (overrides the config)");
  };

  auto* pe = app.add_subcommand("pe", "Estimate persistency-of-excitation constants");
  add_common(pe, true);
  auto* strictify = app.add_subcommand("strictify", "Build and validate a strict Lyapunov certificate");
  add_common(strictify, true);
  auto* verify = app.add_subcommand("verify", "Run one sampled check");
  verify->add_option("check", check, "uppd | issp-lyap | disp-lyap | strict-iss-lyap | iss-estimate")->required();
  add_common(verify, true);
  auto* simulate = app.add_subcommand("simulate", "Integrate the closed loop and write trajectory CSVs");
  add_common(simulate, true);
  auto* ex = app.add_subcommand("example", "Run a built-in problem end to end");
  ex->add_option("name", example, "rigid-body | counterexample-elw | scalar-linear")->required();
  ex->add_option("--reference", reference, "rigid-body reference trajectory \"w1r, w2r, w3r\"");
  ex->add_flag("--print-config", print_config, "Print the problem file and exit");
  add_common(ex, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  try {
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--samples")) opts.samples = samples;
    if (!reference.empty()) opts.reference = reference;

    auto load = [&]() {
      if (!fixture.empty()) return cli::fixture_config(fixture);
      if (config_path.empty()) throw strictlyap::Error(strictlyap::ErrorKind::Config, "--config or --fixture is required");
      return cli::load_config(config_path);
    };

    if (sub == pe) return cli::cmd_pe(load(), opts, std::cout);
    if (sub == strictify) return cli::cmd_strictify(load(), opts, std::cout);
    if (sub == verify) return cli::cmd_verify(load(), check, opts, std::cout);
    if (sub == simulate) return cli::cmd_simulate(load(), opts, std::cout);
    if (print_config) {
      auto text = cli::fixture_text(example);
      if (!text) throw strictlyap::Error(strictlyap::ErrorKind::Config, "unknown fixture '" + example + "'");
      std::cout << *text;
      return cli::kPass;
    }
    return cli::cmd_example(example, opts, std::cout);
  } catch (const strictlyap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kValidationFailure;
  }
}
