// gpq radial|free|minimize|campaign|report --config FILE --out DIR
//
// Exit status: 0 when every check passes, 2 on a failed check or verdict,
// 1 on any execution error (bad config, unwritable output, solver failure).

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gpq/config.hpp"
#include "gpq/errors.hpp"
#include "gpq/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ground states of trapped condensates with subcritical attraction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool verbose = false;
  std::vector<std::string> seeds;

  const std::pair<const char*, const char*> modes[] = {
      {"radial", "radial ground states and their identities"},
      {"free", "potential-free closed forms against quadrature"},
      {"minimize", "one constrained minimization in a trap"},
      {"campaign", "a q schedule with limit verdicts"},
      {"report", "re-emit a stored campaign report"},
  };
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config's `output`)");
    sub->add_flag("--verbose,-v", verbose, "progress lines on stderr");
    if (std::string(name) == "minimize") sub->add_option("--seed", seeds, "run only the named seed(s)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    gpq::RunConfig cfg = gpq::load_config(config_path);
    if (gpq::to_string(cfg.mode) != mode)
      throw gpq::ParameterError(
          fmt::format("config '{}' is for mode '{}', not '{}'", config_path, gpq::to_string(cfg.mode), mode));
    if (out_dir.empty()) {
      if (!cfg.output) throw gpq::ParameterError("no output directory: pass --out or set `output`");
      out_dir = *cfg.output;
    }
    gpq::RunOptions opt;
    opt.verbose = verbose;
    opt.seed_filter = seeds;
    opt.log = &std::cerr;
    return gpq::run_mode(cfg, out_dir, opt);
  } catch (const gpq::ConfigError& e) {
    for (const auto& m : e.messages()) std::cerr << "config error: " << m << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
