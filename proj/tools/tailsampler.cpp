#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tailsampler/config.hpp"
#include "tailsampler/experiments.hpp"

namespace {

// TAILSAMPLER_THREADS wins over --threads when it holds a positive integer.
unsigned resolve_threads(unsigned flag) {
  const char *env = std::getenv("TAILSAMPLER_THREADS");
  if (!env || !*env)
    return flag;
  try {
    std::size_t used = 0;
    const long v = std::stol(env, &used);
    if (used == std::string(env).size() && v > 0)
      return static_cast<unsigned>(v);
  } catch (const std::exception &) {
  }
  std::cerr << "ignoring TAILSAMPLER_THREADS=" << env << " (not a positive integer)\n";
  return flag;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Importance sampling for rare events of black-box losses"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  const char *commands[][2] = {
      {"estimate", "IS estimates over a sweep of levels u"},
      {"network", "distribution-network failure probabilities"},
      {"pcr", "portfolio credit risk excess-loss probabilities"},
      {"selfsim", "conditional sample clouds at levels l0 and u"},
      {"rate", "rate-function report and level-set scan"},
      {"crossval", "cross-validation of the lower level l"},
  };
  for (const auto &c : commands) {
    CLI::App *sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  tailsampler::RunOptions opt;
  opt.out_dir = out_dir;
  opt.threads = resolve_threads(threads);
  opt.base_dir = std::filesystem::path(config_path).parent_path();
  opt.log = &std::cerr;
  if (app.get_subcommands().front()->count("--seed") > 0)
    opt.seed = seed;

  try {
    const auto config = tailsampler::load_json_file(config_path);
    const tailsampler::CommandResult res = tailsampler::run_command(name, config, opt);
    for (const auto &f : res.files)
      std::cout << f.string() << '\n';
    if (!res.failed.empty())
      std::cerr << res.failed.size() << " sweep point(s) failed\n";
    return res.exit_code;
  } catch (const tailsampler::ConfigError &e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
