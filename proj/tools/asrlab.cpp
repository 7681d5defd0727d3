#include <CLI11.hpp>

#include "asrlab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"asrlab: smoothing-defense experiments on a synthetic toy ASR task"};
  app.require_subcommand(1);

  int rc = 0;
  for (const auto& name : asrlab::harness::command_names()) {
    auto* sub = app.add_subcommand(name);
    auto config = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>();
    auto has_seed = std::make_shared<bool>(false);
    sub->add_option("--config", *config, "experiment config (JSON)")->required();
    sub->add_option("--out", *out, "output directory")->required();
    sub->add_option("--seed", *seed, "override the config seed")
        ->each([has_seed](const std::string&) { *has_seed = true; });
    sub->callback([&rc, name, config, out, seed, has_seed] {
      std::optional<std::uint64_t> s;
      if (*has_seed) s = *seed;
      rc = asrlab::harness::run(name, *config, *out, s);
    });
  }

  CLI11_PARSE(app, argc, argv);
  return rc;
}
