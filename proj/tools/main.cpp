#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hcfm_cli/dispatch.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hermite-Taylor / correction function Maxwell solver"};
  std::string command, config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "run | converge | selfconverge | stability | longrun | cond")
      ->required()
      ->check(CLI::IsMember(hcfm::cli::commands()));
  app.add_option("--config", config, "JSON config file (comments allowed)")->required();
  app.add_option("--out", out, "output directory (default: config 'output')");
  app.add_option("--seed", seed, "random seed override");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hcfm::cli::kConfigFailure;
  }
  return hcfm::cli::dispatch(command, config, out, seed, std::cout, std::cerr);
}
