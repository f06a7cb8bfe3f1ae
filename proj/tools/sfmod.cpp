// sfmod: generate patterns, simulate storage, sweep beta, validate with walkers,
// and design the control/probe offset for an image.

#include <sfmod/cli/commands.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-frequency filtering of images stored under coherent diffusion"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  using Command = std::function<sfmod::cli::CommandResult(const sfmod::cli::RunConfig&, bool)>;
  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"generate", {"write the input field, intensity and spectrum images", sfmod::cli::cmd_generate}},
      {"store", {"store and retrieve the input, report metrics", sfmod::cli::cmd_store}},
      {"sweep", {"visibility against beta for each storage time", sfmod::cli::cmd_sweep}},
      {"mc-validate", {"Monte-Carlo walker convergence against the spectral propagator", sfmod::cli::cmd_mc_validate}},
      {"design", {"recommend alpha and beta for the input image", sfmod::cli::cmd_design}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "configuration file (defaults apply when omitted)");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "random seed (overrides mc.seed)");
    sub->add_flag("--quiet", quiet, "suppress the summary on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    sfmod::cli::RunConfig config =
        config_path.empty() ? sfmod::cli::parse_config(std::string{}) : sfmod::cli::load_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed) config.seed = *seed;
    for (const auto& [name, entry] : commands) {
      if (app.got_subcommand(name)) entry.second(config, quiet);
    }
  } catch (const sfmod::invalid_input& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const sfmod::numerical_failure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
