#include <iostream>

#include "commands.hpp"
#include "iris3d/error.hpp"
#include "run_support.hpp"

namespace {

constexpr int kExitIo = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitUsage = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iris3d: 3D iris surface reconstruction and sector classification"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", iris3d::cli::version_string());
  app.config_formatter(std::make_shared<iris3d::cli::JsonConfig>());
  app.set_config("--config", "", "JSON config; command-line flags take precedence");

  iris3d::cli::GlobalOptions global;
  global.arguments.assign(argv + 1, argv + argc);
  app.add_option("--seed", global.seed, "Seed for every stochastic stage")->capture_default_str();
  app.add_option("--jobs", global.jobs, "Volumes processed in parallel")->capture_default_str()->check(CLI::PositiveNumber);
  iris3d::cli::register_commands(app, global);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    app.exit(e);
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const iris3d::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const iris3d::Error& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
