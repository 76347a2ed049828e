#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manilip/manilip.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kOutEnv = "MANILIP_OUT_DIR";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold Lipschitz training experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the experiment config")->required();
  run->add_option("--out", out_dir, std::string("Output directory (overrides $") + kOutEnv + " and the config)");
  run->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
  run->add_option("--methods", methods, "Comma-separated methods")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (out_dir.empty()) {
    if (const char* env = std::getenv(kOutEnv)) out_dir = env;
  }
  std::vector<const char*> method_ptrs;
  for (const auto& m : methods) method_ptrs.push_back(m.c_str());

  const manilip_status status =
      manilip_run_experiment(config_path.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                             seeds.empty() ? nullptr : seeds.data(), seeds.size(),
                             method_ptrs.empty() ? nullptr : method_ptrs.data(), method_ptrs.size());
  if (status == MANILIP_OK) return kExitOk;

  std::string stage = manilip_last_stage();
  if (stage.empty()) stage = "run";
  std::cerr << "manilip: " << stage << " stage failed: " << manilip_last_error() << '\n';
  return status == MANILIP_ERR_CONFIG ? kExitConfig : kExitRuntime;
}
