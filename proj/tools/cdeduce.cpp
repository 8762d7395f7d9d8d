// cdeduce — scenario runner and world generator for the causality deduction
// engine.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cdeduce/cdeduce.hpp"

namespace {

int offline_depth_from_env() {
  if (const char* v = std::getenv("CDEDUCE_DEPTH")) {
    try {
      int d = std::stoi(v);
      if (d >= 1) return d;
    } catch (...) {
    }
    std::cerr << "warning: ignoring invalid CDEDUCE_DEPTH=" << v << "\n";
  }
  return 1;
}

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causality deduction engine"};
  app.require_subcommand(1);

  // run
  std::string run_file;
  bool trace = false, json = false, trust = false;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("file", run_file, "scenario file")->required();
  run->add_flag("--trace", trace, "print derivation traces");
  run->add_flag("--json", json, "emit JSON instead of text lines");
  run->add_flag("--trust", trust,
                "allow evolving world-free microcosms without oracle checks");
  run->add_option("--seed", seed, "seed folded into experiment seeds");

  // check
  std::string check_file;
  auto* check = app.add_subcommand("check", "validate a scenario file");
  check->add_option("file", check_file, "scenario file")->required();

  // gen-world
  std::size_t gen_n = 0;
  double gen_density = 0.0;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-world", "generate a random world");
  gen->add_option("n", gen_n, "event count")->required();
  gen->add_option("density", gen_density, "edge probability in [0,1]")
      ->required();
  gen->add_option("seed", gen_seed, "generator seed")->required();

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    if (gen_n < 1 || gen_density < 0.0 || gen_density > 1.0) {
      std::cerr << "gen-world: need n >= 1 and density in [0,1]\n";
      return 2;
    }
    std::cout << cdeduce::generate_world(gen_n, gen_density, gen_seed)
                     .to_text();
    return 0;
  }

  const std::string& path = *run ? run_file : check_file;
  auto text = slurp(path);
  if (!text) {
    std::cerr << "cannot read " << path << "\n";
    return 2;
  }
  auto scenario = cdeduce::parse_scenario(*text);
  if (!scenario) {
    std::cerr << path << ": " << scenario.error().to_string() << "\n";
    return 2;
  }
  if (*check) {
    std::cout << path << ": ok (" << scenario->commands.size()
              << " commands)\n";
    return 0;
  }

  cdeduce::RunOptions opts;
  opts.trace = trace;
  opts.json = json;
  opts.seed = seed;
  opts.trust = trust;
  opts.offline.depth = offline_depth_from_env();
  auto result = cdeduce::run_scenario(*scenario, opts);
  std::cout << result.output;
  return result.exit_code;
}
