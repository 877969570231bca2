#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "ergo/experiment.hpp"

namespace {

struct Sub {
  const char* name;
  ergo::cli::ExperimentKind kind;
  const char* help;
};

const Sub subs[] = {
    {"decaying-wave", ergo::cli::ExperimentKind::decaying_wave, "weighted average of e^{-l n} sin(t + n r)"},
    {"superposition", ergo::cli::ExperimentKind::superposition, "sum of decaying waves (component.k = c,l,r)"},
    {"composed", ergo::cli::ExperimentKind::composed, "observable applied to a decaying wave"},
    {"continuous", ergo::cli::ExperimentKind::continuous, "continuous-time average over [0, T]"},
    {"linear-orbit", ergo::cli::ExperimentKind::linear_orbit, "orbit of a contracting linear map"},
    {"map-orbit", ergo::cli::ExperimentKind::map_orbit, "orbit of x -> a x + b x^2"},
    {"quasi-periodic", ergo::cli::ExperimentKind::quasi_periodic, "Birkhoff average along a torus rotation"},
    {"probe-weights", ergo::cli::ExperimentKind::weights_probe, "tabulate kernels and A_N / N"},
    {"lemma-check", ergo::cli::ExperimentKind::lemma_check, "numerical checks of the weight lemmas"},
};

std::string dashed(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergoaccel: weighted ergodic averages and their exponential rates"};
  app.require_subcommand(1, 1);

  std::map<std::string, std::string> flag_values;
  std::vector<std::string> components;
  std::string config_path;
  bool quiet = false;

  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--component", components, "superposition component c,lambda,rho (repeatable)");
    sub->add_flag("--quiet", quiet, "do not print the JSON summary");
    for (const auto& key : ergo::cli::known_keys()) sub->add_option("--" + dashed(key), flag_values[key], ergo::cli::key_help(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const Sub* chosen = nullptr;
  for (const auto& s : subs)
    if (app.got_subcommand(s.name)) chosen = &s;

  ergo::cli::ExperimentConfig config;
  try {
    ergo::cli::Settings file;
    if (!config_path.empty()) file = ergo::cli::load_config_file(config_path);
    ergo::cli::Settings flags;
    CLI::App* sub = app.get_subcommand(chosen->name);
    for (const auto& key : ergo::cli::known_keys())
      if (sub->count("--" + dashed(key)) > 0) flags.values[key] = flag_values[key];
    for (std::size_t i = 0; i < components.size(); ++i) flags.components[static_cast<int>(i)] = components[i];
    config = ergo::cli::resolve_config(chosen->kind, file, flags, std::getenv("ERGOACCEL_PRECISION_BITS"));
  } catch (const ergo::Error& e) {
    std::cerr << "ergoaccel: " << e.what() << '\n';
    return 2;
  }

  const ergo::cli::RunOutcome outcome = ergo::cli::run(config);
  if (!outcome.message.empty()) std::cerr << "ergoaccel: " << outcome.message << '\n';
  if (!quiet && !outcome.summary.empty()) std::cout << outcome.summary << '\n';
  return outcome.exit_code;
}
