#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bellfield/cli.hpp"

namespace {

void add_common(CLI::App* cmd, bellfield::cli::RunConfig& cfg) {
  cmd->add_option("--tol", cfg.tol, "tolerance for EPR and boundary checks")->check(CLI::PositiveNumber);
  cmd->add_option("--format", cfg.format, "output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, bellfield::cli::Format>{{"json", bellfield::cli::Format::json},
                                                        {"csv", bellfield::cli::Format::csv}}));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bellfield;
  cli::RunConfig cfg;
  CLI::App app{"Interferometric photon-number correlations, correlation amplitudes and Bell bounds"};
  app.require_subcommand(1);

  auto* state = app.add_subcommand("state", "report amplitudes, B_max, EPR verdict and bounds for a state");
  state->add_option("source", cfg.source, "zoo name (eq28, eq29, two-photon, coherent, split-photon, split-cat) or JSON file")
      ->required();
  state->add_option("--alpha", cfg.alpha, "coherent amplitude, \"re\" or \"re,im\"");
  state->add_option("--phi", cfg.phi, "cat superposition phase");
  state->add_option("--cutoff", cfg.cutoff, "total photon cutoff override");
  add_common(state, cfg);

  auto* figure3 = app.add_subcommand("figure3", "boundary curves of the amplitude plane plus zoo points, as CSV");
  figure3->add_option("--samples", cfg.curve_samples, "points per curve")->check(CLI::Range(2, 100000));
  figure3->add_option("--tol", cfg.tol)->check(CLI::PositiveNumber);

  auto* classical = app.add_subcommand("classical", "Monte Carlo estimate of the amplitudes of a classical ensemble");
  classical->add_option("--kind", cfg.kind, "delta, thermal, correlated_lo or mixture")
      ->check(CLI::IsMember({"delta", "thermal", "correlated_lo", "mixture"}));
  classical->add_option("--point", cfg.point, "delta point alpha1,alpha2,beta1,beta2 (complex as re:im)");
  classical->add_option("--nbar", cfg.nbar, "mean photon number per field");
  classical->add_option("--mix", cfg.mix, "thermal weight in a mixture");
  classical->add_option("--samples", cfg.samples, "sample count")->check(CLI::PositiveNumber);
  classical->add_option("--seed", cfg.seed, "RNG seed");
  add_common(classical, cfg);

  auto* sweep = app.add_subcommand("sweep-cat", "split cat states over a grid of (alpha, phi) against closed forms");
  sweep->add_option("--alphas", cfg.alphas, "cat amplitudes")->delimiter(',');
  sweep->add_option("--phis", cfg.phis, "cat phases")->delimiter(',');
  sweep->add_option("--cutoff", cfg.cutoff, "total photon cutoff (default 20)");
  add_common(sweep, cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    std::string out;
    if (*state) {
      out = cli::cmd_state(cfg);
    } else if (*figure3) {
      out = cli::cmd_plane(cfg);
    } else if (*classical) {
      out = cli::cmd_classical(cfg);
    } else {
      if (sweep->count("--format") == 0) cfg.format = cli::Format::csv;
      out = cli::cmd_sweep_cat(cfg);
    }
    std::cout << out;
    return 0;
  } catch (const Error& e) {
    std::cout << cli::error_json(e).dump(2) << "\n";
    return cli::kDomainErrorExit;
  }
}
