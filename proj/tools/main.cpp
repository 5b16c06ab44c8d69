// perturb: experiment harness for eigenspace-perturbation bounds.
//
// Subcommands: bound-compare, contour-verify, sparsify-power, singular-rect.
// Exit codes: 0 all enabled assertions passed, 1 configuration or I/O error,
// 2 assertion failures present (counted in the stderr summary).

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  perturb::cli::FlagOverrides flags;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (schema version 1)");
    auto opt = [&](auto& slot, const char* name, const char* help) {
      cmd->add_option_function<typename std::decay_t<decltype(slot)>::value_type>(
          name, [&slot](const auto& v) { slot = v; }, help);
    };
    opt(flags.trials, "--trials", "number of trials");
    opt(flags.seed_base, "--seed-base", "first seed; trials use seed_base..seed_base+trials-1");
    opt(flags.out, "--out", "output path (default: stdout)");
    opt(flags.format, "--format", "output format: csv | json");
    opt(flags.nodes, "--nodes", "quadrature nodes per contour segment (>= 8)");
    opt(flags.threads, "--threads", "trial worker threads");
    opt(flags.matrix, "--matrix", "MatrixMarket file for the ground matrix A");
    opt(flags.noise, "--noise", "MatrixMarket file used as the noise matrix E");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eigenspace-perturbation bound experiments"};
  app.require_subcommand(1);

  CommonFlags bc, cv, sp, sr;
  auto* cmd_bc = app.add_subcommand("bound-compare",
                                    "measured projector perturbation vs analytic bounds");
  bc.attach(cmd_bc);
  auto* cmd_cv = app.add_subcommand("contour-verify",
                                    "contour-integral identities and segment estimates");
  cv.attach(cmd_cv);
  auto* cmd_sp = app.add_subcommand("sparsify-power",
                                    "sparsified power iteration with error certificate");
  sp.attach(cmd_sp);
  auto* cmd_sr = app.add_subcommand("singular-rect",
                                    "singular-space and rectangular variants");
  sr.attach(cmd_sr);

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace perturb::cli;
    if (cmd_bc->parsed())
      return run_bound_compare(load_bound_compare(bc.config_path, bc.flags), std::cerr);
    if (cmd_cv->parsed())
      return run_contour_verify(load_contour_verify(cv.config_path, cv.flags), std::cerr);
    if (cmd_sp->parsed())
      return run_sparsify_power(load_sparsify_power(sp.config_path, sp.flags), std::cerr);
    if (cmd_sr->parsed())
      return run_singular_rect(load_singular_rect(sr.config_path, sr.flags), std::cerr);
  } catch (const perturb::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
