// layerpot: boundary-integral solves, the identity suite and the Hadamard demo.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "layerpot/cli.hpp"

int main(int argc, char** argv) {
  using namespace layerpot;
  CLI::App app{"2-D boundary integral toolkit for distributional layer potentials"};
  app.require_subcommand(1);

  SolveArgs solve;
  std::string problem, data, out, dump;
  Index n_solve = 0;
  auto* s = app.add_subcommand("solve", "Solve a Dirichlet or Neumann problem");
  s->add_option("--config", solve.config, "Domain configuration (JSON)")->required();
  s->add_option("--problem", problem, "dirichlet-int | dirichlet-ext | neumann-int | neumann-ext");
  s->add_option("--data", data, "constant:c | fourier:k | indicator:j | hadamard:K | csv:path");
  s->add_option("--n", n_solve, "Nodes per curve (overrides the config)")->check(CLI::PositiveNumber);
  s->add_option("--out", out, "Output directory");
  s->add_option("--dump-operators", dump, "Directory for CSV dumps of the operator matrices");

  VerifyArgs verify;
  std::string verify_config, verify_out;
  Index n_verify = 0;
  auto* v = app.add_subcommand("verify", "Run the identity suite");
  v->add_option("--config", verify_config, "Domain configuration (default: disk, ellipse, annulus)");
  v->add_option("--n", n_verify, "Nodes per curve (default 256)")->check(CLI::PositiveNumber);
  v->add_option("--seed", verify.seed, "Seed of the random test densities");
  v->add_option("--out", verify_out, "Directory for verify_report.json");
  v->add_flag("--flip-diagonal-sign", verify.flip_diagonal_sign, "Test hook: wrong W diagonal sign")
      ->group("");

  HadamardArgs hadamard;
  std::string hadamard_out;
  Index n_hadamard = 0;
  auto* h = app.add_subcommand("demo-hadamard", "Hadamard's infinite-energy Neumann example on the disk");
  h->add_option("--terms", hadamard.terms, "Number of lacunary terms K")->required();
  h->add_option("--n", n_hadamard, "Nodes (default max(256, 8 * 2^K))")->check(CLI::PositiveNumber);
  h->add_option("--out", hadamard_out, "Directory for the report and energy table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*s) {
    if (!problem.empty()) solve.problem = problem;
    if (!data.empty()) solve.data = data;
    if (n_solve) solve.nodes = n_solve;
    if (!out.empty()) solve.out = out;
    if (!dump.empty()) solve.dump_operators = dump;
    return cmd_solve(solve);
  }
  if (*v) {
    if (!verify_config.empty()) verify.config = verify_config;
    if (n_verify) verify.nodes = n_verify;
    if (!verify_out.empty()) verify.out = verify_out;
    return cmd_verify(verify);
  }
  if (n_hadamard) hadamard.nodes = n_hadamard;
  if (!hadamard_out.empty()) hadamard.out = hadamard_out;
  return cmd_demo_hadamard(hadamard);
}
