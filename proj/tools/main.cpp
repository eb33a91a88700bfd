// sisopt command line front end. Parsing only; the work happens in run().

#include <CLI11.hpp>

#include "sisopt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "sisopt: regularized reconstruction from uniform measurements and "
      "optimal shift-invariant model fitting"};
  app.require_subcommand(1);

  sisopt::RunConfig rc;

  // Models store the lambda they were fit with, so the commands that take a
  // --model pin the metric from the model instead of exposing --lambda.
  auto add_kernel = [&](CLI::App* cmd, bool with_lambda = true) {
    cmd->add_option("--kernel", rc.kernel_path, "sampling kernel JSON file")
        ->required();
    if (with_lambda)
      cmd->add_option("--lambda", rc.lambda,
                      "override the regularization weight");
    cmd->add_option("--grid", rc.grid,
                    "expected grid resolution G (checked, not resampled)");
    cmd->add_option("--truncation", rc.truncation,
                    "shrink the kernel's fiber truncation to this L");
  };
  auto add_measurements = [&](CLI::App* cmd) {
    cmd->add_option("--measurements", rc.measurements_path,
                    "measurement CSV file (j,k,re,im)")
        ->required();
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", rc.out_dir, "output directory for artifacts")
        ->required();
  };

  CLI::App* check = app.add_subcommand(
      "check-kernel", "validate a kernel file and report its bound");
  add_kernel(check);

  CLI::App* denoise = app.add_subcommand(
      "denoise", "reconstruct regularized lifts from measurements");
  add_kernel(denoise);
  add_measurements(denoise);
  add_out(denoise);

  CLI::App* fit_extra = app.add_subcommand(
      "fit-extra", "fit an optimal extra-invariant model of length at most l");
  add_kernel(fit_extra);
  add_measurements(fit_extra);
  add_out(fit_extra);
  fit_extra->add_option("--l", rc.l, "generator budget")->required();

  CLI::App* fit_pw = app.add_subcommand(
      "fit-pw", "fit an optimal translation-invariant multi-tile model");
  add_kernel(fit_pw);
  add_measurements(fit_pw);
  add_out(fit_pw);
  fit_pw->add_option("--l", rc.l, "cells per base point")->required();
  fit_pw->add_option("--N", rc.N, "cell range half-width")->required();
  fit_pw->add_option("--enum-cap", rc.enum_cap,
                     "refuse enumerations larger than this");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score a stored model against measurements");
  add_kernel(evaluate, false);
  add_measurements(evaluate);
  add_out(evaluate);
  evaluate->add_option("--model", rc.model_path, "model JSON file")
      ->required();

  CLI::App* synth = app.add_subcommand(
      "synthesize", "build a signal in a model's span and sample it");
  add_kernel(synth, false);
  add_out(synth);
  synth->add_option("--model", rc.model_path, "model JSON file")->required();
  synth->add_option("--coeffs", rc.coeffs_path,
                    "coefficient sequences JSON file")
      ->required();
  synth->add_option("--noise-scale", rc.noise_scale,
                    "gaussian measurement noise scale");
  synth->add_option("--seed", rc.seed, "noise seed");

  CLI::App* verify = app.add_subcommand(
      "oracle-verify", "re-check fitted optimality with independent solvers");
  add_kernel(verify);
  add_measurements(verify);
  add_out(verify);
  verify->add_option("--l", rc.l, "generator budget");
  verify->add_option("--N", rc.N, "cell range half-width");
  verify->add_option("--seed", rc.seed, "candidate seed");
  verify->add_option("--candidates", rc.candidates,
                     "random competitors per property");
  verify->add_option("--enum-cap", rc.enum_cap,
                     "refuse enumerations larger than this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (CLI::App* sub : app.get_subcommands()) rc.command = sub->get_name();
  return sisopt::run(rc);
}
