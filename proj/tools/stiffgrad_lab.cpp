// stiffgrad_lab: command-line front end over the stiffgrad library.

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stiffgrad/lab.hpp"

namespace lab = stiffgrad::lab;

namespace {

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

int emit(const lab::CommandOutput& result, lab::Format format, const std::string& out_path) {
  const std::string text = lab::render(result, format);
  if (out_path.empty() || out_path == "-") {
    std::cout << text << std::flush;
    return result.exit_code;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) {
    std::cerr << "stiffgrad_lab: cannot open " << out_path << ": " << std::strerror(errno) << '\n';
    return lab::exit_code::kIo;
  }
  file << text;
  file.close();
  if (!file) {
    std::cerr << "stiffgrad_lab: write failed for " << out_path << '\n';
    return lab::exit_code::kIo;
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability-function and sensitivity lab for stiff integrators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lab::kToolVersion));

  lab::Format format = lab::Format::Csv;
  std::string out_path;
  const std::map<std::string, lab::Format> formats{{"csv", lab::Format::Csv}, {"json", lab::Format::Json}};
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--out", out_path, "Output path (default standard output)");
  };

  auto* catalog = app.add_subcommand("catalog", "List catalog methods with computed stability verdicts");
  add_common(catalog);

  lab::DecayOptions decay;
  auto* decay_cmd = app.add_subcommand("decay", "Fit the decay of |R'| along a ray into the left half-plane");
  add_common(decay_cmd);
  decay_cmd->add_option("--method", decay.methods, "Method list or 'all'")->capture_default_str();
  decay_cmd->add_option("--t-min", decay.t_min)->check(CLI::PositiveNumber)->capture_default_str();
  decay_cmd->add_option("--t-max", decay.t_max)->check(CLI::PositiveNumber)->capture_default_str();
  decay_cmd->add_option("--points", decay.points)->check(CLI::Range(10, 1000000))->capture_default_str();
  decay_cmd->add_option("--angle", decay.angle, "Ray angle from the negative real axis (radians)")
      ->check(CLI::Range(-std::numbers::pi / 2, std::numbers::pi / 2))
      ->capture_default_str();
  decay_cmd->add_flag("--samples", decay.samples, "Emit the sampled |R'| columns instead of the fit table");

  lab::BoundOptions bound;
  auto* bound_cmd = app.add_subcommand("bound", "Check the derivative bounds on a left half-plane grid");
  add_common(bound_cmd);
  bound_cmd->add_option("--method", bound.methods)->capture_default_str();
  bound_cmd->add_option("--delta", bound.delta, "Sector half-angle (radians)")
      ->check(CLI::Range(0.0, std::numbers::pi / 2))
      ->capture_default_str();
  bound_cmd->add_option("--re-min", bound.grid.re_min)->check(CLI::Range(-1e300, -1e-300))->capture_default_str();
  bound_cmd->add_option("--re-max", bound.grid.re_max)->check(CLI::Range(-1e300, -1e-300))->capture_default_str();
  bound_cmd->add_option("--im-max", bound.grid.im_max)->check(CLI::PositiveNumber)->capture_default_str();
  bound_cmd->add_option("--im-floor", bound.grid.im_floor)->check(CLI::PositiveNumber)->capture_default_str();
  bound_cmd->add_option("--resolution", bound.grid.resolution)->check(CLI::Range(2, 100000))->capture_default_str();

  lab::RegionOptions region;
  auto* region_cmd = app.add_subcommand("region", "Raster |R(z)| over a rectangle");
  add_common(region_cmd);
  region_cmd->add_option("--method", region.method)->capture_default_str();
  region_cmd->add_option("--re-min", region.re_min)->capture_default_str();
  region_cmd->add_option("--re-max", region.re_max)->capture_default_str();
  region_cmd->add_option("--im-min", region.im_min)->capture_default_str();
  region_cmd->add_option("--im-max", region.im_max)->capture_default_str();
  region_cmd->add_option("--resolution", region.resolution)->check(CLI::Range(16, 10000))->capture_default_str();

  lab::SensOptions sens;
  bool principal_root = false;
  auto* sens_cmd = app.add_subcommand("sens", "Compare recursive, closed-form and exact sensitivities");
  add_common(sens_cmd);
  sens_cmd->add_option("--method", sens.methods)->capture_default_str();
  sens_cmd->add_option("--lambda", sens.lambdas, "One or more lambda values")->delimiter(',')->capture_default_str();
  sens_cmd->add_option("--step", sens.h, "Step size h")->check(CLI::PositiveNumber)->capture_default_str();
  sens_cmd->add_option("--steps", sens.steps)->check(CLI::Range(1, 100000000))->capture_default_str();
  sens_cmd->add_option("--y0", sens.y0)->capture_default_str();
  sens_cmd->add_flag("--bdf2-principal-root", principal_root, "Run BDF2 as the one-step principal-root map");

  stiffgrad::DemoOptions demo;
  bool trajectory_loss = false;
  auto* demo_cmd = app.add_subcommand("demo", "Vanishing-gradient demonstration on a two-mode system");
  add_common(demo_cmd);
  demo_cmd->add_option("--method", demo.method)->capture_default_str();
  demo_cmd->add_option("--sweep", demo.sweep, "Stiff parameter values")->delimiter(',');
  demo_cmd->add_option("--step", demo.h, "Step size h")->check(CLI::PositiveNumber)->capture_default_str();
  demo_cmd->add_option("--steps", demo.steps)->check(CLI::Range(1, 10000000))->capture_default_str();
  demo_cmd->add_option("--threshold", demo.threshold)->check(CLI::PositiveNumber)->capture_default_str();
  demo_cmd->add_option("--iterations", demo.iterations)->check(CLI::Range(0, 10000000))->capture_default_str();
  demo_cmd->add_option("--learning-rate", demo.learning_rate)->check(CLI::PositiveNumber)->capture_default_str();
  demo_cmd->add_option("--theta-slow", demo.theta_slow)->capture_default_str();
  demo_cmd->add_option("--trace-stiff-start", demo.trace_stiff_start)->capture_default_str();
  demo_cmd->add_flag("--trajectory-loss", trajectory_loss, "Sum the squared error over every step");

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lab::exit_code::kUsage;
  }

  const std::string command_line = join_args(argc, argv);
  try {
    lab::CommandOutput result;
    if (*catalog) {
      result = lab::cmd_catalog(command_line);
    } else if (*decay_cmd) {
      if (!(decay.t_max > decay.t_min)) throw stiffgrad::Error(stiffgrad::ErrorCode::InvalidArgument, "--t-max must exceed --t-min");
      result = lab::cmd_decay(decay, command_line);
    } else if (*bound_cmd) {
      result = lab::cmd_bound(bound, command_line);
    } else if (*region_cmd) {
      result = lab::cmd_region(region, command_line);
    } else if (*sens_cmd) {
      sens.bdf2_mode = principal_root ? stiffgrad::Bdf2Mode::PrincipalRoot : stiffgrad::Bdf2Mode::TwoStep;
      result = lab::cmd_sens(sens, command_line);
    } else if (*demo_cmd) {
      demo.loss = trajectory_loss ? stiffgrad::DemoLoss::Trajectory : stiffgrad::DemoLoss::FinalTime;
      result = lab::cmd_demo(demo, command_line);
    } else {
      result = lab::cmd_verify(command_line);
    }
    return emit(result, format, out_path);
  } catch (const stiffgrad::Error& e) {
    std::cerr << "stiffgrad_lab: " << stiffgrad::to_string(e.code()) << ": " << e.what() << '\n';
    const bool usage = e.code() == stiffgrad::ErrorCode::InvalidArgument || e.code() == stiffgrad::ErrorCode::UnknownMethod;
    return usage ? lab::exit_code::kUsage : lab::exit_code::kMismatch;
  }
}
