// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "specdiff/cost.hpp"
#include "specdiff/editor.hpp"
#include "specdiff/oracle.hpp"
#include "specdiff/power_spectrum.hpp"
#include "specdiff/sampler.hpp"
#include "specdiff/schedule.hpp"
#include "specdiff/svg_plot.hpp"
#include "specdiff/targets.hpp"
#include "specdiff/tensor_io.hpp"

#ifndef SPECDIFF_DEFAULT_PRESETS
#define SPECDIFF_DEFAULT_PRESETS "configs/arch_presets.json"
#endif

namespace specdiff::cli {
namespace {

struct LawArgs {
  std::string file;
  double A = 203.62;
  double beta = 1.9155;
  std::optional<double> dc_power;

  void add(CLI::App* app) {
    app->add_option("--law", file, "Power-law record (JSON with A, beta)");
    app->add_option("--A", A, "Power-law amplitude")->capture_default_str();
    app->add_option("--beta", beta, "Power-law exponent")->capture_default_str();
    app->add_option("--dc-power", dc_power, "Power assigned to the DC coefficient");
  }

  PowerLaw load() const {
    if (file.empty()) return PowerLaw(A, beta);
    std::ifstream in(file);
    if (!in) throw Error("cli", "cannot open power-law record " + file);
    std::stringstream buf;
    buf << in.rdbuf();
    return power_law_from_json(buf.str());
  }
};

struct ScheduleArgs {
  std::string scales = "0.5,1";
  double delta = 0.01;
  std::size_t steps = 50;
  double shift = 3.0;
  std::string grid;
  std::string transform = "dct";

  void add(CLI::App* app, const std::string& default_grid) {
    grid = default_grid;
    app->add_option("--scales", scales, "Comma-separated scales ending in 1")->capture_default_str();
    app->add_option("--delta", delta, "Velocity-error tolerance")->capture_default_str();
    app->add_option("--steps", steps, "Solver steps")->capture_default_str();
    app->add_option("--shift", shift, "Solver time shift")->capture_default_str();
    app->add_option("--grid", grid, "Full grid, HxW or N")->capture_default_str();
    app->add_option("--transform", transform, "dct, dwt or fft")->capture_default_str();
  }

  TransformKind kind() const { return parse_transform_kind(transform); }
  SolverGrid solver() const { return SolverGrid::shifted(steps, shift); }
};

Grid parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) {
      const auto n = std::stoul(text);
      return {n, n};
    }
    return {std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw Error("cli", "cannot parse grid '" + text + "' (expected HxW or N)");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("cli", "cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw Error("cli", "empty list");
  return out;
}

DType parse_dtype(const std::string& text) {
  if (text == "f32") return DType::F32;
  if (text == "f64") return DType::F64;
  throw Error("cli", "unknown dtype '" + text + "' (expected f32 or f64)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cli", "cannot open " + path + " for writing");
  out << text;
}

Schedule build_schedule(const LawArgs& law, const ScheduleArgs& s) {
  return plan(law.load(), parse_list(s.scales), parse_grid(s.grid), s.delta, s.solver(),
              s.kind());
}

// Flat "key = value" lines; '#' starts a comment.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cli", "cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("cli", path + ":" + std::to_string(number) + ": expected key = value");
    }
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    args.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

int cmd_synth(const LawArgs& law, const std::string& grid, const std::string& transform,
              std::size_t channels, std::size_t frames, std::size_t count, std::uint64_t seed,
              bool white, const std::string& dtype, const std::string& out_path,
              std::ostream& err) {
  const Shape shape{channels, frames, parse_grid(grid).h, parse_grid(grid).w};
  std::vector<Field> batch;
  if (white) {
    for (std::size_t n = 0; n < count; ++n) batch.push_back(initial_noise(shape, derive_seed(seed, n)));
  } else {
    const GaussianModel model(law.load(), shape, parse_transform_kind(transform), law.dc_power);
    for (std::size_t n = 0; n < count; ++n) batch.push_back(sample_clean(model, derive_seed(seed, n)));
  }
  write_tensor(out_path, batch_to_tensor(batch, parse_dtype(dtype)));
  err << "wrote " << count << " fields of " << to_string(shape) << " to " << out_path << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral progressive-resolution flow sampling toolkit", "specdiff"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file; flags override it");

  std::size_t threads = 0;
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (default: SPECDIFF_THREADS or all cores)");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Draw oracle fields (or white noise) to a tensor file");
  LawArgs synth_law;
  synth_law.add(synth);
  std::string synth_grid = "64x64", synth_transform = "dct", synth_dtype = "f64", synth_out;
  std::size_t synth_channels = 1, synth_frames = 1, synth_count = 1;
  std::uint64_t synth_seed = 0;
  bool synth_white = false;
  synth->add_option("--grid", synth_grid, "Grid, HxW or N")->capture_default_str();
  synth->add_option("--transform", synth_transform, "dct, dwt or fft")->capture_default_str();
  synth->add_option("--channels", synth_channels)->capture_default_str();
  synth->add_option("--frames", synth_frames)->capture_default_str();
  synth->add_option("--count", synth_count, "Number of fields")->capture_default_str();
  synth->add_option("--seed", synth_seed)->required();
  synth->add_flag("--white", synth_white, "Spatial white noise instead of oracle fields");
  synth->add_option("--dtype", synth_dtype, "f32 or f64")->capture_default_str();
  synth->add_option("--out", synth_out, "Output tensor file")->required();

  // fit-spectrum
  auto* fit = app.add_subcommand("fit-spectrum", "Radially averaged spectrum and power-law fit");
  std::vector<std::string> fit_inputs;
  std::string fit_transform = "dct", fit_csv, fit_out, fit_plot, fit_weighting = "unweighted";
  std::optional<double> fit_min, fit_max;
  fit->add_option("inputs", fit_inputs, "Tensor files (fields or 5D batches)")->required()->expected(1, -1);
  fit->add_option("--transform", fit_transform)->capture_default_str();
  fit->add_option("--omega-min", fit_min, "Lower fit bound (index units)");
  fit->add_option("--omega-max", fit_max, "Upper fit bound (index units)");
  fit->add_option("--weighting", fit_weighting, "unweighted or count")->capture_default_str();
  fit->add_option("--csv", fit_csv, "Spectrum CSV output");
  fit->add_option("--out", fit_out, "Power-law record output");
  fit->add_option("--plot", fit_plot, "SVG plot of spectrum and fit");
  add_threads(fit);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Plan and snap resolution transitions");
  LawArgs plan_law;
  ScheduleArgs plan_sched;
  std::string plan_out;
  plan_law.add(plan_cmd);
  plan_sched.add(plan_cmd, "128x128");
  plan_cmd->add_option("--out", plan_out, "Schedule record output");

  // sample
  auto* sample = app.add_subcommand("sample", "Progressive sampling with the oracle velocity");
  LawArgs sample_law;
  ScheduleArgs sample_sched;
  std::size_t sample_channels = 1, sample_frames = 1, sample_count = 1;
  std::uint64_t sample_seed = 0;
  std::string sample_out, sample_traj, sample_plot, sample_noise = "independent",
                          sample_dtype = "f64";
  sample_law.add(sample);
  sample_sched.add(sample, "64x64");
  sample->add_option("--channels", sample_channels)->capture_default_str();
  sample->add_option("--frames", sample_frames)->capture_default_str();
  sample->add_option("--count", sample_count, "Number of samples")->capture_default_str();
  sample->add_option("--seed", sample_seed)->required();
  sample->add_option("--noise", sample_noise, "independent or shared")->capture_default_str();
  sample->add_option("--out", sample_out, "Final samples tensor file")->required();
  sample->add_option("--trajectory", sample_traj, "Trajectory CSV of the first sample");
  sample->add_option("--plot", sample_plot, "SVG of the trajectory variance");
  sample->add_option("--dtype", sample_dtype)->capture_default_str();
  add_threads(sample);

  // passthrough
  auto* pass = app.add_subcommand("passthrough", "Passthrough distortion sweep over delta");
  LawArgs pass_law;
  std::string pass_deltas = "0.0001,0.001,0.01,0.05,0.1", pass_grid = "32x32",
              pass_transform = "dct", pass_csv, pass_plot;
  std::size_t pass_steps = 50, pass_seeds = 16;
  double pass_shift = 3.0;
  std::uint64_t pass_seed = 0;
  pass_law.add(pass);
  pass->add_option("--deltas", pass_deltas)->capture_default_str();
  pass->add_option("--grid", pass_grid)->capture_default_str();
  pass->add_option("--transform", pass_transform)->capture_default_str();
  pass->add_option("--steps", pass_steps)->capture_default_str();
  pass->add_option("--shift", pass_shift)->capture_default_str();
  pass->add_option("--seeds", pass_seeds, "Trajectories per delta")->capture_default_str();
  pass->add_option("--seed", pass_seed)->required();
  pass->add_option("--csv", pass_csv, "CSV output (delta, distortion)");
  pass->add_option("--plot", pass_plot, "SVG plot of distortion vs delta");
  add_threads(pass);

  // edit
  auto* edit_cmd = app.add_subcommand("edit", "Frequency-domain edit of a field");
  LawArgs edit_law;
  ScheduleArgs edit_sched;
  std::string edit_input, edit_out, edit_sdedit;
  std::size_t edit_k = 1;
  std::uint64_t edit_seed = 0;
  bool edit_no_renoise = false;
  double edit_noise_scale = 1.0;
  edit_law.add(edit_cmd);
  edit_sched.add(edit_cmd, "");
  edit_cmd->add_option("--input", edit_input, "Input field tensor")->required();
  edit_cmd->add_option("--k", edit_k, "1-based transition to restart from")->capture_default_str();
  edit_cmd->add_option("--seed", edit_seed)->required();
  edit_cmd->add_option("--out", edit_out, "Edited field tensor")->required();
  edit_cmd->add_flag("--no-renoise", edit_no_renoise, "Expand the clean low band without in-band noise");
  edit_cmd->add_option("--noise-scale", edit_noise_scale)->capture_default_str();
  edit_cmd->add_option("--sdedit-out", edit_sdedit, "Also write the spatial-domain baseline");

  // cost
  auto* cost_cmd = app.add_subcommand("cost", "Transformer FLOPs of a planned trajectory");
  LawArgs cost_law;
  ScheduleArgs cost_sched;
  std::string cost_preset = "flux-like", cost_presets = SPECDIFF_DEFAULT_PRESETS, cost_csv;
  cost_law.add(cost_cmd);
  cost_sched.add(cost_cmd, "128x128");
  cost_cmd->add_option("--preset", cost_preset)->capture_default_str();
  cost_cmd->add_option("--presets", cost_presets, "Preset file")->capture_default_str();
  cost_cmd->add_option("--csv", cost_csv, "Per-stage CSV output");

  // train-toy
  auto* train = app.add_subcommand("train-toy", "Train the toy gain model on stage targets");
  LawArgs train_law;
  ScheduleArgs train_sched;
  std::size_t train_channels = 4, train_iters = 400, train_batch = 64, train_dataset = 0;
  double train_lr = 0.05;
  std::string train_opt = "adam", train_sampling = "grid", train_loss, train_gains, train_plot;
  std::uint64_t train_seed = 0;
  train_law.add(train);
  train_sched.add(train, "16x16");
  train->add_option("--channels", train_channels)->capture_default_str();
  train->add_option("--train-steps", train_iters)->capture_default_str();
  train->add_option("--batch", train_batch)->capture_default_str();
  train->add_option("--dataset", train_dataset, "Fixed dataset size (0 = fresh draws)")->capture_default_str();
  train->add_option("--lr", train_lr)->capture_default_str();
  train->add_option("--optimizer", train_opt, "adam or sgd")->capture_default_str();
  train->add_option("--sampling", train_sampling, "grid or uniform")->capture_default_str();
  train->add_option("--seed", train_seed)->required();
  train->add_option("--loss-csv", train_loss);
  train->add_option("--gains-out", train_gains, "Learned gains tensor (knots x h x w per stage)");
  train->add_option("--plot", train_plot, "SVG loss curve");
  add_threads(train);

  // Config values go in front of the user's flags so the flags win.
  std::vector<std::string> args = raw_args;
  try {
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string path;
      std::size_t erase = 0;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        erase = 2;
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        erase = 1;
      }
      if (erase == 0) continue;
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + erase));
      std::size_t sub = 1;
      while (sub < args.size() && args[sub].rfind("-", 0) == 0) ++sub;
      const auto extra = read_config(path);
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(sub + 1, args.size())),
                  extra.begin(), extra.end());
      break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    if (app.get_subcommands().empty()) err << app.help();
    return 2;
  }

  try {
    const std::size_t workers = resolve_threads(threads);

    if (synth->parsed()) {
      return cmd_synth(synth_law, synth_grid, synth_transform, synth_channels, synth_frames,
                       synth_count, synth_seed, synth_white, synth_dtype, synth_out, err);
    }

    if (fit->parsed()) {
      const TransformKind kind = parse_transform_kind(fit_transform);
      std::vector<Field> batch;
      for (const auto& path : fit_inputs) {
        auto fields = tensor_to_batch(read_tensor(path));
        batch.insert(batch.end(), fields.begin(), fields.end());
      }
      const RadialSpectrum spectrum = estimate_radial_spectrum(batch, kind, workers);
      FitOptions options;
      options.omega_min = fit_min;
      options.omega_max = fit_max;
      if (fit_weighting == "count") {
        options.weighting = FitWeighting::Count;
      } else if (fit_weighting != "unweighted") {
        throw Error("cli", "unknown weighting '" + fit_weighting + "'");
      }
      const PowerLaw law = fit_power_law(spectrum, options);
      out << power_law_to_json(law, spectrum.grid);
      if (std::abs(law.beta()) < 0.1 || law.r_squared() < 0.5) {
        err << "warning: spectrum is close to flat (beta = " << law.beta()
            << ", R^2 = " << law.r_squared()
            << "); a power law is a poor description and scheduling is not meaningful\n";
      }
      if (!fit_csv.empty()) write_text(fit_csv, spectrum_to_csv(spectrum));
      if (!fit_out.empty()) write_text(fit_out, power_law_to_json(law, spectrum.grid));
      if (!fit_plot.empty()) {
        PlotSeries measured{"measured", {}, {}}, fitted{"fit", {}, {}};
        for (const auto& b : spectrum.bins) {
          if (b.omega <= 0) continue;
          measured.x.push_back(b.omega);
          measured.y.push_back(b.power);
          fitted.x.push_back(b.omega);
          fitted.y.push_back(law.evaluate(b.omega));
        }
        write_line_chart(fit_plot, {measured, fitted},
                         {"Radial power spectrum", "|omega| (index units)", "power", true, true});
      }
      return 0;
    }

    if (plan_cmd->parsed()) {
      const Schedule s = build_schedule(plan_law, plan_sched);
      out << schedule_table(s);
      if (!plan_out.empty()) write_text(plan_out, schedule_to_json(s));
      return 0;
    }

    if (sample->parsed()) {
      const Schedule s = build_schedule(sample_law, sample_sched);
      const Grid g = parse_grid(sample_sched.grid);
      const Shape shape{sample_channels, sample_frames, g.h, g.w};
      const GaussianModel model(sample_law.load(), shape, sample_sched.kind(), sample_law.dc_power);
      const OracleVelocity velocity(model);
      SamplerOptions options;
      if (sample_noise == "shared") {
        options.noise = NoiseMode::Shared;
      } else if (sample_noise != "independent") {
        throw Error("cli", "unknown noise mode '" + sample_noise + "'");
      }
      std::vector<Trajectory> runs(sample_count);
      parallel_for(sample_count, workers, [&](std::size_t n) {
        runs[n] = sample_progressive(velocity, s, sample_sched.kind(), derive_seed(sample_seed, n),
                                     shape, options);
      });
      std::vector<Field> finals;
      for (auto& r : runs) finals.push_back(r.final);
      write_tensor(sample_out, sample_count == 1
                                   ? field_to_tensor(finals.front(), parse_dtype(sample_dtype))
                                   : batch_to_tensor(finals, parse_dtype(sample_dtype)));
      err << "sampled " << sample_count << " x " << to_string(shape) << " in "
          << s.stages() << " stage(s)\n";
      if (!sample_traj.empty()) write_text(sample_traj, trajectory_to_csv(runs.front()));
      if (!sample_plot.empty()) {
        PlotSeries var{"variance", {}, {}};
        for (std::size_t i = 0; i < runs.front().points.size(); ++i) {
          var.x.push_back(static_cast<double>(i));
          var.y.push_back(runs.front().points[i].variance);
        }
        write_line_chart(sample_plot, {var}, {"Trajectory variance", "record", "variance"});
      }
      return 0;
    }

    if (pass->parsed()) {
      const Grid g = parse_grid(pass_grid);
      const GaussianModel model(pass_law.load(), Shape{1, 1, g.h, g.w},
                                parse_transform_kind(pass_transform), pass_law.dc_power);
      const auto deltas = parse_list(pass_deltas);
      const auto sweep = passthrough_sweep(model, deltas, SolverGrid::shifted(pass_steps, pass_shift),
                                           pass_seed, pass_seeds, workers);
      std::ostringstream csv;
      csv.precision(17);
      csv << "delta,distortion\n";
      for (const auto& p : sweep) csv << p.delta << ',' << p.distortion << '\n';
      out << csv.str();
      if (!pass_csv.empty()) write_text(pass_csv, csv.str());
      if (!pass_plot.empty()) {
        PlotSeries series{"distortion", {}, {}};
        for (const auto& p : sweep) {
          series.x.push_back(p.delta);
          series.y.push_back(p.distortion);
        }
        write_line_chart(pass_plot, {series},
                         {"Passthrough distortion", "delta", "relative RMS", true, true});
      }
      return 0;
    }

    if (edit_cmd->parsed()) {
      const Field input = tensor_to_field(read_tensor(edit_input));
      if (edit_sched.grid.empty()) edit_sched.grid = to_string(input.grid());
      const Schedule s = build_schedule(edit_law, edit_sched);
      const GaussianModel model(edit_law.load(), input.shape(), edit_sched.kind(), edit_law.dc_power);
      const OracleVelocity velocity(model);
      EditOptions options;
      options.renoise_low_band = !edit_no_renoise;
      options.noise_scale = edit_noise_scale;
      const EditResult r = edit(input, s, edit_k, velocity, edit_sched.kind(), edit_seed, options);
      write_tensor(edit_out, field_to_tensor(r.output));
      err << "edit restarted at t_k = " << r.start_time << " (aligned " << r.aligned_time
          << "), skipped " << r.skipped_steps << " steps, skipped time " << r.skipped_time
          << ", " << r.remaining_steps << " steps integrated\n";
      if (!edit_sdedit.empty()) {
        const EditResult b = sdedit_baseline(input, s.solver, s.snap_indices[edit_k - 1], velocity,
                                             edit_sched.kind(), edit_seed);
        write_tensor(edit_sdedit, field_to_tensor(b.output));
      }
      return 0;
    }

    if (cost_cmd->parsed()) {
      const ArchSpec arch = load_arch_preset(cost_presets, cost_preset);
      const Schedule s = build_schedule(cost_law, cost_sched);
      const CostReport report = trajectory_cost(arch, s);
      out << "preset " << arch.name << " (approximate): d=" << arch.hidden_dim
          << ", blocks=" << arch.n_blocks << ", mlp_ratio=" << arch.mlp_ratio
          << ", patch=" << arch.patch << ", extra_tokens=" << arch.extra_tokens << "\n";
      out << cost_table(report);
      if (!cost_csv.empty()) write_text(cost_csv, cost_to_csv(report));
      return 0;
    }

    if (train->parsed()) {
      const Schedule s = build_schedule(train_law, train_sched);
      const Grid g = parse_grid(train_sched.grid);
      const GaussianModel model(train_law.load(), Shape{train_channels, 1, g.h, g.w},
                                train_sched.kind(), train_law.dc_power);
      ToyNet net(s, train_sched.kind());
      TrainOptions options;
      options.steps = train_iters;
      options.lr = train_lr;
      options.batch = train_batch;
      options.dataset_size = train_dataset;
      options.threads = workers;
      if (train_opt == "sgd") {
        options.optimizer = Optimizer::SGD;
      } else if (train_opt != "adam") {
        throw Error("cli", "unknown optimizer '" + train_opt + "'");
      }
      if (train_sampling == "uniform") {
        options.sampling = TimeSampling::Uniform;
      } else if (train_sampling != "grid") {
        throw Error("cli", "unknown time sampling '" + train_sampling + "'");
      }
      const TrainResult result = train_toy(net, model, s, options, train_seed);
      double worst = 0.0;
      for (std::size_t j = 0; j < net.stages(); ++j) {
        const double t_s = stage_start_time(s, j), t_e = stage_end_time(s, j);
        for (std::size_t m = 0; m < net.knots(j).size(); ++m) {
          const double t = net.knots(j)[m];
          if (!(t < t_s && t > t_e)) continue;
          const auto ref = analytic_stage_gain(model, s, j, t);
          const auto learned = net.gains_at(j, t);
          for (std::size_t c = 0; c < ref.size(); ++c)
            worst = std::max(worst, std::abs(learned[c] - ref[c]) / std::max(std::abs(ref[c]), 1.0));
        }
      }
      out << "final loss " << result.loss_curve.back() << ", worst interior gain error "
          << worst << "\n";
      if (!train_loss.empty()) write_text(train_loss, loss_curve_to_csv(result));
      if (!train_gains.empty()) {
        std::vector<Field> per_stage;
        for (std::size_t j = 0; j < net.stages(); ++j) {
          const Grid sg = net.grid(j);
          per_stage.emplace_back(Shape{net.knots(j).size(), 1, sg.h, sg.w}, net.gains(j));
        }
        if (per_stage.size() == 1) {
          write_tensor(train_gains, field_to_tensor(per_stage.front()));
        } else {
          for (std::size_t j = 0; j < per_stage.size(); ++j)
            write_tensor(train_gains + "." + std::to_string(j + 1), field_to_tensor(per_stage[j]));
        }
      }
      if (!train_plot.empty()) {
        PlotSeries series{"loss", {}, {}};
        for (std::size_t i = 0; i < result.loss_curve.size(); ++i) {
          series.x.push_back(static_cast<double>(i));
          series.y.push_back(result.loss_curve[i]);
        }
        write_line_chart(train_plot, {series}, {"Toy training loss", "step", "MSE", false, true});
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace specdiff::cli
