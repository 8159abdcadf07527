#include "nonllrtv/cli.hpp"

#include "nonllrtv/cube_io.hpp"
#include "nonllrtv/error.hpp"
#include "nonllrtv/metrics.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

namespace nonllrtv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Pixel {
  Index row = 0;
  Index col = 0;
};

Pixel parse_pixel(const std::string &text)
{
  Pixel p;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> p.row >> comma >> p.col) || comma != ',' || !in.eof()) {
    throw UsageError("expected a pixel as ROW,COL, got \"" + text + "\"");
  }
  return p;
}

void apply_patch_option(const std::string &text, SolverConfig &config)
{
  if (text.empty() || text == "auto") {
    return;
  }
  if (text == "full") {
    config.full_image_patch = true;
    return;
  }
  std::istringstream in(text);
  long long rows = 0, cols = 0;
  char sep = 0;
  if (!(in >> rows)) {
    throw UsageError("--patch expects auto, full, N or RxC");
  }
  cols = rows;
  if (in >> sep) {
    if ((sep != 'x' && sep != 'X') || !(in >> cols) || !in.eof()) {
      throw UsageError("--patch expects auto, full, N or RxC");
    }
  }
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("--patch sizes must be positive");
  }
  config.patch_rows = rows;
  config.patch_cols = cols;
}

int default_threads()
{
  if (const char *env = std::getenv("NONLLRTV_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception &) {
      throw ConfigError("NONLLRTV_THREADS must be a positive integer");
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void write_json(const fs::path &path, const json &j)
{
  std::ofstream f(path);
  if (!f) {
    throw ConfigError("cannot write " + path.string());
  }
  f << j.dump(2) << '\n';
}

json read_json(const fs::path &path)
{
  std::ifstream f(path);
  if (!f) {
    throw ConfigError("cannot open " + path.string());
  }
  try {
    return json::parse(f);
  } catch (const json::exception &e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void ensure_directory(const fs::path &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

json manifest_base(const std::string &command, const fs::path &output)
{
  return {
    {"tool", "nonllrtv"},
    {"version", kToolVersion},
    {"command", command},
    {"output_dir", fs::absolute(output).string()},
  };
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- subcommand bodies ------------------------------------------------------

struct SimulateArgs {
  fs::path input;
  fs::path output;
  NoiseSpec spec;
};

int do_simulate(const SimulateArgs &a, std::ostream &out)
{
  const auto start = std::chrono::steady_clock::now();
  const HsiCube clean = load_cube(a.input);
  a.spec.validate(clean.bands());
  const HsiCube noisy = apply_noise(clean, a.spec);

  ensure_directory(a.output);
  save_cube(noisy, a.output / "noisy.json");
  json m = manifest_base("simulate", a.output);
  m["input"] = fs::absolute(a.input).string();
  m["noise"] = a.spec;
  m["seed"] = a.spec.seed;
  m["timings"] = {{"total_seconds", seconds_since(start)}};
  write_json(a.output / "manifest.json", m);
  out << "wrote " << (a.output / "noisy.json").string() << '\n';
  return kOk;
}

struct DenoiseArgs {
  fs::path input;
  fs::path output;
  SolverConfig config;
  bool quiet = false;
};

int do_denoise(const DenoiseArgs &a, std::ostream &out, std::ostream &err)
{
  const auto start = std::chrono::steady_clock::now();
  a.config.validate();
  const HsiCube observed = load_cube(a.input);
  const PatchGeometry geometry = resolve_patch_geometry(a.config, observed.dims());
  build_patch_grid(observed.rows(), observed.cols(), geometry.patch_rows, geometry.patch_cols, geometry.stride_rows,
                   geometry.stride_cols);

  ProgressCallback progress;
  if (!a.quiet) {
    progress = [&err](const ResidualRecord &r) {
      err << "iter " << std::setw(3) << r.iteration << "  fit " << std::scientific << std::setprecision(3) << r.fit
          << "  split " << r.split << "  mu " << r.mu << std::defaultfloat << '\n';
    };
  }
  const DenoiseResult result = denoise(observed, a.config, progress);

  ensure_directory(a.output);
  save_cube(result.restored, a.output / "restored.json");
  save_cube(result.sparse, a.output / "sparse.json");
  {
    std::ofstream log(a.output / "iterations.csv");
    log << "iter,fit_residual,split_residual,mu\n" << std::setprecision(17);
    for (const auto &r : result.report.history) {
      log << r.iteration << ',' << r.fit << ',' << r.split << ',' << r.mu << '\n';
    }
  }
  json m = manifest_base("denoise", a.output);
  m["input"] = fs::absolute(a.input).string();
  m["config"] = config_to_json(a.config);
  m["result"] = {
    {"iterations", result.report.iterations},
    {"converged", result.report.converged},
    {"fit_residual", result.report.fit_residual},
    {"split_residual", result.report.split_residual},
    {"patch", {result.report.geometry.patch_rows, result.report.geometry.patch_cols}},
    {"stride", {result.report.geometry.stride_rows, result.report.geometry.stride_cols}},
  };
  m["timings"] = {{"solve_seconds", result.report.seconds}, {"total_seconds", seconds_since(start)}};
  write_json(a.output / "manifest.json", m);
  out << (result.report.converged ? "converged" : "stopped") << " after " << result.report.iterations
      << " iterations; wrote " << (a.output / "restored.json").string() << '\n';
  return kOk;
}

struct EvaluateArgs {
  fs::path reference;
  fs::path test;
  fs::path output;
  std::optional<Index> band;
  std::optional<std::string> pixel;
  double peak = 1.0;
  double runtime = 0.0;
};

int do_evaluate(const EvaluateArgs &a, std::ostream &out)
{
  const HsiCube reference = load_cube(a.reference);
  const HsiCube test = load_cube(a.test);
  if (!reference.same_shape(test)) {
    throw ConfigError("reference and test cubes have different dims");
  }
  if (a.band && (*a.band < 0 || *a.band >= reference.bands())) {
    throw ConfigError("--band is out of range");
  }
  std::optional<Pixel> pixel;
  if (a.pixel) {
    pixel = parse_pixel(*a.pixel);
    spectrum_at(reference, pixel->row, pixel->col); // range check before writing anything
  }
  QualityReport report = evaluate_quality(reference, test, a.peak);
  report.runtime_seconds = a.runtime;

  ensure_directory(a.output);
  {
    std::ofstream csv(a.output / "quality.csv");
    write_quality_csv(csv, report);
  }
  write_json(a.output / "quality.json", quality_json(report));
  if (a.band) {
    const std::string suffix = "_band" + std::to_string(*a.band) + ".pgm";
    std::ofstream ref_pgm(a.output / ("reference" + suffix), std::ios::binary);
    write_band_pgm(ref_pgm, reference, *a.band, a.peak);
    std::ofstream test_pgm(a.output / ("test" + suffix), std::ios::binary);
    write_band_pgm(test_pgm, test, *a.band, a.peak);
  }
  if (pixel) {
    const std::string suffix = "_" + std::to_string(pixel->row) + "_" + std::to_string(pixel->col) + ".csv";
    std::ofstream ref_csv(a.output / ("spectrum_reference" + suffix));
    write_spectrum_csv(ref_csv, spectrum_at(reference, pixel->row, pixel->col));
    std::ofstream test_csv(a.output / ("spectrum_test" + suffix));
    write_spectrum_csv(test_csv, spectrum_at(test, pixel->row, pixel->col));
  }
  json m = manifest_base("evaluate", a.output);
  m["reference"] = fs::absolute(a.reference).string();
  m["test"] = fs::absolute(a.test).string();
  m["peak"] = a.peak;
  if (a.band) {
    m["band"] = *a.band;
  }
  if (a.pixel) {
    m["pixel"] = *a.pixel;
  }
  m["runtime"] = a.runtime;
  write_json(a.output / "manifest.json", m);
  out << std::fixed << std::setprecision(3) << "MPSNR " << report.mpsnr << " dB  MSSIM " << report.mssim << '\n';
  return kOk;
}

int do_spectrum(const fs::path &input, const std::string &pixel_text, const fs::path &output, std::ostream &out)
{
  const HsiCube cube = load_cube(input);
  const Pixel px = parse_pixel(pixel_text);
  const auto profile = spectrum_at(cube, px.row, px.col);
  ensure_directory(output);
  const fs::path path = output / ("spectrum_" + std::to_string(px.row) + "_" + std::to_string(px.col) + ".csv");
  std::ofstream csv(path);
  write_spectrum_csv(csv, profile);
  out << "wrote " << path.string() << '\n';
  return kOk;
}

int do_synth(const fs::path &output, Index rows, Index cols, Index bands, int rank, std::uint64_t seed,
             std::ostream &out)
{
  const HsiCube cube = make_mixture_cube(rows, cols, bands, rank, seed);
  ensure_directory(output);
  save_cube(cube, output / "clean.json");
  out << "wrote " << (output / "clean.json").string() << '\n';
  return kOk;
}

int do_replay(const fs::path &manifest_path, const fs::path &output, std::ostream &out, std::ostream &err)
{
  const json m = read_json(manifest_path);
  const std::string command = m.value("command", "");
  try {
    if (command == "simulate") {
      SimulateArgs a{m.at("input").get<std::string>(), output, m.at("noise").get<NoiseSpec>()};
      return do_simulate(a, out);
    }
    if (command == "denoise") {
      DenoiseArgs a{m.at("input").get<std::string>(), output, config_from_json(m.at("config")), true};
      // Threads do not affect results; use this machine's default.
      a.config.threads = default_threads();
      return do_denoise(a, out, err);
    }
    if (command == "evaluate") {
      EvaluateArgs a;
      a.reference = m.at("reference").get<std::string>();
      a.test = m.at("test").get<std::string>();
      a.output = output;
      a.peak = m.value("peak", 1.0);
      a.runtime = m.value("runtime", 0.0);
      if (m.contains("band")) {
        a.band = m.at("band").get<Index>();
      }
      if (m.contains("pixel")) {
        a.pixel = m.at("pixel").get<std::string>();
      }
      return do_evaluate(a, out);
    }
  } catch (const json::exception &e) {
    throw ConfigError("incomplete manifest " + manifest_path.string() + ": " + e.what());
  }
  throw ConfigError("manifest " + manifest_path.string() + " has no replayable command");
}

} // namespace

json config_to_json(const SolverConfig &c)
{
  json j = {
    {"lambda", c.lambda},
    {"tau", c.tau},
    {"gamma", c.gamma},
    {"weights", {{"spectral", c.weights.spectral}, {"column", c.weights.column}, {"row", c.weights.row}}},
    {"mu0", c.mu0},
    {"mu_max", c.mu_max},
    {"rho", c.rho},
    {"epsilon", c.epsilon},
    {"max_iters", c.max_iters},
    {"patch_rows", c.patch_rows},
    {"patch_cols", c.patch_cols},
    {"stride", c.stride},
    {"full_image_patch", c.full_image_patch},
    {"penalty", c.penalty_mode == ShrinkageMode::nuclear ? "nuclear" : "gamma"},
    {"threshold_factor", c.threshold_factor},
    {"nuclear_weight", c.nuclear_weight},
    {"threads", c.threads},
    {"rank_cap", c.rank_cap},
  };
  return j;
}

SolverConfig config_from_json(const json &j)
{
  SolverConfig c;
  try {
    c.lambda = j.value("lambda", c.lambda);
    c.tau = j.value("tau", c.tau);
    c.gamma = j.value("gamma", c.gamma);
    if (j.contains("weights")) {
      const auto &w = j.at("weights");
      c.weights.spectral = w.value("spectral", c.weights.spectral);
      c.weights.column = w.value("column", c.weights.column);
      c.weights.row = w.value("row", c.weights.row);
    }
    c.mu0 = j.value("mu0", c.mu0);
    c.mu_max = j.value("mu_max", c.mu_max);
    c.rho = j.value("rho", c.rho);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.patch_rows = j.value("patch_rows", c.patch_rows);
    c.patch_cols = j.value("patch_cols", c.patch_cols);
    c.stride = j.value("stride", c.stride);
    c.full_image_patch = j.value("full_image_patch", c.full_image_patch);
    const std::string penalty = j.value("penalty", "gamma");
    if (penalty != "gamma" && penalty != "nuclear") {
      throw ConfigError("penalty must be \"gamma\" or \"nuclear\"");
    }
    c.penalty_mode = penalty == "nuclear" ? ShrinkageMode::nuclear : ShrinkageMode::nonconvex_gamma;
    c.threshold_factor = j.value("threshold_factor", c.threshold_factor);
    c.nuclear_weight = j.value("nuclear_weight", c.nuclear_weight);
    c.threads = j.value("threads", c.threads);
    c.rank_cap = j.value("rank_cap", c.rank_cap);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("malformed solver config: ") + e.what());
  }
  c.validate();
  return c;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Hyperspectral restoration by non-convex local low rank + spatial-spectral TV", "nonllrtv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // simulate
  SimulateArgs sim;
  std::optional<int> sim_case;
  std::string sim_spec_path;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_level;
  auto *simulate = app.add_subcommand("simulate", "Degrade a clean cube with one of the noise cases");
  simulate->add_option("input", sim.input, "Clean cube (.json header)")->required();
  simulate->add_option("output", sim.output, "Output directory")->required();
  auto *case_opt = simulate->add_option("--case", sim_case, "Noise case 1..6");
  simulate->add_option("--spec", sim_spec_path, "Custom noise spec JSON")->excludes(case_opt);
  simulate->add_option("--seed", sim_seed, "Random seed (overrides the spec's)");
  simulate->add_option("--level", sim_level, "Read Gaussian levels as variance or sigma")
    ->check(CLI::IsMember({"variance", "sigma"}));

  // denoise
  DenoiseArgs den;
  SolverConfig &cfg = den.config;
  std::string patch_text;
  std::string penalty_text = "gamma";
  std::optional<int> threads;
  auto *denoise_cmd = app.add_subcommand("denoise", "Restore a noisy cube");
  denoise_cmd->add_option("input", den.input, "Noisy cube (.json header)")->required();
  denoise_cmd->add_option("output", den.output, "Output directory")->required();
  denoise_cmd->add_option("--lambda", cfg.lambda, "Sparse-noise weight")->capture_default_str();
  denoise_cmd->add_option("--tau", cfg.tau, "Spatial-spectral TV weight")->capture_default_str();
  denoise_cmd->add_option("--gamma", cfg.gamma, "Non-convex penalty scale")->capture_default_str();
  denoise_cmd->add_option("--rank", cfg.rank_cap, "Hard cap on each patch's rank, 0 for none")->capture_default_str();
  denoise_cmd->add_option("--w-spectral", cfg.weights.spectral, "Spectral difference weight")->capture_default_str();
  denoise_cmd->add_option("--w-column", cfg.weights.column, "Column difference weight")->capture_default_str();
  denoise_cmd->add_option("--w-row", cfg.weights.row, "Row difference weight")->capture_default_str();
  denoise_cmd->add_option("--mu0", cfg.mu0, "Initial penalty")->capture_default_str();
  denoise_cmd->add_option("--mu-max", cfg.mu_max, "Penalty ceiling")->capture_default_str();
  denoise_cmd->add_option("--rho", cfg.rho, "Penalty growth factor")->capture_default_str();
  denoise_cmd->add_option("--epsilon", cfg.epsilon, "Convergence tolerance")->capture_default_str();
  denoise_cmd->add_option("--max-iters", cfg.max_iters, "Iteration cap")->capture_default_str();
  denoise_cmd->add_option("--patch", patch_text, "Patch size: auto, full, N or RxC");
  denoise_cmd->add_option("--stride", cfg.stride, "Patch stride, 0 for non-overlapping tiles");
  denoise_cmd->add_option("--penalty", penalty_text, "gamma or nuclear")
    ->check(CLI::IsMember({"gamma", "nuclear"}))
    ->capture_default_str();
  denoise_cmd->add_option("--threshold-factor", cfg.threshold_factor, "Scale of the singular value threshold")
    ->capture_default_str();
  denoise_cmd->add_option("--nuclear-weight", cfg.nuclear_weight, "Constant weight in nuclear mode")
    ->capture_default_str();
  denoise_cmd->add_option("--threads", threads, "Worker threads (default: $NONLLRTV_THREADS or all cores)");
  denoise_cmd->add_flag("--quiet", den.quiet, "No per-iteration log on stderr");

  // evaluate
  EvaluateArgs ev;
  auto *evaluate = app.add_subcommand("evaluate", "MPSNR/MSSIM of a restored cube against a reference");
  evaluate->add_option("reference", ev.reference, "Reference cube")->required();
  evaluate->add_option("test", ev.test, "Cube to score")->required();
  evaluate->add_option("output", ev.output, "Output directory")->required();
  evaluate->add_option("--band", ev.band, "Also export this band of both cubes as PGM");
  evaluate->add_option("--spectrum", ev.pixel, "Also export both spectra at ROW,COL");
  evaluate->add_option("--peak", ev.peak, "Peak intensity")->capture_default_str();
  evaluate->add_option("--runtime", ev.runtime, "Solver runtime to record in the JSON report");

  // spectrum
  fs::path spec_input, spec_output;
  std::string spec_pixel;
  auto *spectrum = app.add_subcommand("spectrum", "Export the spectral profile of one pixel as CSV");
  spectrum->add_option("input", spec_input, "Cube")->required();
  spectrum->add_option("pixel", spec_pixel, "ROW,COL")->required();
  spectrum->add_option("output", spec_output, "Output directory")->required();

  // synth
  fs::path synth_output;
  Index synth_rows = 32, synth_cols = 32, synth_bands = 24;
  int synth_rank = 3;
  std::uint64_t synth_seed = 1;
  auto *synth = app.add_subcommand("synth", "Write a synthetic low-rank piecewise-constant test cube");
  synth->add_option("output", synth_output, "Output directory")->required();
  synth->add_option("--rows", synth_rows)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--cols", synth_cols)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--bands", synth_bands)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--rank", synth_rank)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed)->capture_default_str();

  // replay
  fs::path replay_manifest, replay_output;
  auto *replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_manifest, "manifest.json of an earlier run")->required();
  replay->add_option("output", replay_output, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) {
      if (!sim_case && sim_spec_path.empty()) {
        throw UsageError("simulate needs --case or --spec");
      }
      sim.spec = sim_case ? case_spec(*sim_case, 0) : read_json(sim_spec_path).get<NoiseSpec>();
      if (sim_seed) {
        sim.spec.seed = *sim_seed;
      }
      if (!sim_level.empty()) {
        sim.spec.gaussian_level = sim_level == "sigma" ? GaussianLevel::sigma : GaussianLevel::variance;
      }
      return do_simulate(sim, out);
    }
    if (*denoise_cmd) {
      apply_patch_option(patch_text, cfg);
      cfg.penalty_mode = penalty_text == "nuclear" ? ShrinkageMode::nuclear : ShrinkageMode::nonconvex_gamma;
      cfg.threads = threads ? *threads : default_threads();
      return do_denoise(den, out, err);
    }
    if (*evaluate) {
      return do_evaluate(ev, out);
    }
    if (*spectrum) {
      return do_spectrum(spec_input, spec_pixel, spec_output, out);
    }
    if (*synth) {
      return do_synth(synth_output, synth_rows, synth_cols, synth_bands, synth_rank, synth_seed, out);
    }
    if (*replay) {
      return do_replay(replay_manifest, replay_output, out, err);
    }
  } catch (const NumericalError &e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  std::vector<const char *> argv;
  argv.push_back("nonllrtv");
  for (const auto &a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace nonllrtv::cli
