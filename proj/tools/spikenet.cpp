// Command-line front end: single runs, fixed-size campaigns, size/gamma
// sweeps, and recomputation of statistics from a samples file.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spikenet/campaign.hpp"
#include "spikenet/config.hpp"
#include "spikenet/engine.hpp"
#include "spikenet/io.hpp"

namespace fs = std::filesystem;
using namespace spikenet;

namespace {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_config = 2,
  exit_capped = 3,
  exit_io = 4,
  exit_runtime = 5,
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> bins;
  std::optional<std::uint64_t> max_events;
  std::size_t threads = 0;
  bool quiet = false;
};

CampaignSpec load_spec(const CommonOptions& o) {
  auto spec = parse_config(io::read_file(o.config_path));
  if (o.seed) spec.master_seed = *o.seed;
  if (o.reps) {
    if (*o.reps < 1) throw ConfigError(ConfigErrc::invalid_value, 0, "--reps must be positive");
    spec.replications = *o.reps;
  }
  if (o.bins) {
    if (*o.bins < 1) throw ConfigError(ConfigErrc::invalid_value, 0, "--bins must be positive");
    spec.bins = *o.bins;
  }
  if (o.max_events) {
    if (*o.max_events < 1)
      throw ConfigError(ConfigErrc::invalid_value, 0, "--max-events must be positive");
    spec.max_events = *o.max_events;
  }
  if (!spec.master_seed)
    throw ConfigError(ConfigErrc::missing_key, 0, "no seed given (use --seed or 'seed =' in the config)");
  return spec;
}

RunOptions run_options(const CommonOptions& o) {
  RunOptions ro;
  ro.threads = o.threads;
  if (!o.quiet) {
    ro.progress = [last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
      const std::size_t pct = done * 100 / total;
      if (pct != last || done == total) {
        last = pct;
        std::cerr << "\r" << done << "/" << total << " runs (" << pct << "%)" << std::flush;
        if (done == total) std::cerr << "\n";
      }
    };
  }
  return ro;
}

io::json record_json(const ExtinctionRecord& r) {
  return io::json{{"extinction_time", r.extinction_time},
                  {"spike_events", r.spike_events},
                  {"leak_events", r.leak_events},
                  {"seed", r.seed},
                  {"terminated_by", std::string(to_string(r.terminated_by))}};
}

int cmd_simulate(const CommonOptions& o, std::size_t replication, const std::string& trace_path) {
  const auto spec = load_spec(o);
  const auto params = spec.point_params(0);
  const auto seed = derive_seed(*spec.master_seed, 0, replication);
  ExtinctionRecord rec;
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) throw io::io_error("cannot write " + trace_path);
    rec = run_to_extinction(params, seed, trace);
  } else {
    rec = run_to_extinction(params, seed);
  }
  std::cout << record_json(rec).dump(2) << "\n";
  return rec.terminated_by == Termination::extinction ? exit_ok : exit_capped;
}

io::RunManifest start_manifest(const CampaignSpec& spec, std::string command) {
  io::RunManifest m;
  m.config = spec;
  m.command = std::move(command);
  m.started_at = io::utc_timestamp(std::chrono::system_clock::now());
  return m;
}

void finish_manifest(io::RunManifest& m, const fs::path& out) {
  m.finished_at = io::utc_timestamp(std::chrono::system_clock::now());
  io::write_file_atomic(out / "manifest.json", io::dump(io::manifest_json(m)));
}

int cmd_replicate(const CommonOptions& o, const fs::path& out) {
  const auto spec = load_spec(o);
  if (spec.sweep_points() != 1 || !spec.size_sweep.empty() || !spec.gamma_sweep.empty())
    throw ConfigError(ConfigErrc::sweep_conflict, 0, "replicate runs a single point; use 'scaling' for sweeps");
  auto manifest = start_manifest(spec, "replicate");
  const auto result = run_campaign(spec, run_options(o));
  fs::create_directories(out);
  const auto& point = result.points.front();
  io::write_file_atomic(out / "samples.csv", io::samples_csv(point.records));
  io::write_file_atomic(out / "summary.json", io::dump(io::summary_json(point.summary)));
  finish_manifest(manifest, out);
  if (!o.quiet) {
    const auto& s = point.summary;
    std::cerr << "mean=" << (s.mean ? std::to_string(*s.mean) : "n/a")
              << " renormalized_variance="
              << (s.renormalized_variance ? std::to_string(*s.renormalized_variance) : "n/a")
              << " ks=" << (s.ks_distance ? std::to_string(*s.ks_distance) : "n/a")
              << " capped=" << s.n_capped << "\n";
  }
  return result.clean() ? exit_ok : exit_capped;
}

int cmd_scaling(const CommonOptions& o, const fs::path& out) {
  const auto spec = load_spec(o);
  if (spec.size_sweep.empty() && spec.gamma_sweep.empty())
    throw ConfigError(ConfigErrc::missing_key, 0, "scaling needs size_sweep or gamma_sweep in the config");
  auto manifest = start_manifest(spec, "scaling");
  const auto result = run_campaign(spec, run_options(o));
  fs::create_directories(out);
  for (const auto& p : result.points) {
    const std::string tag = !spec.size_sweep.empty() ? "n" + std::to_string(p.neuron_count)
                                                     : "g" + std::to_string(p.sweep_index);
    io::write_file_atomic(out / ("samples_" + tag + ".csv"), io::samples_csv(p.records));
    io::write_file_atomic(out / ("summary_" + tag + ".json"), io::dump(io::summary_json(p.summary)));
  }
  io::write_file_atomic(out / "summary.json", io::dump(io::sweep_summary_json(result)));
  if (!spec.size_sweep.empty())
    io::write_file_atomic(out / "logfit.json", io::dump(io::logfit_file_json(result)));
  finish_manifest(manifest, out);
  if (!o.quiet && result.log_fit)
    std::cerr << "C=" << result.log_fit->C << " intercept=" << result.log_fit->intercept
              << " r2=" << result.log_fit->r_squared << "\n";
  return result.clean() ? exit_ok : exit_capped;
}

int cmd_analyze(const fs::path& in, std::optional<std::size_t> bins, const std::string& out) {
  const auto records = io::parse_samples_csv(io::read_file(in));
  if (!bins) {
    const auto manifest_path = in.parent_path() / "manifest.json";
    bins = fs::exists(manifest_path) ? io::parse_manifest(io::read_file(manifest_path)).config.bins
                                     : default_bins;
  }
  if (*bins < 1) throw ConfigError(ConfigErrc::invalid_value, 0, "--bins must be positive");
  const auto summary = summarize_records(records, *bins);
  const auto text = io::dump(io::summary_json(summary));
  if (out.empty()) {
    std::cout << text;
  } else {
    fs::create_directories(out);
    io::write_file_atomic(fs::path(out) / "summary.json", text);
  }
  return summary.clean() ? exit_ok : exit_capped;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven simulator of leaky integrate-and-spike networks on lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));

  CommonOptions common;
  std::string out_dir = "results";
  std::string trace_path;
  std::size_t replication = 0;

  auto add_common = [&](CLI::App* sub, bool campaign) {
    sub->add_option("--config", common.config_path, "Campaign configuration file")
        ->required();
    sub->add_option("--seed", common.seed, "Master seed (required here or in the config)");
    sub->add_option("--max-events", common.max_events, "Per-run event cap");
    if (campaign) {
      sub->add_option("--reps", common.reps, "Replications per sweep point");
      sub->add_option("--bins", common.bins, "Histogram bins");
      sub->add_option("--out", out_dir, "Output directory");
      sub->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
      sub->add_flag("--quiet", common.quiet, "No progress output");
    }
  };

  auto* simulate = app.add_subcommand("simulate", "Run one trajectory and print its record");
  add_common(simulate, false);
  simulate->add_option("--replication", replication, "Replication index whose seed to use");
  simulate->add_option("--trace", trace_path, "Write the event trace as CSV");

  auto* replicate = app.add_subcommand("replicate", "Fixed-size campaign: samples.csv, summary.json");
  add_common(replicate, true);

  auto* scaling = app.add_subcommand("scaling", "Size or gamma sweep: per-point summaries, logfit.json");
  add_common(scaling, true);

  std::string in_path;
  std::optional<std::size_t> analyze_bins;
  std::string analyze_out;
  auto* analyze = app.add_subcommand("analyze", "Recompute the summary from a samples CSV");
  analyze->add_option("--in", in_path, "samples.csv to analyze")->required();
  analyze->add_option("--bins", analyze_bins, "Histogram bins (default: from manifest.json, else 50)");
  analyze->add_option("--out", analyze_out, "Write summary.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*simulate) return cmd_simulate(common, replication, trace_path);
    if (*replicate) return cmd_replicate(common, out_dir);
    if (*scaling) return cmd_scaling(common, out_dir);
    if (*analyze) return cmd_analyze(in_path, analyze_bins, analyze_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_config;
  } catch (const graph_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const io::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return exit_io;
  } catch (const io::format_error& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return exit_io;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_usage;
}
