// owtt: run missions, analyse logs and calibrate receivers.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "owtt/bridge.hpp"
#include "owtt/calibration.hpp"
#include "owtt/mission.hpp"
#include "owtt/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using namespace owtt;

void print_stats(const stats::MissionStats& s, std::ostream& out) {
  out << std::fixed << std::setprecision(3);
  out << "vehicle      n     mean_x   mean_y   s_maj    s_min    s_x      s_y      p68      p95\n";
  auto row = [&](const std::string& name, const stats::ErrorStats& e) {
    out << std::left << std::setw(10) << name << std::right << std::setw(5) << e.count << "  " << std::setw(8)
        << e.mean.x() << ' ' << std::setw(8) << e.mean.y() << ' ' << std::setw(8) << e.sigma_major << ' '
        << std::setw(8) << e.sigma_minor << ' ' << std::setw(8) << e.sigma_x << ' ' << std::setw(8) << e.sigma_y
        << ' ' << std::setw(8) << e.p68 << ' ' << std::setw(8) << e.p95 << '\n';
  };
  for (const auto& [name, e] : s.per_vehicle) row(name, e);
  row("all", s.combined);
}

int cmd_run(const std::string& config_arg, std::optional<std::uint64_t> seed, const std::string& out_dir,
            const std::string& bridge_addr, double time_scale, bool dump) {
  auto config = mission::resolve_config(config_arg);
  if (seed) config.seed = *seed;
  if (dump) config.dump_ranges = true;
  std::filesystem::create_directories(out_dir);
  const auto log_path = std::filesystem::path(out_dir) / (config.name + ".jsonl");
  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());

  mission::RunOptions options;
  if (config.dump_ranges) options.dump_dir = (std::filesystem::path(out_dir) / "ranges").string();
  mission::CommandQueue queue;
  std::unique_ptr<bridge::Server> server;
  bridge::SnapshotBuilder snapshots;
  if (!bridge_addr.empty()) {
    server = std::make_unique<bridge::Server>(bridge::parse_endpoint(bridge_addr), queue,
                                              bridge::hello_message(config));
    std::cerr << "bridge listening on port " << server->port() << " at /sim\n";
    mission::Command scale;
    scale.type = mission::Command::Type::SetTimeScale;
    scale.time_scale = time_scale;
    queue.push(scale);
    options.commands = &queue;
    options.realtime = true;
    options.on_tick = [&](const mission::TickRecord& rec, const mission::Mission& m) {
      server->publish(snapshots.build(rec, m.paused(), m.time_scale()));
    };
  }
  const auto summary = mission::run_mission(config, log, options);
  std::cout << "wrote " << log_path.string() << " (" << summary.ticks << " ticks, " << std::setprecision(3)
            << summary.wall_seconds << " s)\n";
  return kExitOk;
}

int cmd_stats(const std::string& log_path, const std::string& ref, bool as_json) {
  const auto log = mission::read_log_file(log_path);
  const auto s = stats::compute_error_stats(log, stats::reference_from_string(ref));
  if (as_json) {
    std::cout << stats::to_json(s).dump(2) << '\n';
  } else {
    print_stats(s, std::cout);
  }
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::string& out_dir) {
  const auto log = mission::read_log_file(log_path);
  const auto report = stats::replay_validation(log, out_dir);
  std::cout << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_calibrate(const std::string& config_arg, const std::string& out, const std::string& apply,
                  std::uint64_t seed, std::optional<double> noise_sigma) {
  const auto config = mission::resolve_config(config_arg);
  calibration::CalibrationOptions options;
  options.seed = seed;
  if (noise_sigma) options.noise_sigma = *noise_sigma;
  doa::AzimuthBiasTable applied;
  if (!apply.empty()) applied = doa::AzimuthBiasTable::load_csv(apply);
  const auto result = calibration::run_calibration(config, options, applied);
  result.table.save_csv(out);
  std::cout << std::fixed << std::setprecision(3) << "captures " << result.samples.size() << ", missed "
            << result.missed << "\nrange error p68 " << result.range_p68_m << " m\nazimuth error p68 raw "
            << result.azimuth_raw_p68_deg << " deg, corrected " << result.azimuth_corrected_p68_deg
            << " deg\nwrote " << out << '\n';
  return kExitOk;
}

int cmd_preset(const std::string& name, const std::string& out) {
  const auto config = mission::preset(name);
  const auto text = mission::to_json(config).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OWTT-iUSBL fleet simulator and navigation tools"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a mission and write a JSON-lines log");
  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::string run_out = ".";
  std::string run_bridge;
  double run_scale = 1.0;
  bool run_dump = false;
  run->add_option("config", run_config, "Preset name or config file")->required();
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--bridge", run_bridge, "Serve the live sim on host:port");
  run->add_option("--time-scale", run_scale, "Sim seconds per wall second with --bridge")->check(CLI::PositiveNumber);
  run->add_flag("--dump-ranges", run_dump, "Write range distributions next to the log");

  auto* st = app.add_subcommand("stats", "Navigation error statistics from a log");
  std::string st_log;
  std::string st_ref = "truth";
  bool st_json = false;
  st->add_option("log", st_log, "Mission log")->required();
  st->add_option("--ref", st_ref, "Reference: truth or lbl")->check(CLI::IsMember({"truth", "lbl"}));
  st->add_flag("--json", st_json, "Print JSON");

  auto* rp = app.add_subcommand("replay", "Reconstruct trajectories and write CSV series");
  std::string rp_log;
  std::string rp_out;
  rp->add_option("log", rp_log, "Mission log")->required();
  rp->add_option("--out", rp_out, "Report directory")->required();

  auto* cal = app.add_subcommand("calibrate", "Simulated rotational calibration");
  std::string cal_config;
  std::string cal_out = "bias_table.csv";
  std::string cal_apply;
  std::uint64_t cal_seed = 1;
  std::optional<double> cal_noise;
  cal->add_option("config", cal_config, "Preset name or config file")->required();
  cal->add_option("--out", cal_out, "Bias table CSV to write");
  cal->add_option("--apply", cal_apply, "Bias table to apply when reporting corrected errors");
  cal->add_option("--seed", cal_seed, "Noise seed");
  cal->add_option("--noise-sigma", cal_noise, "Ambient noise for the run (default 8)")->check(CLI::NonNegativeNumber);

  auto* pr = app.add_subcommand("preset", "Print a built-in mission config");
  std::string pr_name;
  std::string pr_out;
  pr->add_option("name", pr_name, "mission1 or mission6")->required();
  pr->add_option("--out", pr_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, run_seed, run_out, run_bridge, run_scale, run_dump);
    if (*st) return cmd_stats(st_log, st_ref, st_json);
    if (*rp) return cmd_replay(rp_log, rp_out);
    if (*cal) return cmd_calibrate(cal_config, cal_out, cal_apply, cal_seed, cal_noise);
    if (*pr) return cmd_preset(pr_name, pr_out);
  } catch (const mission::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
