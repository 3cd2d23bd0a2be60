#include "owtt/mission.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <thread>

#include "owtt/doa.hpp"
#include "owtt/filter.hpp"
#include "owtt/ranging.hpp"
#include "owtt/waveforms.hpp"
#include "owtt/world.hpp"

namespace owtt::mission {
namespace {

using nlohmann::json;

constexpr double kDynamicsDt = 0.1;
constexpr int kSubsteps = 10;

// Stream ids for make_stream; vehicles take a block of kVehicleStreams.
constexpr std::uint64_t kBeaconStream = 1;
constexpr std::uint64_t kVehicleStreamBase = 100;
constexpr std::uint64_t kVehicleStreams = 10;
enum VehicleStream : std::uint64_t { kSensor = 0, kFilter = 1, kReception = 2, kLbl = 3, kBias = 4 };

double round4(double v) { return std::round(v * 1e4) / 1e4; }

json vec(const Eigen::Vector2d& v) { return json::array({round4(v.x()), round4(v.y())}); }

Eigen::Vector2d read_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() < 2) throw ConfigError(std::string("log: ") + what + " is not a vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

Source source_from_string(const std::string& s) {
  if (s == "boat") return Source::Boat;
  if (s == "lbl_east") return Source::LblEast;
  if (s == "lbl_west") return Source::LblWest;
  throw ConfigError("unknown source '" + s + "'");
}

Cause cause_from_string(const std::string& s) {
  for (Cause c : {Cause::Ok, Cause::BeaconOff, Cause::Surfaced, Cause::NoDetection, Cause::Inconsistent,
                  Cause::OutOfRange}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("log: unknown cause '" + s + "'");
}

bool sim_affecting(const Command& c) {
  return c.type == Command::Type::SetMode || c.type == Command::Type::SetBeaconTarget ||
         c.type == Command::Type::SetSource;
}

// Runs fn(i) for every i, in parallel when more than one core is available.
// Each call touches only its own vehicle, so results do not depend on the
// schedule.
template <typename Fn>
void for_each_index(std::size_t n, Fn fn) {
  if (n > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<void>> jobs;
    jobs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

struct VehicleState {
  VehicleState(const VehicleConfig& vc, const MissionConfig& mc, std::size_t index)
      : config(&vc),
        sensor(make_sensor(vc, mc, index)),
        pf(mc.filter, stream(mc, index, kFilter)()),
        reception_rng(stream(mc, index, kReception)),
        lbl_rng(stream(mc, index, kLbl)) {
    truth.name = vc.name;
    truth.position = vc.start;
    truth.depth_m = vc.start_depth_m;
    truth.heading_deg = geometry::wrap_360(vc.start_heading_deg);
    truth.speed_scale = vc.speed_scale;
    heading_measured = sensor.measure(truth.heading_deg, kDynamicsDt);
    clock = mc.clock;
    clock.drift_rate = vc.clock_drift_rate;
    dr = vc.start;
    memory.deploy = behaviors::drive(vc.start_heading_deg, mc.cruise);
    setpoints = behaviors::thruster_off(truth.heading_deg, mc.cruise.depth_m);
    memory.last = setpoints;
    estimate = pf.estimate(truth.depth_m);
  }

  static world::HeadingSensor make_sensor(const VehicleConfig& vc, const MissionConfig& mc, std::size_t index) {
    double bias = 0.0;
    if (vc.heading_bias_deg) {
      bias = *vc.heading_bias_deg;
    } else {
      auto r = stream(mc, index, kBias);
      bias = std::normal_distribution<double>(0.0, mc.heading_bias_sigma_deg)(r);
    }
    return world::HeadingSensor(bias, vc.heading_noise_deg, vc.heading_tau_s, stream(mc, index, kSensor));
  }

  static world::Rng stream(const MissionConfig& mc, std::size_t index, std::uint64_t which) {
    return world::make_stream(mc.seed, kVehicleStreamBase + kVehicleStreams * index + which);
  }

  const VehicleConfig* config;
  world::VehicleTruth truth;
  world::HeadingSensor sensor;
  double heading_measured = 0.0;
  filter::ParticleFilter pf;
  filter::StateEstimate estimate;
  ranging::ModeDecision decision;
  behaviors::BehaviorMemory memory;
  filter::AttitudeBuffer attitudes;
  world::Setpoints setpoints;
  world::ClockModel clock;
  world::Rng reception_rng;
  world::Rng lbl_rng;
  Eigen::Vector2d dr = Eigen::Vector2d::Zero();
  double distance = 0.0;
  std::optional<double> mode_time;
  std::unique_ptr<ranging::RowDumpWriter> dump;

  // Per-tick scratch.
  Cause cause = Cause::Ok;
  std::optional<ranging::RangeDistribution> range;
  std::vector<std::vector<double>> pair_powers;
  const doa::SpdBeamformer* beamformer = nullptr;
  std::optional<double> range_mle;
  double peak_time = 0.0;
  Eigen::Vector2d motion = Eigen::Vector2d::Zero();
  double depth_before = 0.0;
};

}  // namespace

const char* to_string(Cause c) {
  switch (c) {
    case Cause::Ok: return "ok";
    case Cause::BeaconOff: return "beacon_off";
    case Cause::Surfaced: return "surfaced";
    case Cause::NoDetection: return "no_detection";
    case Cause::Inconsistent: return "inconsistent";
    case Cause::OutOfRange: return "out_of_range";
  }
  return "unknown";
}

const char* to_string(Source s) {
  switch (s) {
    case Source::Boat: return "boat";
    case Source::LblEast: return "lbl_east";
    case Source::LblWest: return "lbl_west";
  }
  return "unknown";
}

json to_json(const TickRecord& r) {
  json j;
  j["type"] = "tick";
  j["t"] = r.t;
  j["beacon"] = {{"pos", vec(r.beacon.position)},
                 {"mode", r.beacon.mode},
                 {"source", to_string(r.beacon.source)},
                 {"source_pos", vec(r.beacon.source_position)}};
  j["events"] = json::array();
  for (const auto& c : r.events) j["events"].push_back(command_to_json(c));
  j["vehicles"] = json::array();
  for (const auto& v : r.vehicles) {
    json jv;
    jv["name"] = v.name;
    jv["truth"] = json::array({round4(v.truth.x()), round4(v.truth.y()), round4(v.depth_m)});
    jv["heading"] = round4(v.heading_deg);
    jv["heading_measured"] = round4(v.heading_measured_deg);
    jv["est_rel"] = vec(v.est_rel);
    jv["est_abs"] = vec(v.est_abs);
    jv["cov"] = json::array({round4(v.covariance(0, 0)), round4(v.covariance(0, 1)), round4(v.covariance(1, 1))});
    jv["converged"] = v.converged;
    jv["valid"] = v.valid;
    jv["cause"] = to_string(v.cause);
    jv["mode"] = v.mode ? json(*v.mode) : json(nullptr);
    jv["mode_time"] = v.mode_time ? json(round4(*v.mode_time)) : json(nullptr);
    jv["behavior"] = v.behavior;
    jv["setpoint"] = {{"heading", round4(v.setpoints.heading_deg)},
                      {"speed", round4(v.setpoints.speed)},
                      {"depth", round4(v.setpoints.depth_m)},
                      {"thruster", v.setpoints.thruster_active},
                      {"surfaced", v.setpoints.surfaced}};
    jv["dr"] = vec(v.dr);
    jv["lbl"] = v.lbl ? vec(*v.lbl) : json(nullptr);
    jv["range_mle"] = v.range_mle ? json(round4(*v.range_mle)) : json(nullptr);
    jv["dist"] = round4(v.distance_m);
    j["vehicles"].push_back(jv);
  }
  return j;
}

TickRecord tick_from_json(const json& j) {
  try {
    TickRecord r;
    r.t = j.at("t").get<double>();
    const auto& b = j.at("beacon");
    r.beacon.position = read_vec(b.at("pos"), "beacon.pos");
    r.beacon.mode = b.at("mode").get<int>();
    r.beacon.source = source_from_string(b.at("source").get<std::string>());
    r.beacon.source_position = read_vec(b.at("source_pos"), "beacon.source_pos");
    if (j.contains("events")) {
      for (const auto& e : j.at("events")) r.events.push_back(command_from_json(e));
    }
    for (const auto& jv : j.at("vehicles")) {
      VehicleRecord v;
      v.name = jv.at("name").get<std::string>();
      const auto& tr = jv.at("truth");
      v.truth = {tr.at(0).get<double>(), tr.at(1).get<double>()};
      v.depth_m = tr.at(2).get<double>();
      v.heading_deg = jv.at("heading").get<double>();
      v.heading_measured_deg = jv.value("heading_measured", v.heading_deg);
      v.est_rel = read_vec(jv.at("est_rel"), "est_rel");
      v.est_abs = read_vec(jv.at("est_abs"), "est_abs");
      const auto& c = jv.at("cov");
      v.covariance << c.at(0).get<double>(), c.at(1).get<double>(), c.at(1).get<double>(), c.at(2).get<double>();
      v.converged = jv.at("converged").get<bool>();
      v.valid = jv.at("valid").get<bool>();
      v.cause = cause_from_string(jv.at("cause").get<std::string>());
      if (!jv.at("mode").is_null()) v.mode = jv.at("mode").get<int>();
      if (!jv.at("mode_time").is_null()) v.mode_time = jv.at("mode_time").get<double>();
      v.behavior = jv.at("behavior").get<std::string>();
      const auto& sp = jv.at("setpoint");
      v.setpoints = {sp.at("heading").get<double>(), sp.at("speed").get<double>(), sp.at("depth").get<double>(),
                     sp.at("thruster").get<bool>(), sp.at("surfaced").get<bool>()};
      v.dr = read_vec(jv.at("dr"), "dr");
      if (!jv.at("lbl").is_null()) v.lbl = read_vec(jv.at("lbl"), "lbl");
      if (!jv.at("range_mle").is_null()) v.range_mle = jv.at("range_mle").get<double>();
      v.distance_m = jv.at("dist").get<double>();
      r.vehicles.push_back(std::move(v));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("log: malformed tick record: ") + e.what());
  }
}

bool CommandQueue::push(Command c) {
  std::lock_guard lock(mutex_);
  if (items_.size() >= capacity_) return false;
  items_.push_back(std::move(c));
  return true;
}

std::vector<Command> CommandQueue::drain() {
  std::lock_guard lock(mutex_);
  std::vector<Command> out(items_.begin(), items_.end());
  items_.clear();
  return out;
}

struct Mission::Impl {
  explicit Impl(MissionConfig c)
      : cfg((c.validate(), std::move(c))),
        bank(waveforms::default_template_bank(cfg.sample_rate)),
        processor(bank, cfg.n_samples, {cfg.receiver.detection_threshold, cfg.receiver.consistency_bound}),
        beacon_rng(world::make_stream(cfg.seed, kBeaconStream)) {
    receiver.geometry = doa::ArrayGeometry::pyramid(cfg.receiver.array_edge_m);
    receiver.n_samples = cfg.n_samples;
    receiver.sample_rate = cfg.sample_rate;
    receiver.azimuth_bias.amplitude_deg = cfg.receiver.azimuth_bias_amplitude_deg;
    if (!cfg.receiver.bias_table_path.empty()) {
      try {
        bias_table = doa::AzimuthBiasTable::load_csv(cfg.receiver.bias_table_path);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("receiver.bias_table: ") + e.what());
      }
    }
    const doa::ConicalGrid conical(cfg.receiver.conical_resolution_deg);
    for (const auto& [mode, w] : bank.modes()) {
      const auto [lo, hi] = w.band();
      beamformers.emplace(mode, doa::SpdBeamformer(receiver.geometry,
                                                   doa::FrequencyBand::from_range(lo, hi, processor.fft_len(),
                                                                                  cfg.sample_rate),
                                                   conical, cfg.environment.sound_speed));
    }
    beacon = cfg.beacon;
    beacon.mode = 0;
    cfg.filter.beacon_depth_m = beacon.depth_m;
    vehicles.reserve(cfg.fleet.size());
    for (std::size_t i = 0; i < cfg.fleet.size(); ++i) vehicles.emplace_back(cfg.fleet[i], cfg, i);
    if (!cfg.external_control) {
      pending = cfg.script;
      std::stable_sort(pending.begin(), pending.end(),
                       [](const Command& a, const Command& b) { return a.at_time.value_or(0) < b.at_time.value_or(0); });
    }
  }

  Eigen::Vector2d source_position() const {
    switch (source) {
      case Source::LblEast: return cfg.lbl.east;
      case Source::LblWest: return cfg.lbl.west;
      case Source::Boat: break;
    }
    return beacon.position;
  }

  void apply(const Command& c) {
    switch (c.type) {
      case Command::Type::SetMode: beacon.mode = c.mode; break;
      case Command::Type::SetBeaconTarget:
        beacon.target = {c.x, c.y};
        if (c.speed) beacon.speed = *c.speed;
        break;
      case Command::Type::SetSource: source = source_from_string(c.source); break;
      case Command::Type::Pause: paused = true; break;
      case Command::Type::Resume: paused = false; break;
      case Command::Type::SetTimeScale: time_scale = c.time_scale; break;
    }
  }

  std::vector<Command> apply_due(double now) {
    std::vector<Command> applied;
    std::vector<Command> keep;
    for (auto& c : pending) {
      if (c.at_time.value_or(now) <= now) {
        apply(c);
        if (sim_affecting(c)) applied.push_back(c);
      } else {
        keep.push_back(std::move(c));
      }
    }
    pending = std::move(keep);
    return applied;
  }

  // Capture, matched filtering, mode decision and pair beamforming for one
  // vehicle at whole second k.
  void acoustic_front(VehicleState& v, long k, const Eigen::Vector3d& source_llf, double jitter) {
    v.cause = Cause::Ok;
    v.range.reset();
    v.range_mle.reset();
    v.pair_powers.clear();
    v.beamformer = nullptr;
    if (v.truth.surfaced(cfg.limits)) {
      v.cause = Cause::Surfaced;
      return;
    }
    if (!beacon.active()) {
      v.cause = Cause::BeaconOff;
      v.decision.push(std::nullopt);
      return;
    }
    world::ReceptionTruth truth;
    const auto rec = world::synthesize_reception(source_llf, &bank.at(beacon.mode), jitter, v.truth, k,
                                                 cfg.environment, v.clock, receiver, v.reception_rng, &truth);
    const auto analysis = processor.analyze(rec);
    const auto before = v.decision.confirmed;
    ranging::update_decision(analysis, v.decision);
    if (v.decision.confirmed != before) {
      v.mode_time = static_cast<double>(k) + static_cast<double>(cfg.n_samples) / cfg.sample_rate;
    }
    if (!analysis.winner) {
      v.cause = truth.direct_range_m > cfg.filter.max_range_m ? Cause::OutOfRange : Cause::NoDetection;
      return;
    }
    const auto& resp = analysis.responses.at(*analysis.winner);
    if (!resp.consistent) {
      v.cause = Cause::Inconsistent;
      return;
    }
    v.range = ranging::normalize_to_range(resp.combined, cfg.environment.sound_speed, cfg.sample_rate);
    v.range_mle = v.range->mle_range();
    v.peak_time = static_cast<double>(k) + static_cast<double>(v.range->argmax()) / cfg.sample_rate;
    v.beamformer = &beamformers.at(*analysis.winner);
    v.pair_powers = v.beamformer->pair_responses(analysis.spectra);
    if (v.dump) v.dump->write_row(v.range->weights());
  }

  void acoustic_back(VehicleState& v) {
    if (v.cause == Cause::Surfaced) {
      v.pf.reset();
    } else if (v.range) {
      const auto* bf = v.beamformer;
      const auto& powers = v.pair_powers;
      const auto& table = bias_table;
      const filter::AngleEvaluator eval = [bf, &powers, &table](std::span<const doa::Direction> dirs) {
        if (table.empty()) return bf->evaluate(powers, dirs);
        std::vector<doa::Direction> measured(dirs.begin(), dirs.end());
        for (auto& d : measured) d.azimuth_deg = table.measured_for(d.azimuth_deg);
        return bf->evaluate(powers, measured);
      };
      v.pf.update(*v.range, eval, filter::attitude_at_peak(v.attitudes, v.peak_time));
    }
    const double sog = v.motion.norm();
    const double heading = sog > 0.0 ? geometry::compass_heading_of(v.motion) : v.heading_measured;
    v.pf.predict(sog, heading, -(v.truth.depth_m - v.depth_before), 1.0);
    v.estimate = v.pf.estimate(v.truth.depth_m);
  }

  TickRecord step() {
    const long k = static_cast<long>(std::llround(now));
    TickRecord rec;
    rec.events = apply_due(now);

    const Eigen::Vector2d src = source_position();
    const Eigen::Vector3d source_llf{src.x(), src.y(), -beacon.depth_m};
    const double jitter = beacon.active() ? world::draw_jitter(beacon, beacon_rng) : 0.0;
    for_each_index(vehicles.size(), [&](std::size_t i) { acoustic_front(vehicles[i], k, source_llf, jitter); });

    for (auto& v : vehicles) {
      v.attitudes.push(now, {v.truth.roll_deg, v.truth.pitch_deg, geometry::compass_to_enu_yaw(v.heading_measured)});
      v.motion.setZero();
      v.depth_before = v.truth.depth_m;
    }
    for (int s = 1; s <= kSubsteps; ++s) {
      const double t = now + s * kDynamicsDt;
      for (auto& v : vehicles) {
        world::step_vehicle(v.truth, v.setpoints, kDynamicsDt, cfg.limits, cfg.environment);
        v.heading_measured = v.sensor.measure(v.truth.heading_deg, kDynamicsDt);
        // What the vehicle believes it did: modelled speed along the compass.
        const double sog = world::sog_from_rpm(v.truth.rpm, v.truth.pitch_deg);
        const Eigen::Vector2d step = sog * kDynamicsDt * geometry::compass_unit(v.heading_measured);
        v.motion += step;
        v.dr += step;
        v.distance += v.truth.sog() * v.truth.speed_scale * kDynamicsDt;
        v.attitudes.push(t, {v.truth.roll_deg, v.truth.pitch_deg, geometry::compass_to_enu_yaw(v.heading_measured)});
      }
      world::step_beacon(beacon, kDynamicsDt);
    }
    now += 1.0;

    for_each_index(vehicles.size(), [&](std::size_t i) { acoustic_back(vehicles[i]); });

    rec.t = now;
    rec.beacon = {beacon.position, beacon.mode, source, source_position()};
    for (auto& v : vehicles) {
      behaviors::DispatchInput in;
      in.confirmed_mode = v.decision.confirmed;
      in.estimate_valid = v.estimate.converged;
      in.rel_beacon = v.estimate.mean.head<2>();
      in.heading_deg = v.heading_measured;
      in.depth_m = v.truth.depth_m;
      in.time_s = now;
      v.setpoints = behaviors::dispatch(in, v.config->modes, v.memory, cfg.cruise);

      VehicleRecord r;
      r.name = v.truth.name;
      r.truth = v.truth.position;
      r.depth_m = v.truth.depth_m;
      r.heading_deg = v.truth.heading_deg;
      r.heading_measured_deg = v.heading_measured;
      r.est_rel = v.estimate.mean.head<2>();
      r.est_abs = rec.beacon.source_position - r.est_rel;
      r.covariance = v.estimate.covariance;
      r.converged = v.estimate.converged;
      r.valid = v.range.has_value();
      r.cause = v.cause;
      r.mode = v.decision.confirmed;
      r.mode_time = v.mode_time;
      r.behavior = v.decision.confirmed ? behaviors::behavior_name(v.config->modes.at(*v.decision.confirmed)) : "none";
      r.setpoints = v.setpoints;
      r.dr = v.dr;
      r.range_mle = v.range_mle;
      r.distance_m = v.distance;
      r.lbl = lbl_measurement(v);
      rec.vehicles.push_back(std::move(r));
    }
    return rec;
  }

  std::optional<Eigen::Vector2d> lbl_measurement(VehicleState& v) {
    std::normal_distribution<double> noise(0.0, cfg.lbl.range_sigma_m);
    const double re = (v.truth.position - cfg.lbl.east).norm() + noise(v.lbl_rng);
    const double rw = (v.truth.position - cfg.lbl.west).norm() + noise(v.lbl_rng);
    if (v.truth.surfaced(cfg.limits) || re > cfg.filter.max_range_m || rw > cfg.filter.max_range_m) return std::nullopt;
    const auto fix = world::lbl_fix(re, rw, cfg.lbl);
    if (fix.status != world::LblStatus::Ok) return std::nullopt;
    return fix.position;
  }

  MissionConfig cfg;
  waveforms::TemplateBank bank;
  ranging::ReceptionProcessor processor;
  std::map<int, doa::SpdBeamformer> beamformers;
  doa::AzimuthBiasTable bias_table;
  world::ReceiverModel receiver;
  world::BeaconState beacon;
  Source source = Source::Boat;
  world::Rng beacon_rng;
  std::vector<VehicleState> vehicles;
  std::vector<Command> pending;
  double now = 0.0;
  bool paused = false;
  double time_scale = 1.0;
};

Mission::Mission(MissionConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Mission::~Mission() = default;

const MissionConfig& Mission::config() const { return impl_->cfg; }
double Mission::time() const { return impl_->now; }
bool Mission::finished() const { return impl_->now + 1.0 > impl_->cfg.duration_s + 1e-9; }
bool Mission::paused() const { return impl_->paused; }
double Mission::time_scale() const { return impl_->time_scale; }

void Mission::submit(const Command& c) {
  if (sim_affecting(c)) {
    impl_->pending.push_back(c);
  } else {
    impl_->apply(c);
  }
}

TickRecord Mission::step() { return impl_->step(); }

void Mission::enable_range_dumps(const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (auto& v : impl_->vehicles) {
    const auto path = (std::filesystem::path(dir) / (v.truth.name + ".owrd")).string();
    v.dump = std::make_unique<ranging::RowDumpWriter>(path, impl_->cfg.sample_rate, impl_->cfg.environment.sound_speed,
                                                      static_cast<std::uint32_t>(impl_->cfg.n_samples));
  }
}

json Mission::header() const {
  json h;
  h["type"] = "header";
  h["schema_version"] = kLogSchemaVersion;
  h["config"] = to_json(impl_->cfg);
  return h;
}

RunSummary run_mission(const MissionConfig& config, std::ostream& log, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Mission mission(config);
  if (config.dump_ranges && !options.dump_dir.empty()) mission.enable_range_dumps(options.dump_dir);
  log << mission.header().dump() << '\n';
  RunSummary summary;
  auto next = std::chrono::steady_clock::now();
  while (!mission.finished()) {
    if (options.commands) {
      for (auto& c : options.commands->drain()) mission.submit(c);
    }
    if (options.realtime) {
      if (mission.paused()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        next = std::chrono::steady_clock::now();
        continue;
      }
      std::this_thread::sleep_until(next);
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / mission.time_scale()));
      // Pick up commands that arrived while waiting for the tick boundary.
      if (options.commands) {
        for (auto& c : options.commands->drain()) mission.submit(c);
      }
      if (mission.paused()) continue;
    }
    const auto rec = mission.step();
    log << to_json(rec).dump() << '\n';
    if (options.on_tick) options.on_tick(rec, mission);
    ++summary.ticks;
  }
  log.flush();
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

MissionLog read_log(std::istream& in) {
  MissionLog out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError("log line " + std::to_string(n) + ": " + e.what());
    }
    const auto type = j.value("type", std::string{});
    if (type == "header") {
      if (j.value("schema_version", 0) != kLogSchemaVersion) throw ConfigError("log: unsupported schema version");
      out.header = std::move(j);
    } else if (type == "tick") {
      out.ticks.push_back(tick_from_json(j));
    } else {
      throw ConfigError("log line " + std::to_string(n) + ": unknown record type");
    }
  }
  if (out.header.is_null()) throw ConfigError("log: missing header record");
  return out;
}

MissionLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open log " + path);
  return read_log(in);
}

}  // namespace owtt::mission
