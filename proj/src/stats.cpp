#include "owtt/stats.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "owtt/geometry.hpp"

namespace owtt::stats {
namespace {

using nlohmann::json;

std::optional<Eigen::Vector2d> reference_of(const mission::VehicleRecord& v, Reference ref) {
  if (ref == Reference::Truth) return v.truth;
  return v.lbl;
}

std::map<std::string, std::vector<Eigen::Vector2d>> collect_errors(const mission::MissionLog& log, Reference ref) {
  std::map<std::string, std::vector<Eigen::Vector2d>> out;
  for (const auto& tick : log.ticks) {
    for (const auto& v : tick.vehicles) {
      out[v.name];
      if (!v.converged) continue;
      const auto r = reference_of(v, ref);
      if (!r) continue;
      out[v.name].push_back(v.est_abs - *r);
    }
  }
  return out;
}

void write_cdf(const std::string& path, const std::map<std::string, std::vector<double>>& norms) {
  std::ofstream out(path);
  out << "vehicle,error_m,cdf\n";
  auto emit = [&](const std::string& name, std::vector<double> e) {
    std::sort(e.begin(), e.end());
    for (std::size_t i = 0; i < e.size(); ++i) {
      out << name << ',' << e[i] << ',' << static_cast<double>(i + 1) / static_cast<double>(e.size()) << '\n';
    }
  };
  std::vector<double> all;
  for (const auto& [name, e] : norms) {
    emit(name, e);
    all.insert(all.end(), e.begin(), e.end());
  }
  emit("all", all);
}

std::optional<double> trackline_heading(const json& header) {
  if (!header.contains("config")) return std::nullopt;
  const json fleet = header["config"].value("fleet", json::array());
  for (const auto& v : fleet) {
    const json modes = v.value("modes", json::object());
    for (const auto& [key, spec] : modes.items()) {
      if (spec.value("behavior", "") == "trackline") return spec.value("heading_deg", 0.0);
    }
  }
  return std::nullopt;
}

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw StatsError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return values[lo] + f * (values[hi] - values[lo]);
}

ErrorStats error_stats(std::span<const Eigen::Vector2d> errors) {
  if (errors.size() < 2) throw StatsError("need at least two converged rows for error statistics");
  ErrorStats s;
  s.count = errors.size();
  for (const auto& e : errors) s.mean += e;
  s.mean /= static_cast<double>(errors.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  std::vector<double> norms;
  norms.reserve(errors.size());
  for (const auto& e : errors) {
    const Eigen::Vector2d d = e - s.mean;
    cov += d * d.transpose();
    norms.push_back(e.norm());
  }
  cov /= static_cast<double>(errors.size() - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  s.sigma_minor = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  s.sigma_major = std::sqrt(std::max(0.0, eig.eigenvalues()(1)));
  s.sigma_x = std::sqrt(std::max(0.0, cov(0, 0)));
  s.sigma_y = std::sqrt(std::max(0.0, cov(1, 1)));
  s.p68 = percentile(norms, 68.0);
  s.p95 = percentile(norms, 95.0);
  return s;
}

Reference reference_from_string(const std::string& s) {
  if (s == "truth") return Reference::Truth;
  if (s == "lbl") return Reference::Lbl;
  throw StatsError("reference must be truth or lbl");
}

MissionStats compute_error_stats(const mission::MissionLog& log, Reference ref) {
  MissionStats out;
  std::vector<Eigen::Vector2d> all;
  for (const auto& [name, errors] : collect_errors(log, ref)) {
    all.insert(all.end(), errors.begin(), errors.end());
    if (errors.size() >= 2) out.per_vehicle.emplace(name, error_stats(errors));
  }
  out.combined = error_stats(all);
  return out;
}

std::map<std::string, std::vector<double>> error_norms(const mission::MissionLog& log, Reference ref) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, errors] : collect_errors(log, ref)) {
    auto& n = out[name];
    for (const auto& e : errors) n.push_back(e.norm());
  }
  return out;
}

std::map<std::string, DrSummary> dead_reckoning_summary(const mission::MissionLog& log) {
  std::map<std::string, DrSummary> out;
  for (const auto& tick : log.ticks) {
    for (const auto& v : tick.vehicles) {
      auto& s = out[v.name];
      const double e = (v.dr - v.truth).norm();
      s.terminal_error = e;
      s.max_error = std::max(s.max_error, e);
      s.distance = v.distance_m;
    }
  }
  return out;
}

std::vector<ModeSwitch> mode_latencies(const mission::MissionLog& log) {
  std::vector<ModeSwitch> out;
  int current = 0;
  for (const auto& tick : log.ticks) {
    if (tick.beacon.mode != current) {
      current = tick.beacon.mode;
      if (current >= 1 && current <= 4) {
        ModeSwitch s;
        // Commands apply at the start of the second before the record.
        s.time = tick.t - 1.0;
        s.mode = current;
        for (const auto& v : tick.vehicles) s.latency[v.name] = std::nullopt;
        out.push_back(std::move(s));
      }
    }
    if (out.empty()) continue;
    auto& s = out.back();
    if (s.mode != current) continue;
    for (const auto& v : tick.vehicles) {
      auto& lat = s.latency[v.name];
      if (!lat && v.mode == s.mode && v.mode_time && *v.mode_time >= s.time) lat = *v.mode_time - s.time;
    }
  }
  return out;
}

Footprint behavior_footprint(const mission::MissionLog& log, const std::string& behavior, double heading_deg) {
  const Eigen::Vector2d e = geometry::compass_unit(heading_deg);
  const Eigen::Vector2d n{e.y(), -e.x()};
  double amin = 0.0;
  double amax = 0.0;
  double cmin = 0.0;
  double cmax = 0.0;
  Footprint f;
  for (const auto& tick : log.ticks) {
    for (const auto& v : tick.vehicles) {
      if (v.behavior != behavior) continue;
      const double a = v.truth.dot(e);
      const double c = v.truth.dot(n);
      if (f.samples == 0) {
        amin = amax = a;
        cmin = cmax = c;
      }
      amin = std::min(amin, a);
      amax = std::max(amax, a);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      ++f.samples;
    }
  }
  f.along_m = amax - amin;
  f.across_m = cmax - cmin;
  return f;
}

json to_json(const ErrorStats& s) {
  return {{"count", s.count},         {"mean", {s.mean.x(), s.mean.y()}},
          {"sigma_major", s.sigma_major}, {"sigma_minor", s.sigma_minor},
          {"sigma_x", s.sigma_x},     {"sigma_y", s.sigma_y},
          {"p68", s.p68},             {"p95", s.p95}};
}

json to_json(const MissionStats& s) {
  json j;
  j["combined"] = to_json(s.combined);
  j["vehicles"] = json::object();
  for (const auto& [name, st] : s.per_vehicle) j["vehicles"][name] = to_json(st);
  return j;
}

json replay_validation(const mission::MissionLog& log, const std::string& out_dir) {
  if (log.ticks.empty()) throw StatsError("log has no tick records, so no beacon track");
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  {
    std::ofstream out(dir / "trajectories.csv");
    out << "t,vehicle,truth_x,truth_y,est_x,est_y,converged,lbl_x,lbl_y,dr_x,dr_y,beacon_x,beacon_y\n";
    for (const auto& tick : log.ticks) {
      for (const auto& v : tick.vehicles) {
        // Absolute estimate: the source position offset by the relative estimate.
        const Eigen::Vector2d est = tick.beacon.source_position - v.est_rel;
        out << tick.t << ',' << v.name << ',' << v.truth.x() << ',' << v.truth.y() << ',' << est.x() << ','
            << est.y() << ',' << (v.converged ? 1 : 0) << ',';
        if (v.lbl) {
          out << v.lbl->x() << ',' << v.lbl->y();
        } else {
          out << ',';
        }
        out << ',' << v.dr.x() << ',' << v.dr.y() << ',' << tick.beacon.position.x() << ','
            << tick.beacon.position.y() << '\n';
      }
    }
  }
  write_cdf((dir / "cdf_truth.csv").string(), error_norms(log, Reference::Truth));
  write_cdf((dir / "cdf_lbl.csv").string(), error_norms(log, Reference::Lbl));
  {
    std::ofstream out(dir / "dr_divergence.csv");
    out << "t,vehicle,dr_error_m,distance_m\n";
    for (const auto& tick : log.ticks) {
      for (const auto& v : tick.vehicles) {
        out << tick.t << ',' << v.name << ',' << (v.dr - v.truth).norm() << ',' << v.distance_m << '\n';
      }
    }
  }

  json report;
  for (auto [key, ref] : {std::pair{"truth", Reference::Truth}, std::pair{"lbl", Reference::Lbl}}) {
    try {
      report["stats"][key] = to_json(compute_error_stats(log, ref));
    } catch (const StatsError& e) {
      report["stats"][key] = {{"error", e.what()}};
    }
  }
  for (const auto& [name, dr] : dead_reckoning_summary(log)) {
    report["dead_reckoning"][name] = {{"terminal_error_m", dr.terminal_error},
                                      {"max_error_m", dr.max_error},
                                      {"distance_m", dr.distance},
                                      {"ratio", dr.ratio()}};
  }
  report["mode_switches"] = json::array();
  for (const auto& s : mode_latencies(log)) {
    json js = {{"time", s.time}, {"mode", s.mode}, {"latency", json::object()}};
    for (const auto& [name, lat] : s.latency) js["latency"][name] = lat ? json(*lat) : json(nullptr);
    report["mode_switches"].push_back(js);
  }
  if (const auto heading = trackline_heading(log.header)) {
    const auto f = behavior_footprint(log, "trackline", *heading);
    report["trackline_footprint"] = {{"along_m", f.along_m}, {"across_m", f.across_m}, {"samples", f.samples}};
  }
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  return report;
}

}  // namespace owtt::stats
