#pragma once

// WebSocket telemetry and control for a live mission. Clients connect to
// `/sim`, receive a hello frame and then one snapshot per simulated second;
// command frames are validated and queued for the next tick boundary.

#include <deque>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "owtt/mission.hpp"

namespace owtt::bridge {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kTrailLength = 600;

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Turns tick records into snapshot frames, keeping bounded breadcrumb
/// trails per vehicle.
class SnapshotBuilder {
 public:
  nlohmann::json build(const mission::TickRecord& rec, bool paused = false, double time_scale = 1.0);

 private:
  struct Trails {
    std::deque<std::array<double, 2>> truth;
    std::deque<std::array<double, 2>> estimate;
  };
  std::map<std::string, Trails> trails_;
};

struct Ellipse {
  double major = 0.0;  // 1 sigma
  double minor = 0.0;
  double angle_deg = 0.0;  // major axis, counterclockwise from east
};
Ellipse covariance_ellipse(const Eigen::Matrix2d& cov);

nlohmann::json hello_message(const mission::MissionConfig& config);
nlohmann::json error_message(const std::string& reason);

/// Parses `{"type":"command","schema_version":1,"command":{...}}`. Throws
/// mission::ConfigError describing the problem.
mission::Command parse_command_frame(const std::string& text);

struct Endpoint {
  std::string host = "127.0.0.1";
  unsigned short port = 0;
};
/// "host:port" or ":port". Throws mission::ConfigError.
Endpoint parse_endpoint(const std::string& text);

/// Background WebSocket server. Construction binds the port (throws
/// BridgeError when it is busy) and starts the I/O thread.
class Server {
 public:
  Server(const Endpoint& endpoint, mission::CommandQueue& queue, nlohmann::json hello);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  /// Offers a snapshot to every client; a client still sending the previous
  /// one gets only the newest when it is ready.
  void publish(const nlohmann::json& snapshot);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace owtt::bridge
