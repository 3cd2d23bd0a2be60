#include "owtt/bridge.hpp"

#include <Eigen/Eigenvalues>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "owtt/geometry.hpp"

namespace owtt::bridge {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

constexpr const char* kPath = "/sim";

json point(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

template <typename Deque>
void push_bounded(Deque& d, std::array<double, 2> p) {
  d.push_back(p);
  while (d.size() > kTrailLength) d.pop_front();
}

json trail_json(const std::deque<std::array<double, 2>>& d) {
  json out = json::array();
  for (const auto& p : d) out.push_back(json::array({p[0], p[1]}));
  return out;
}

class Session;

struct Registry {
  std::mutex mutex;
  std::set<std::shared_ptr<Session>> sessions;
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, mission::CommandQueue& queue, std::shared_ptr<const std::string> hello,
          Registry& registry)
      : ws_(std::move(socket)), queue_(queue), hello_(std::move(hello)), registry_(registry) {}

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  // Runs on the I/O thread.
  void offer_snapshot(std::shared_ptr<const std::string> msg) {
    if (!open_) return;
    pending_snapshot_ = std::move(msg);
    pump();
  }

  void close() {
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return drop();
    if (!websocket::is_upgrade(request_) || request_.target() != kPath) {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "websocket endpoint is /sim\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        self->close();
        self->drop();
      });
      return;
    }
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec2) { self->on_accept(ec2); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return drop();
    open_ = true;
    control_.push_back(hello_);
    pump();
    read();
  }

  void read() {
    ws_.async_read(read_buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) return drop();
    const std::string text = beast::buffers_to_string(read_buffer_.data());
    read_buffer_.consume(read_buffer_.size());
    try {
      const auto cmd = parse_command_frame(text);
      if (!queue_.push(cmd)) control_.push_back(std::make_shared<std::string>(error_message("command queue full").dump()));
    } catch (const mission::ConfigError& e) {
      control_.push_back(std::make_shared<std::string>(error_message(e.what()).dump()));
    }
    pump();
    read();
  }

  void pump() {
    if (writing_ || !open_) return;
    std::shared_ptr<const std::string> next;
    if (!control_.empty()) {
      next = control_.front();
      control_.pop_front();
    } else if (pending_snapshot_) {
      next = std::move(pending_snapshot_);
      pending_snapshot_.reset();
    } else {
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(*next), [self = shared_from_this(), next](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) return self->drop();
      self->pump();
    });
  }

  void drop() {
    open_ = false;
    std::lock_guard lock(registry_.mutex);
    registry_.sessions.erase(shared_from_this());
  }

  websocket::stream<tcp::socket> ws_;
  mission::CommandQueue& queue_;
  std::shared_ptr<const std::string> hello_;
  Registry& registry_;
  beast::flat_buffer buffer_;
  beast::flat_buffer read_buffer_;
  http::request<http::string_body> request_;
  std::deque<std::shared_ptr<const std::string>> control_;
  std::shared_ptr<const std::string> pending_snapshot_;
  bool writing_ = false;
  bool open_ = false;
};

}  // namespace

Ellipse covariance_ellipse(const Eigen::Matrix2d& cov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (cov + cov.transpose()));
  Ellipse e;
  e.minor = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  e.major = std::sqrt(std::max(0.0, eig.eigenvalues()(1)));
  const Eigen::Vector2d axis = eig.eigenvectors().col(1);
  e.angle_deg = geometry::rad2deg(std::atan2(axis.y(), axis.x()));
  if (e.angle_deg < 0.0) e.angle_deg += 180.0;
  if (e.angle_deg >= 180.0) e.angle_deg -= 180.0;
  return e;
}

json SnapshotBuilder::build(const mission::TickRecord& rec, bool paused, double time_scale) {
  json j;
  j["type"] = "snapshot";
  j["schema_version"] = kProtocolVersion;
  j["t"] = rec.t;
  j["paused"] = paused;
  j["time_scale"] = time_scale;
  j["beacon"] = {{"pos", point(rec.beacon.position)},
                 {"mode", rec.beacon.mode},
                 {"source", mission::to_string(rec.beacon.source)},
                 {"source_pos", point(rec.beacon.source_position)}};
  j["vehicles"] = json::array();
  for (const auto& v : rec.vehicles) {
    auto& tr = trails_[v.name];
    push_bounded(tr.truth, {v.truth.x(), v.truth.y()});
    if (v.converged) push_bounded(tr.estimate, {v.est_abs.x(), v.est_abs.y()});
    const auto ell = covariance_ellipse(v.covariance);
    j["vehicles"].push_back({{"name", v.name},
                             {"truth", json::array({v.truth.x(), v.truth.y(), v.depth_m})},
                             {"heading", v.heading_deg},
                             {"estimate", point(v.est_abs)},
                             {"ellipse", {{"major", ell.major}, {"minor", ell.minor}, {"angle_deg", ell.angle_deg}}},
                             {"converged", v.converged},
                             {"mode", v.mode ? json(*v.mode) : json(nullptr)},
                             {"behavior", v.behavior},
                             {"lbl", v.lbl ? point(*v.lbl) : json(nullptr)},
                             {"trail_truth", trail_json(tr.truth)},
                             {"trail_estimate", trail_json(tr.estimate)}});
  }
  return j;
}

json hello_message(const mission::MissionConfig& config) {
  json vehicles = json::array();
  for (const auto& v : config.fleet) vehicles.push_back(v.name);
  return {{"type", "hello"},
          {"schema_version", kProtocolVersion},
          {"mission", config.name},
          {"duration_s", config.duration_s},
          {"vehicles", vehicles},
          {"lbl", {{"east", point(config.lbl.east)}, {"west", point(config.lbl.west)}}},
          {"max_beacon_speed", config.beacon.max_speed}};
}

json error_message(const std::string& reason) {
  return {{"type", "error"}, {"schema_version", kProtocolVersion}, {"reason", reason}};
}

mission::Command parse_command_frame(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw mission::ConfigError("frame is not valid JSON");
  }
  if (!j.is_object() || j.value("type", "") != "command") throw mission::ConfigError("expected a command frame");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kProtocolVersion) {
    throw mission::ConfigError("unsupported schema_version");
  }
  if (!j.contains("command")) throw mission::ConfigError("command frame without a command");
  return mission::command_from_json(j["command"]);
}

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw mission::ConfigError("bridge address must be host:port");
  Endpoint e;
  if (colon > 0) e.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    e.port = static_cast<unsigned short>(p);
  } catch (const std::exception&) {
    throw mission::ConfigError("invalid bridge port '" + port + "'");
  }
  return e;
}

struct Server::Impl {
  Impl(const Endpoint& endpoint, mission::CommandQueue& q, const json& hello_json)
      : queue(q), acceptor(ioc), hello(std::make_shared<std::string>(hello_json.dump())) {
    beast::error_code ec;
    const auto address = asio::ip::make_address(endpoint.host, ec);
    if (ec) throw BridgeError("invalid bridge host '" + endpoint.host + "'");
    const tcp::endpoint ep(address, endpoint.port);
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw BridgeError("cannot listen on " + endpoint.host + ":" + std::to_string(endpoint.port) + ": " +
                              ec.message());
    bound_port = acceptor.local_endpoint().port();
    accept();
    thread = std::thread([this] { ioc.run(); });
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto s = std::make_shared<Session>(std::move(socket), queue, hello, registry);
      {
        std::lock_guard lock(registry.mutex);
        registry.sessions.insert(s);
      }
      s->start();
      accept();
    });
  }

  void stop() {
    if (stopped) return;
    stopped = true;
    asio::post(ioc, [this] {
      beast::error_code ec;
      acceptor.close(ec);
      {
        std::lock_guard lock(registry.mutex);
        for (const auto& s : registry.sessions) s->close();
      }
      ioc.stop();
    });
    if (thread.joinable()) thread.join();
    std::lock_guard lock(registry.mutex);
    registry.sessions.clear();
  }

  mission::CommandQueue& queue;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::shared_ptr<const std::string> hello;
  Registry registry;
  std::thread thread;
  unsigned short bound_port = 0;
  bool stopped = false;
};

Server::Server(const Endpoint& endpoint, mission::CommandQueue& queue, json hello)
    : impl_(std::make_unique<Impl>(endpoint, queue, hello)) {}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->bound_port; }

void Server::publish(const json& snapshot) {
  auto msg = std::make_shared<const std::string>(snapshot.dump());
  asio::post(impl_->ioc, [impl = impl_.get(), msg] {
    std::vector<std::shared_ptr<Session>> sessions;
    {
      std::lock_guard lock(impl->registry.mutex);
      sessions.assign(impl->registry.sessions.begin(), impl->registry.sessions.end());
    }
    for (const auto& s : sessions) s->offer_snapshot(msg);
  });
}

void Server::stop() { impl_->stop(); }

}  // namespace owtt::bridge
