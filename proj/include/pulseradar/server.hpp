#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "pulseradar/config.hpp"
#include "pulseradar/pipeline.hpp"

namespace pulseradar {

// Frames a client may have queued before its profiles are dropped. Bin
// samples, displacement and spectra are always delivered.
inline constexpr std::size_t kBackpressureDepth = 4;
// A client this far behind is disconnected.
inline constexpr std::size_t kMaxQueuedFrames = 4096;

struct ServerStats {
  std::uint64_t frames = 0;           // PRIs processed
  std::uint64_t profiles_dropped = 0; // per-client profile payloads dropped
  std::uint64_t clients = 0;          // currently connected
};

// Live service: one scheduler thread ticking at absolute times t0 + n*PRI
// and one network thread serving WebSocket clients. Every client receives
// a hello text message, then one binary frame per PRI; control commands
// arrive as text messages and are answered individually.
class Session;

class Server {
public:
  explicit Server(SystemConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the configured address (port 0 picks a free port) and starts
  // both threads. Returns the bound port.
  std::uint16_t start();
  void stop();
  // Blocks until SIGINT/SIGTERM, then stops.
  void run_until_signal();

  ServerStats stats() const;
  std::uint16_t port() const noexcept { return port_; }
  std::string hello_message() const;

private:
  friend class Session;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

} // namespace pulseradar
