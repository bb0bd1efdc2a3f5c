#include "pulseradar/server.hpp"

#include <chrono>
#include <csignal>
#include <deque>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "pulseradar/protocol.hpp"

namespace pulseradar {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::uint64_t ns_since(std::chrono::steady_clock::time_point origin) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - origin).count());
}

} // namespace

class Session;

struct Server::Impl {
  explicit Impl(SystemConfig c) : config(std::move(c)), pipeline(config), acceptor(ioc) {}

  void accept();
  void broadcast(const FrameOut& frame);
  void scheduler();
  std::string hello() const;

  SystemConfig config;
  Pipeline pipeline;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::weak_ptr<Session>> sessions; // network thread only
  std::chrono::steady_clock::time_point origin = std::chrono::steady_clock::now();

  std::atomic<bool> stopping{false};
  std::atomic<std::uint64_t> frames{0};
  std::atomic<std::uint64_t> dropped{0};
  std::atomic<std::uint64_t> clients{0};
  std::thread network_thread;
  std::thread scheduler_thread;
};

class Session : public std::enable_shared_from_this<Session> {
public:
  Session(tcp::socket socket, Server::Impl& owner) : ws_(std::move(socket)), owner_(owner) {}

  void run(bool reject) {
    reject_ = reject;
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Session::on_accept, shared_from_this()));
  }

  void send_frame(const FrameOut& frame) {
    if (closed_) {
      return;
    }
    if (frames_queued_ >= kMaxQueuedFrames) {
      close();
      return;
    }
    Outgoing o;
    o.binary = true;
    o.frame = frame;
    if (frames_queued_ >= kBackpressureDepth && !o.frame.profile.empty()) {
      o.frame.profile.clear();
      owner_.dropped.fetch_add(1);
    }
    ++frames_queued_;
    enqueue(std::move(o));
  }

  void send_text(std::string text) {
    if (closed_) {
      return;
    }
    Outgoing o;
    o.text = std::move(text);
    enqueue(std::move(o));
  }

  void close() {
    if (closed_) {
      return;
    }
    closed_ = true;
    owner_.clients.fetch_sub(1);
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

private:
  struct Outgoing {
    bool binary = false;
    std::string text;
    FrameOut frame;
  };

  void on_accept(beast::error_code ec) {
    if (ec) {
      return;
    }
    owner_.clients.fetch_add(1);
    if (reject_) {
      close_after_flush_ = true;
      send_text(error_reply("connect", std::nullopt, "client limit reached"));
      return;
    }
    send_text(owner_.hello());
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    if (!ws_.got_text()) {
      send_text(error_reply("", std::nullopt, "control messages must be JSON text"));
    } else {
      handle(beast::buffers_to_string(buffer_.data()));
    }
    buffer_.consume(buffer_.size());
    read();
  }

  void handle(const std::string& text) {
    ParsedControl parsed;
    try {
      parsed = parse_control(text);
    } catch (const ProtocolError& e) {
      send_text(error_reply("", std::nullopt, e.what()));
      return;
    }
    const auto name = command_name(parsed.command);
    const auto reply = owner_.pipeline.submit(parsed.command);
    send_text(reply.ok ? ack_reply(name, parsed.seq, reply.effective_pulse)
                       : error_reply(name, parsed.seq, reply.message));
  }

  void enqueue(Outgoing o) {
    queue_.push_back(std::move(o));
    if (!writing_) {
      write_next();
    }
  }

  void write_next() {
    if (queue_.empty() || closed_) {
      writing_ = false;
      if (close_after_flush_) {
        close();
      }
      return;
    }
    writing_ = true;
    auto& front = queue_.front();
    ws_.binary(front.binary);
    if (front.binary) {
      front.frame.t_emit_ns = ns_since(owner_.origin);
      bytes_ = encode_frame(front.frame);
      ws_.async_write(net::buffer(bytes_), beast::bind_front_handler(&Session::on_write, shared_from_this()));
    } else {
      ws_.async_write(net::buffer(front.text), beast::bind_front_handler(&Session::on_write, shared_from_this()));
    }
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    if (queue_.front().binary) {
      --frames_queued_;
    }
    queue_.pop_front();
    write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& owner_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> queue_;
  std::vector<std::uint8_t> bytes_;
  std::size_t frames_queued_ = 0;
  bool writing_ = false;
  bool closed_ = false;
  bool reject_ = false;
  bool close_after_flush_ = false;
};

void Server::Impl::accept() {
  acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (!stopping.load()) {
        accept();
      }
      return;
    }
    std::erase_if(sessions, [](const std::weak_ptr<Session>& s) { return s.expired(); });
    const bool full = clients.load() >= config.max_clients;
    auto session = std::make_shared<Session>(std::move(socket), *this);
    if (!full) {
      sessions.push_back(session);
    }
    net::post(ioc, [session, full] { session->run(full); });
    accept();
  });
}

void Server::Impl::broadcast(const FrameOut& frame) {
  net::post(ioc, [this, frame] {
    for (auto& weak : sessions) {
      if (auto s = weak.lock()) {
        s->send_frame(frame);
      }
    }
  });
}

void Server::Impl::scheduler() {
  using clock = std::chrono::steady_clock;
  const auto pri = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(config.pri_s()));
  const auto t0 = clock::now();
  for (std::uint64_t tick = 0; !stopping.load(); ++tick) {
    if (config.realtime) {
      // Absolute deadlines: no drift accumulates across ticks.
      std::this_thread::sleep_until(t0 + pri * static_cast<clock::rep>(tick));
    }
    auto out = pipeline.step(ns_since(origin));
    if (out) {
      frames.fetch_add(1);
      broadcast(out->frame);
    } else if (!config.realtime) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }
}

std::string Server::Impl::hello() const {
  nlohmann::json j{{"type", "hello"},
                   {"schema_version", kWireVersion},
                   {"lag_count", config.engine.lag_count()},
                   {"range_per_bin_m", config.chirp.range_per_sample_m()},
                   {"prf_hz", config.prf_hz},
                   {"carrier_hz", config.chirp.carrier_hz},
                   {"pack_size", config.pack_size},
                   {"profile_stride", pipeline.profile_stride()},
                   {"targets", config.scene.targets.size()},
                   {"running", pipeline.running()},
                   {"next_pulse", pipeline.next_pulse()}};
  return j.dump();
}

Server::Server(SystemConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  const auto hp = parse_address(impl_->config.serve_address);
  tcp::resolver resolver(impl_->ioc);
  beast::error_code ec;
  const auto results = resolver.resolve(hp.host, std::to_string(hp.port), ec);
  if (ec || results.empty()) {
    throw Error("serve: cannot resolve " + impl_->config.serve_address + ": " + ec.message());
  }
  const tcp::endpoint endpoint = *results.begin();
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) {
    acceptor.set_option(net::socket_base::reuse_address(true), ec);
  }
  if (!ec) {
    acceptor.bind(endpoint, ec);
  }
  if (!ec) {
    acceptor.listen(net::socket_base::max_listen_connections, ec);
  }
  if (ec) {
    throw Error("serve: cannot bind " + impl_->config.serve_address + ": " + ec.message());
  }
  port_ = acceptor.local_endpoint().port();

  impl_->accept();
  impl_->network_thread = std::thread([this] {
    auto guard = net::make_work_guard(impl_->ioc);
    impl_->ioc.run();
  });
  impl_->scheduler_thread = std::thread([this] { impl_->scheduler(); });
  return port_;
}

void Server::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) {
    return;
  }
  if (impl_->scheduler_thread.joinable()) {
    impl_->scheduler_thread.join();
  }
  net::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    for (auto& weak : impl->sessions) {
      if (auto s = weak.lock()) {
        s->close();
      }
    }
    impl->ioc.stop();
  });
  if (impl_->network_thread.joinable()) {
    impl_->network_thread.join();
  }
}

void Server::run_until_signal() {
  net::io_context signals_ioc;
  net::signal_set signals(signals_ioc, SIGINT, SIGTERM);
  signals.async_wait([](const beast::error_code&, int) {});
  signals_ioc.run();
  stop();
}

ServerStats Server::stats() const {
  return {impl_->frames.load(), impl_->dropped.load(), impl_->clients.load()};
}

std::string Server::hello_message() const { return impl_->hello(); }

} // namespace pulseradar
