#include <chrono>
#include <condition_variable>
#include <functional>
#include <iostream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <sys/socket.h>
#include <sys/time.h>

#include "deskservo/server.hpp"

namespace deskservo::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct Server::Impl {
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::mutex mutex;
  std::condition_variable idle;
  int connections = 0;
  std::mutex wait_mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;
};

namespace {

void set_receive_timeout(tcp::socket& socket, int seconds) {
  timeval tv{seconds, 0};
  ::setsockopt(socket.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

// Bounded per-client queue; the slowest client drops messages, not the loop.
class TelemetryQueue {
 public:
  void push(std::string msg) {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= 256) queue_.pop_front();
    queue_.push_back(std::move(msg));
    cv_.notify_one();
  }
  std::optional<std::string> pop(std::chrono::milliseconds wait) {
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, wait, [&] { return !queue_.empty(); })) return std::nullopt;
    std::string msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
};

// Runs on the connection's own thread and io_context: a standing read
// answers close and ping frames while queued messages are written out.
void serve_telemetry(tcp::socket socket, http::request<http::string_body> req, Session& session,
                     const std::atomic<bool>& running) {
  asio::io_context ioc;
  const auto protocol = socket.local_endpoint().protocol();
  websocket::stream<tcp::socket> ws(tcp::socket(ioc, protocol, socket.release()));
  ws.accept(req);
  ws.text(true);
  auto queue = std::make_shared<TelemetryQueue>();
  const auto id = session.subscribe([queue](const std::string& msg) { queue->push(msg); });

  asio::steady_timer timer(ioc);
  beast::flat_buffer incoming;
  std::string outgoing;
  bool done = false;
  bool closing = false;

  std::function<void()> read_next = [&] {
    ws.async_read(incoming, [&](beast::error_code ec, std::size_t) {
      if (ec) {
        done = true;
        timer.cancel();
        return;
      }
      incoming.consume(incoming.size());
      read_next();
    });
  };
  std::function<void()> pump = [&] {
    if (done || closing) return;
    if (!running.load()) {
      closing = true;
      ws.async_close(websocket::close_code::going_away, [](beast::error_code) {});
      return;
    }
    if (auto msg = queue->pop(std::chrono::milliseconds(0))) {
      outgoing = std::move(*msg);
      ws.async_write(asio::buffer(outgoing), [&](beast::error_code ec, std::size_t) {
        if (ec) {
          done = true;
          timer.cancel();
          return;
        }
        pump();
      });
      return;
    }
    timer.expires_after(std::chrono::milliseconds(20));
    timer.async_wait([&](beast::error_code ec) {
      if (!ec) pump();
    });
  };

  read_next();
  pump();
  try {
    ioc.run();
  } catch (const std::exception&) {
  }
  session.unsubscribe(id);
}

void serve_connection(tcp::socket socket, Session& session, const std::atomic<bool>& running) {
  try {
    set_receive_timeout(socket, 5);
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    http::read(socket, buffer, req);
    if (websocket::is_upgrade(req)) {
      if (req.target() == "/api/v1/telemetry") {
        serve_telemetry(std::move(socket), std::move(req), session, running);
        return;
      }
    }
    ApiRouter router(session);
    const HttpResponse out = router.handle(std::string_view(req.method_string().data(), req.method_string().size()),
                                           std::string_view(req.target().data(), req.target().size()),
                                           req.body());
    http::response<http::string_body> res{static_cast<http::status>(out.status), req.version()};
    res.set(http::field::content_type, out.content_type);
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(false);
    res.body() = out.body;
    res.prepare_payload();
    http::write(socket, res);
    beast::error_code ec;
    socket.shutdown(tcp::socket::shutdown_send, ec);
  } catch (const std::exception&) {
  }
}

}  // namespace

Server::Server(Session& session, const Config& config)
    : impl_(std::make_unique<Impl>()),
      session_(session),
      tick_period_(config.real_time_factor > 0.0 ? config.scenario.dt() / config.real_time_factor
                                                 : 0.0) {}

Server::~Server() { stop(); }

void Server::start(const std::string& address, unsigned short port) {
  tcp::endpoint endpoint(asio::ip::make_address(address), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  port_ = impl_->acceptor.local_endpoint().port();
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  owner_ = std::thread([this] { owner_loop(); });
}

void Server::accept_loop() {
  std::function<void()> do_accept = [this, &do_accept] {
    impl_->acceptor.async_accept([this, &do_accept](beast::error_code ec, tcp::socket socket) {
      if (ec || !running_) return;
      {
        std::lock_guard lock(impl_->mutex);
        ++impl_->connections;
      }
      std::thread([this, s = std::move(socket)]() mutable {
        serve_connection(std::move(s), session_, running_);
        std::lock_guard lock(impl_->mutex);
        --impl_->connections;
        impl_->idle.notify_all();
      }).detach();
      do_accept();
    });
  };
  do_accept();
  impl_->ioc.run();
}

void Server::owner_loop() {
  using clock = std::chrono::steady_clock;
  auto next = clock::now();
  while (running_) {
    if (session_.busy()) {
      session_.advance();
      next += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(tick_period_));
      const auto now = clock::now();
      if (next < now) next = now;
      std::this_thread::sleep_until(next);
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
      next = clock::now();
    }
  }
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->ioc.stop();
  if (acceptor_.joinable()) acceptor_.join();
  if (owner_.joinable()) owner_.join();
  {
    std::unique_lock lock(impl_->mutex);
    impl_->idle.wait_for(lock, std::chrono::seconds(10), [&] { return impl_->connections == 0; });
  }
  std::lock_guard lock(impl_->wait_mutex);
  impl_->stopped = true;
  impl_->stopped_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->wait_mutex);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

}  // namespace deskservo::service
