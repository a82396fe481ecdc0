#include <atomic>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <iostream>
#include <list>

#include "dronelight/error.hpp"
#include "dronelight/service.hpp"

namespace dronelight {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Connection;

struct Registry {
  std::list<std::weak_ptr<Connection>> connections;
  std::atomic<std::size_t> active{0};
  std::atomic<std::uint64_t> next_id{1};
  bool stopping = false;
  std::function<void()> on_empty;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const ServiceConfig& config,
             std::shared_ptr<const RandomForestModel> model, Registry& registry)
      : ws_(std::move(socket)), config_(config), model_(std::move(model)), registry_(registry) {
    ++registry_.active;
  }

  ~Connection() {
    session_.reset();
    if (--registry_.active == 0 && registry_.stopping && registry_.on_empty) registry_.on_empty();
  }

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(1 << 20);
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  // Called on the io thread.
  void shutdown(const std::string& reason) {
    if (session_) session_->abort(reason);
    closing_ = true;
    // Let messages posted by the aborted flight drain before closing.
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->outbox_.empty()) self->close();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    auto weak = weak_from_this();
    auto executor = ws_.get_executor();
    MessageSink sink = [weak, executor](std::string text) {
      net::post(executor, [weak, text = std::move(text)]() mutable {
        if (auto self = weak.lock()) self->send(std::move(text));
      });
    };
    const std::string id = "s" + std::to_string(registry_.next_id++);
    session_ = std::make_unique<Session>(id, config_, model_, std::move(sink));
    if (registry_.stopping) {
      shutdown("server shutting down");
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      // Peer closed or the socket failed; dropping the last reference reaps
      // the session (and aborts any flight).
      if (session_) session_->abort("connection closed");
      return;
    }
    if (!ws_.got_text()) {
      session_->handle_text("\x01");  // binary frames are not part of the protocol
    } else {
      session_->handle_text(beast::buffers_to_string(buffer_.data()));
    }
    buffer_.consume(buffer_.size());
    do_read();
  }

  void send(std::string text) {
    if (closed_) return;
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      outbox_.clear();
      closed_ = true;
      return;
    }
    outbox_.pop_front();
    if (!outbox_.empty()) {
      do_write();
    } else if (closing_) {
      close();
    }
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::going_away,
                    [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  const ServiceConfig& config_;
  std::shared_ptr<const RandomForestModel> model_;
  Registry& registry_;
  std::unique_ptr<Session> session_;
  bool closing_ = false;
  bool closed_ = false;
};

}  // namespace

struct Server::Impl {
  Impl(ServiceConfig cfg, std::shared_ptr<const RandomForestModel> m)
      : config(std::move(cfg)), model(std::move(m)), acceptor(ioc), grace(ioc) {}

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      auto conn = std::make_shared<Connection>(std::move(socket), config, model, registry);
      registry.connections.remove_if([](const auto& w) { return w.expired(); });
      registry.connections.push_back(conn);
      conn->run();
      do_accept();
    });
  }

  void begin_shutdown() {
    if (registry.stopping) return;
    registry.stopping = true;
    beast::error_code ignored;
    acceptor.close(ignored);
    if (signals) signals->cancel();
    for (auto& weak : registry.connections) {
      if (auto conn = weak.lock()) conn->shutdown("server shutting down");
    }
    registry.connections.clear();
    if (registry.active == 0) return;
    registry.on_empty = [this] { grace.cancel(); };
    // Peers that never answer the close handshake do not hold shutdown up.
    grace.expires_after(std::chrono::seconds(2));
    grace.async_wait([this](beast::error_code ec) {
      if (!ec) ioc.stop();
    });
  }

  ServiceConfig config;
  std::shared_ptr<const RandomForestModel> model;
  net::io_context ioc{1};
  tcp::acceptor acceptor;
  net::steady_timer grace;
  std::unique_ptr<net::signal_set> signals;
  Registry registry;
  bool started = false;
};

Server::Server(ServiceConfig config, std::shared_ptr<const RandomForestModel> model)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(model))) {
  impl_->config.validate();
  if (!impl_->model) throw Error(ErrorCode::kInvalidArgument, "server needs a model");
}

Server::~Server() {
  if (impl_->started && !impl_->ioc.stopped()) {
    stop();
    impl_->ioc.run();
  }
}

void Server::start() {
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->config.bind_address, ec);
  if (ec) throw Error(ErrorCode::kInvalidArgument, "bad bind address '" + impl_->config.bind_address + "'");
  const tcp::endpoint endpoint(address, impl_->config.port);
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (ec == net::error::address_in_use) {
    throw Error(ErrorCode::kPortInUse,
                "port in use: " + std::to_string(impl_->config.port));
  }
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot listen: " + ec.message());
  impl_->started = true;
  impl_->do_accept();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run(bool handle_signals) {
  if (!impl_->started) start();
  if (handle_signals) {
    impl_->signals = std::make_unique<net::signal_set>(impl_->ioc, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) impl_->begin_shutdown();
    });
  }
  impl_->ioc.run();
}

void Server::stop() {
  net::post(impl_->ioc, [impl = impl_.get()] { impl->begin_shutdown(); });
}

std::size_t Server::active_sessions() const { return impl_->registry.active; }

void run_server(const ServiceConfig& config) {
  if (config.model_path.empty()) throw Error(ErrorCode::kIo, "config has no model_path");
  auto model = std::make_shared<const RandomForestModel>(load_model(config.model_path));
  Server server(config, std::move(model));
  server.start();
  std::cerr << "dronelight: serving on ws://" << config.bind_address << ":" << server.port() << "\n";
  server.run(true);
}

}  // namespace dronelight
