#pragma once
// Blocking WebSocket client for driving the service in tests.

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <string>

#include "json.hpp"

class WsClient {
 public:
  explicit WsClient(unsigned short port) : ws_(ioc_) {
    namespace net = boost::asio;
    net::ip::tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/");
    ws_.text(true);
  }

  void send(const std::string& text) { ws_.write(boost::asio::buffer(text)); }

  nlohmann::json receive() {
    boost::beast::flat_buffer buffer;
    ws_.read(buffer);
    return nlohmann::json::parse(boost::beast::buffers_to_string(buffer.data()));
  }

  // Reads until a message of the given type arrives; returns everything read.
  std::vector<nlohmann::json> receive_until(const std::string& type, const std::string& mode = "") {
    std::vector<nlohmann::json> out;
    for (;;) {
      out.push_back(receive());
      const auto& m = out.back();
      if (m.at("type") == type && (mode.empty() || m.value("mode", "") == mode)) return out;
    }
  }

  void close() {
    boost::beast::error_code ec;
    ws_.close(boost::beast::websocket::close_code::normal, ec);
  }

 private:
  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};
