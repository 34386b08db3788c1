#include "gncbench/runtime/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <set>
#include <thread>

namespace gncbench::runtime {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxPending = 256;

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, BoundedQueue<InboundEvent>& inbound,
          std::set<std::shared_ptr<Session>>& sessions)
      : ws_(std::move(socket)), inbound_(inbound), sessions_(sessions) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      self->sessions_.insert(self);
      self->inbound_.push({InboundEvent::Kind::connected, {}});
      self->read();
    });
  }

  void send(std::string text) {
    if (!open_) return;
    if (pending_.size() >= kMaxPending) pending_.pop_front();
    pending_.push_back(std::move(text));
    if (pending_.size() == 1 && !writing_) write();
  }

  void close() {
    if (!open_) return;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        self->inbound_.push({InboundEvent::Kind::message, decode(text)});
      } catch (const ProtocolError& e) {
        self->send(encode(ErrorMsg{e.code(), e.what()}));
      }
      self->read();
    });
  }

  void write() {
    if (pending_.empty()) return;
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(pending_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) {
                        self->finish();
                        return;
                      }
                      self->pending_.pop_front();
                      if (self->open_) {
                        self->write();
                      } else {
                        self->pending_.clear();
                      }
                    });
  }

  void finish() {
    if (!open_) return;
    open_ = false;
    // An in-flight write still references the front buffer.
    if (!writing_) pending_.clear();
    inbound_.push({InboundEvent::Kind::disconnected, {}});
    sessions_.erase(shared_from_this());
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  BoundedQueue<InboundEvent>& inbound_;
  std::set<std::shared_ptr<Session>>& sessions_;
  std::deque<std::string> pending_;
  bool writing_ = false;
  bool open_ = false;
};

}  // namespace

struct WireServer::Impl {
  Impl(BoundedQueue<InboundEvent>& in, BoundedQueue<WireMessage>& out)
      : inbound(in), outbound(out), acceptor(io), pump(io) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Session>(std::move(socket), inbound, sessions)->run();
      accept();
    });
  }

  void forward() {
    pump.expires_after(std::chrono::milliseconds(5));
    pump.async_wait([this](beast::error_code ec) {
      if (ec) return;
      for (const WireMessage& msg : outbound.drain()) {
        const std::string text = encode(msg);
        for (const auto& s : sessions) s->send(text);
      }
      forward();
    });
  }

  BoundedQueue<InboundEvent>& inbound;
  BoundedQueue<WireMessage>& outbound;
  asio::io_context io;
  tcp::acceptor acceptor;
  asio::steady_timer pump;
  std::set<std::shared_ptr<Session>> sessions;
  std::thread thread;
  int port = 0;
};

WireServer::WireServer(BoundedQueue<InboundEvent>& inbound, BoundedQueue<WireMessage>& outbound)
    : impl_(std::make_unique<Impl>(inbound, outbound)) {}

WireServer::~WireServer() { stop(); }

void WireServer::start(int port, const std::string& address) {
  beast::error_code ec;
  const tcp::endpoint ep(asio::ip::make_address(address, ec), static_cast<unsigned short>(port));
  if (ec) throw std::invalid_argument("bad listen address '" + address + "'");
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (ec)
    throw PortInUse("cannot bind " + address + ":" + std::to_string(port) + ": " + ec.message());
  impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw PortInUse("cannot listen on port " + std::to_string(port) + ": " + ec.message());
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->forward();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void WireServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  asio::post(impl_->io, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    impl_->pump.cancel();
    for (const auto& s : std::set<std::shared_ptr<Session>>(impl_->sessions)) s->close();
  });
  impl_->thread.join();
}

int WireServer::port() const { return impl_->port; }

}  // namespace gncbench::runtime
