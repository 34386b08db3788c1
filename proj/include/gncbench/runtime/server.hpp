#pragma once

#include "gncbench/runtime/runtime.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace gncbench::runtime {

class PortInUse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// WebSocket endpoint on its own thread. Decoded client messages go to the
/// inbound queue; everything in the outbound queue is sent to every client.
/// Malformed frames get an Error reply on the same connection, which stays
/// open.
class WireServer {
 public:
  WireServer(BoundedQueue<InboundEvent>& inbound, BoundedQueue<WireMessage>& outbound);
  ~WireServer();
  WireServer(const WireServer&) = delete;
  WireServer& operator=(const WireServer&) = delete;

  /// Binds 127.0.0.1:`port` (0 picks a free port) and starts the thread.
  /// Throws PortInUse.
  void start(int port, const std::string& address = "127.0.0.1");
  void stop();
  /// Port actually bound.
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gncbench::runtime
