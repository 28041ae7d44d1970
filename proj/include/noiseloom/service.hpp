#pragma once

#include <memory>
#include <string>

#include "noiseloom/session.hpp"

namespace httplib {
class Server;
}

namespace noiseloom {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string snapshot_path;  // written on shutdown when set
};

// Port from NOISELOOM_PORT when set and valid, otherwise `fallback`.
int resolve_port(int fallback);

// HTTP/JSON front end over a SessionStore. All geometry is in blocks.
//   POST /sessions                      {seed, prompt[], params?, sampler?}
//   POST /sessions/:id/generate
//   GET  /sessions/:id/image            label map PNG
//   GET  /sessions/:id/attention/:token ?format=json|pgm
//   POST /sessions/:id/repaint          {blocks:[[r,c]...] | box, fresh_seed}
//   POST /sessions/:id/layout           {guidance} or a bare guidance object
//   GET  /sessions/:id/history
//   GET  /sessions/:id/replay
// 404 unknown session, 422 invalid body, 409 engine error.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  SessionStore& store() { return store_; }
  void mount(httplib::Server& server);

  // Blocks until stop(); writes the snapshot afterwards.
  bool run();
  // Binds an ephemeral port and returns it; pair with run_bound().
  int bind_any();
  bool run_bound();
  void stop();

 private:
  void write_snapshot() const;

  ServiceOptions options_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace noiseloom
