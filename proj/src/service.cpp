#include "noiseloom/service.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "noiseloom/error.hpp"

namespace noiseloom {

namespace {

using nlohmann::json;

// Request body problem, reported as 422 with the offending field.
struct BodyError {
  std::string field;
  std::string message;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& field = {}) {
  json body = {{"error", message}};
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

json parse_body(const httplib::Request& req, bool allow_empty = false) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw BodyError{"", "request body is empty"};
  }
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw BodyError{"", "request body must be a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw BodyError{"", std::string("malformed JSON: ") + e.what()};
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw BodyError{key, std::string("'") + key + "' is required"};
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw BodyError{key, std::string("'") + key + "' has the wrong type"};
  }
}

SessionSpec spec_from_body(const json& j) {
  SessionSpec spec;
  if (!j.contains("seed") || !j["seed"].is_number_integer()) {
    throw BodyError{"seed", "'seed' must be an integer"};
  }
  spec.seed = j["seed"].get<std::uint64_t>();
  spec.prompt = require<std::vector<std::string>>(j, "prompt");
  if (spec.prompt.empty()) throw BodyError{"prompt", "'prompt' needs at least one category"};
  if (j.contains("params")) {
    try {
      spec.params = params_from_json(j["params"]);
    } catch (const ConfigError& e) {
      throw BodyError{"params", e.what()};
    }
  }
  if (j.contains("sampler")) {
    try {
      spec.sampler = parse_sampler(require<std::string>(j, "sampler"));
    } catch (const ConfigError& e) {
      throw BodyError{"sampler", e.what()};
    }
  }
  return spec;
}

RegionMask mask_from_body(const json& j, BlockGrid grid) {
  RegionMask mask(grid);
  if (j.contains("box")) {
    Region r;
    try {
      r = region_from_json(j["box"]);
    } catch (const GuidanceError& e) {
      throw BodyError{"box", e.what()};
    }
    if (!grid.contains(r)) throw BodyError{"box", "box is empty or outside the block grid"};
    mask.add(r);
  }
  if (j.contains("blocks")) {
    if (!j["blocks"].is_array()) throw BodyError{"blocks", "'blocks' must be an array of [row,col]"};
    for (const auto& b : j["blocks"]) {
      if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() || !b[1].is_number_integer()) {
        throw BodyError{"blocks", "every block must be [row,col]"};
      }
      const BlockCoord c{b[0].get<int>(), b[1].get<int>()};
      if (!grid.contains(c)) throw BodyError{"blocks", "block " + to_string(c) + " is outside the grid"};
      mask.set(c);
    }
  }
  if (!j.contains("box") && !j.contains("blocks")) throw BodyError{"blocks", "'blocks' or 'box' is required"};
  if (mask.count() == 0) throw BodyError{"blocks", "repaint mask is empty"};
  return mask;
}

// Runs `fn` on the session under its FIFO lock and maps errors to statuses.
template <typename Fn>
void with_session(SessionStore& store, const httplib::Request& req, httplib::Response& res,
                  Fn&& fn) {
  const auto slot = store.find(req.matches[1]);
  if (!slot) {
    send_error(res, 404, "unknown session '" + std::string(req.matches[1]) + "'");
    return;
  }
  try {
    std::lock_guard lk(slot->lock);
    fn(*slot->session);
  } catch (const BodyError& e) {
    send_error(res, 422, e.message, e.field);
  } catch (const Error& e) {
    json body = {{"error", e.what()}, {"kind", to_string(e.kind())}};
    send_json(res, 409, body);
  }
}

json result_body(const GenerationResult& r) { return generation_to_json(r); }

}  // namespace

int resolve_port(int fallback) {
  if (const char* env = std::getenv("NOISELOOM_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return fallback;
}

Service::Service(ServiceOptions options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (!options_.snapshot_path.empty()) {
    std::ifstream f(options_.snapshot_path);
    if (f) {
      try {
        store_.restore(json::parse(f));
      } catch (const std::exception& e) {
        throw ConfigError("cannot restore snapshot " + options_.snapshot_path + ": " + e.what());
      }
    }
  }
  mount(*server_);
}

Service::~Service() = default;

void Service::mount(httplib::Server& server) {
  server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto id = store_.create(spec_from_body(parse_body(req)));
      send_json(res, 201, {{"id", id}});
    } catch (const BodyError& e) {
      send_error(res, 422, e.message, e.field);
    } catch (const Error& e) {
      send_error(res, 422, e.what(), "params");
    }
  });

  server.Post(R"(/sessions/([^/]+)/generate)", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) { send_json(res, 200, result_body(s.generate())); });
  });

  server.Get(R"(/sessions/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) {
      res.set_content(label_png(s.generate().labels), "image/png");
    });
  });

  server.Get(R"(/sessions/([^/]+)/attention/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) {
      const auto& map = s.generate().step0;
      const std::string token = req.matches[2];
      const auto idx = map.token_index(token);
      if (!idx) {
        send_error(res, 404, "token '" + token + "' is not in the prompt");
        return;
      }
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
      if (format == "pgm") {
        std::ostringstream out;
        write_attention_pgm(out, map, *idx);
        res.set_content(out.str(), "image/x-portable-graymap");
      } else if (format == "json") {
        send_json(res, 200, attention_token_json(map, *idx));
      } else {
        throw BodyError{"format", "format must be json or pgm"};
      }
    });
  });

  server.Post(R"(/sessions/([^/]+)/repaint)", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) {
      const auto body = parse_body(req);
      const auto mask = mask_from_body(body, s.latent().blocks());
      if (!body.contains("fresh_seed") || !body["fresh_seed"].is_number_integer()) {
        throw BodyError{"fresh_seed", "'fresh_seed' must be an integer"};
      }
      const auto& r = s.repaint(mask, body["fresh_seed"].get<std::uint64_t>());
      send_json(res, 200, {{"result", result_body(r)}, {"event", event_to_json(s.history().back())}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/layout)", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) {
      const auto body = parse_body(req);
      LayoutGuidance g;
      try {
        g = guidance_from_json(body.contains("guidance") ? body["guidance"] : body);
      } catch (const GuidanceError& e) {
        throw BodyError{"guidance", e.what()};
      }
      const auto& r = s.layout(g);
      const auto& event = s.history().back();
      json swaps = json::array();
      for (const auto& sw : event.swaps) swaps.push_back(swaps_to_json(sw));
      send_json(res, 200, {{"result", result_body(r)}, {"swaps", swaps}, {"event", event_to_json(event)}});
    });
  });

  server.Get(R"(/sessions/([^/]+)/history)", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) {
      json events = json::array();
      for (const auto& e : s.history()) events.push_back(event_to_json(e));
      send_json(res, 200, {{"id", s.id()}, {"spec", spec_to_json(s.spec())}, {"events", events}});
    });
  });

  server.Get(R"(/sessions/([^/]+)/replay)", [this](const httplib::Request& req, httplib::Response& res) {
    with_session(store_, req, res, [&](Session& s) {
      const bool matches = s.replay().bitwise_equal(s.latent());
      send_json(res, 200, {{"matches", matches}, {"events", s.history().size()}});
    });
  });
}

bool Service::run() {
  const bool ok = server_->listen(options_.host, options_.port);
  write_snapshot();
  return ok;
}

int Service::bind_any() { return server_->bind_to_any_port(options_.host); }

bool Service::run_bound() {
  const bool ok = server_->listen_after_bind();
  write_snapshot();
  return ok;
}

void Service::stop() { server_->stop(); }

void Service::write_snapshot() const {
  if (options_.snapshot_path.empty()) return;
  std::ofstream f(options_.snapshot_path);
  if (f) f << store_.snapshot().dump(2) << "\n";
}

}  // namespace noiseloom
