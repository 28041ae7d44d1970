#include "noiseloom/session.hpp"

#include <cstdio>

#include "noiseloom/error.hpp"
#include "noiseloom/rng.hpp"

namespace noiseloom {

nlohmann::json event_to_json(const EditEvent& e) {
  if (e.kind == EditEvent::Kind::resample) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto b : e.blocks) blocks.push_back({b.row, b.col});
    return {{"kind", "resample"}, {"blocks", std::move(blocks)}, {"fresh_seed", e.fresh_seed}};
  }
  nlohmann::json swaps = nlohmann::json::array();
  for (const auto& s : e.swaps) swaps.push_back(swaps_to_json(s));
  return {{"kind", "swap"}, {"guidance", guidance_to_json(e.guidance)}, {"swaps", std::move(swaps)}};
}

EditEvent event_from_json(const nlohmann::json& j) {
  EditEvent e;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "resample") {
    e.kind = EditEvent::Kind::resample;
    for (const auto& b : j.at("blocks")) e.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
    e.fresh_seed = j.at("fresh_seed").get<std::uint64_t>();
  } else if (kind == "swap") {
    e.kind = EditEvent::Kind::swap;
    e.guidance = guidance_from_json(j.at("guidance"));
    if (j.contains("swaps"))
      for (const auto& s : j["swaps"]) e.swaps.push_back(swaps_from_json(s));
  } else {
    throw ConfigError("unknown event kind '" + kind + "'");
  }
  return e;
}

nlohmann::json spec_to_json(const SessionSpec& s) {
  return {{"seed", s.seed},
          {"prompt", s.prompt},
          {"params", params_to_json(s.params)},
          {"sampler", to_string(s.sampler)}};
}

Session::Session(std::string id, SessionSpec spec)
    : id_(std::move(id)),
      spec_(std::move(spec)),
      model_(std::make_unique<ToyModel>(spec_.params)),
      tokens_(model_->prompt(spec_.prompt)),
      latent_(sample_latent(kDefaultLatentSize, kDefaultLatentSize, kDefaultChannels,
                            spec_.seed)) {}

LatentGrid Session::transform(const LatentGrid& z, EditEvent& event) const {
  if (event.kind == EditEvent::Kind::resample) {
    RegionMask mask(z.blocks());
    for (const auto b : event.blocks) {
      if (!z.blocks().contains(b)) throw GeometryError("mask block " + to_string(b) + " is outside the grid");
      mask.set(b);
    }
    return resample_region(z, mask, event.fresh_seed);
  }
  auto result = layout_swap(z, tokens_, model_->weights(), event.guidance,
                            event.guidance.pairing_seed);
  event.swaps = std::move(result.swaps);
  return std::move(result.latent);
}

void Session::apply(EditEvent event) {
  latent_ = transform(latent_, event);
  history_.push_back(std::move(event));
  last_.reset();
}

LatentGrid Session::replay() const {
  LatentGrid z = sample_latent(kDefaultLatentSize, kDefaultLatentSize, kDefaultChannels, spec_.seed);
  for (auto event : history_) z = transform(z, event);
  return z;
}

const GenerationResult& Session::generate() {
  if (!last_) {
    last_ = noiseloom::generate(latent_, tokens_, *model_, spec_.sampler);
    for (const auto& e : history_) {
      char buf[96];
      if (e.kind == EditEvent::Kind::resample) {
        std::snprintf(buf, sizeof buf, "resample blocks=%zu fresh_seed=%llu", e.blocks.size(),
                      static_cast<unsigned long long>(e.fresh_seed));
      } else {
        std::snprintf(buf, sizeof buf, "swap items=%zu pairing_seed=%llu", e.guidance.items.size(),
                      static_cast<unsigned long long>(e.guidance.pairing_seed));
      }
      last_->provenance.edits.emplace_back(buf);
    }
  }
  return *last_;
}

const GenerationResult& Session::repaint(const RegionMask& mask, std::uint64_t fresh_seed) {
  if (mask.grid() != latent_.blocks()) throw GeometryError("mask does not match the block grid");
  if (mask.count() == 0) throw DegenerateInputError("repaint mask is empty");
  EditEvent e;
  e.kind = EditEvent::Kind::resample;
  e.blocks = mask.coords();
  e.fresh_seed = fresh_seed;
  apply(std::move(e));
  return generate();
}

const GenerationResult& Session::layout(const LayoutGuidance& guidance) {
  EditEvent e;
  e.kind = EditEvent::Kind::swap;
  e.guidance = guidance;
  apply(std::move(e));
  return generate();
}

nlohmann::json Session::to_json() const {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : history_) events.push_back(event_to_json(e));
  return {{"id", id_}, {"spec", spec_to_json(spec_)}, {"history", std::move(events)}};
}

std::unique_ptr<Session> Session::from_json(const nlohmann::json& j) {
  const auto& s = j.at("spec");
  SessionSpec spec;
  spec.seed = s.at("seed").get<std::uint64_t>();
  spec.prompt = s.at("prompt").get<std::vector<std::string>>();
  spec.params = params_from_json(s.value("params", nlohmann::json::object()));
  spec.sampler = parse_sampler(s.value("sampler", std::string("plms")));
  auto session = std::make_unique<Session>(j.at("id").get<std::string>(), std::move(spec));
  for (const auto& e : j.at("history")) session->apply(event_from_json(e));
  return session;
}

void TicketLock::lock() {
  std::unique_lock lk(mutex_);
  const std::uint64_t ticket = next_++;
  cv_.wait(lk, [&] { return serving_ == ticket; });
}

void TicketLock::unlock() {
  {
    std::lock_guard lk(mutex_);
    ++serving_;
  }
  cv_.notify_all();
}

std::string SessionStore::create(SessionSpec spec) {
  std::string id;
  {
    std::lock_guard lk(mutex_);
    char buf[24];
    do {
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(mix64(++counter_ ^ 0x73657373ULL)));
      id = buf;
    } while (slots_.count(id));
  }
  // Build outside the lock; a config error leaves the store untouched.
  auto session = std::make_unique<Session>(id, std::move(spec));
  insert(std::move(session));
  return id;
}

void SessionStore::insert(std::unique_ptr<Session> session) {
  auto slot = std::make_shared<Slot>();
  const std::string id = session->id();
  slot->session = std::move(session);
  std::lock_guard lk(mutex_);
  slots_[id] = std::move(slot);
}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) const {
  std::lock_guard lk(mutex_);
  const auto it = slots_.find(id);
  return it == slots_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lk(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, slot] : slots_) out.push_back(id);
  return out;
}

nlohmann::json SessionStore::snapshot() const {
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& id : ids()) {
    const auto slot = find(id);
    std::lock_guard lk(slot->lock);
    sessions.push_back(slot->session->to_json());
  }
  return {{"sessions", std::move(sessions)}};
}

void SessionStore::restore(const nlohmann::json& j) {
  for (const auto& s : j.at("sessions")) insert(Session::from_json(s));
}

}  // namespace noiseloom
