#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noiseloom/guidance.hpp"
#include "noiseloom/latent.hpp"
#include "noiseloom/noise_edit.hpp"
#include "noiseloom/sampler.hpp"
#include "noiseloom/toy_model.hpp"

namespace noiseloom {

struct EditEvent {
  enum class Kind { resample, swap };
  Kind kind = Kind::resample;
  std::vector<BlockCoord> blocks;   // resample
  std::uint64_t fresh_seed = 0;     // resample
  LayoutGuidance guidance;          // swap; pairing seed inside
  std::vector<SwapList> swaps;      // swap outcome, informational

  friend bool operator==(const EditEvent&, const EditEvent&) = default;
};

nlohmann::json event_to_json(const EditEvent& e);
EditEvent event_from_json(const nlohmann::json& j);

struct SessionSpec {
  std::uint64_t seed = 0;
  std::vector<std::string> prompt;
  ToyModelParams params;
  SamplerKind sampler = SamplerKind::plms;
};

nlohmann::json spec_to_json(const SessionSpec& s);

// Interactive editing state. Not thread-safe; SessionStore serializes access.
class Session {
 public:
  Session(std::string id, SessionSpec spec);

  const std::string& id() const { return id_; }
  const SessionSpec& spec() const { return spec_; }
  const LatentGrid& latent() const { return latent_; }
  const std::vector<EditEvent>& history() const { return history_; }
  const TokenSet& tokens() const { return tokens_; }
  const ToyModel& model() const { return *model_; }

  // Generates from the current latent; reuses the cached result when the
  // latent has not changed since.
  const GenerationResult& generate();
  const GenerationResult& repaint(const RegionMask& mask, std::uint64_t fresh_seed);
  const GenerationResult& layout(const LayoutGuidance& guidance);

  // Applies a recorded event to the latent (no generation).
  void apply(EditEvent event);
  // The latent obtained by folding the history over the initial seed.
  LatentGrid replay() const;

  nlohmann::json to_json() const;  // spec + history
  static std::unique_ptr<Session> from_json(const nlohmann::json& j);

 private:
  LatentGrid transform(const LatentGrid& z, EditEvent& event) const;

  std::string id_;
  SessionSpec spec_;
  std::unique_ptr<ToyModel> model_;
  TokenSet tokens_;
  LatentGrid latent_;
  std::vector<EditEvent> history_;
  std::optional<GenerationResult> last_;
};

// FIFO lock: waiters are admitted in the order they asked.
class TicketLock {
 public:
  void lock();
  void unlock();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::uint64_t next_ = 0;
  std::uint64_t serving_ = 0;
};

class SessionStore {
 public:
  struct Slot {
    TicketLock lock;
    std::unique_ptr<Session> session;
  };

  std::string create(SessionSpec spec);
  void insert(std::unique_ptr<Session> session);
  std::shared_ptr<Slot> find(const std::string& id) const;
  std::vector<std::string> ids() const;

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& j);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::uint64_t counter_ = 0;
};

}  // namespace noiseloom
