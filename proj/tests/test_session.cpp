#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "noiseloom/error.hpp"
#include "noiseloom/session.hpp"

using namespace noiseloom;

namespace {

SessionSpec spec(std::uint64_t seed = 3) {
  SessionSpec s;
  s.seed = seed;
  s.prompt = {"dog", "cat"};
  s.params.steps = 6;
  return s;
}

LayoutGuidance guidance(Region dog, std::uint64_t pairing) {
  LayoutGuidance g;
  g.items = {{dog, "dog"}};
  g.pairing_seed = pairing;
  return g;
}

RegionMask mask(Region r) { return RegionMask::from_region({16, 16}, r); }

}  // namespace

TEST(Session, InitialLatentAndCachedGenerate) {
  Session s("a", spec());
  EXPECT_TRUE(s.latent().bitwise_equal(sample_latent(64, 64, 4, 3)));
  const auto& r1 = s.generate();
  const auto* addr = &r1;
  EXPECT_EQ(&s.generate(), addr);
  Session t("b", spec());
  EXPECT_TRUE(bitwise_equal(s.generate(), t.generate()));
}

TEST(Session, ReplayMatchesAfterInterleavedEdits) {
  Session s("a", spec());
  s.repaint(mask({0, 0, 3, 3}), 11);
  s.layout(guidance({4, 4, 8, 8}, 5));
  s.repaint(mask({10, 10, 16, 12}), 12);
  s.layout(guidance({0, 8, 6, 16}, 6));
  ASSERT_EQ(s.history().size(), 4u);
  EXPECT_TRUE(s.replay().bitwise_equal(s.latent()));
  EXPECT_EQ(s.history()[1].swaps.size(), 1u);
  EXPECT_EQ(s.generate().provenance.edits.size(), 4u);
  EXPECT_EQ(s.generate().provenance.edits[0], "resample blocks=9 fresh_seed=11");

  // Order matters: swapping the two resamples gives a different latent.
  Session t("b", spec());
  t.repaint(mask({10, 10, 16, 12}), 12);
  t.layout(guidance({4, 4, 8, 8}, 5));
  t.repaint(mask({0, 0, 3, 3}), 11);
  t.layout(guidance({0, 8, 6, 16}, 6));
  EXPECT_TRUE(t.replay().bitwise_equal(t.latent()));
}

TEST(Session, Errors) {
  Session s("a", spec());
  EXPECT_THROW(s.repaint(RegionMask({16, 16}), 1), DegenerateInputError);
  EXPECT_THROW(s.repaint(RegionMask({8, 8}), 1), GeometryError);
  LayoutGuidance overlap;
  overlap.items = {{{0, 0, 4, 4}, "dog"}, {{2, 2, 6, 6}, "cat"}};
  EXPECT_THROW(s.layout(overlap), GuidanceError);
  LayoutGuidance horse;
  horse.items = {{{0, 0, 2, 2}, "horse"}};
  EXPECT_THROW(s.layout(horse), GuidanceError);
  EXPECT_TRUE(s.history().empty());
  EXPECT_THROW(Session("x", [] {
                 auto p = spec();
                 p.params.steps = 0;
                 return p;
               }()),
               ConfigError);
}

TEST(Session, JsonRoundTrip) {
  Session s("abc", spec(9));
  s.repaint(mask({1, 1, 4, 5}), 2);
  s.layout(guidance({8, 8, 12, 12}, 1));
  const auto back = Session::from_json(s.to_json());
  EXPECT_EQ(back->id(), "abc");
  EXPECT_EQ(back->history(), s.history());
  EXPECT_TRUE(back->latent().bitwise_equal(s.latent()));
  for (const auto& e : s.history()) EXPECT_EQ(event_from_json(event_to_json(e)), e);
}

TEST(TicketLock, AdmitsInArrivalOrder) {
  TicketLock lock;
  lock.lock();
  std::vector<int> order;
  std::vector<std::thread> threads;
  std::atomic<int> waiting{0};
  for (int i = 0; i < 6; ++i) {
    // Start each waiter only after the previous one has taken its ticket.
    threads.emplace_back([&, i] {
      ++waiting;
      lock.lock();
      order.push_back(i);
      lock.unlock();
    });
    while (waiting.load() != i + 1) std::this_thread::yield();
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  lock.unlock();
  for (auto& t : threads) t.join();
  EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3, 4, 5}));
}

TEST(SessionStore, CreateFindSnapshot) {
  SessionStore store;
  const auto a = store.create(spec(1));
  const auto b = store.create(spec(2));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_NE(a, b);
  EXPECT_EQ(store.find("nope"), nullptr);
  {
    auto slot = store.find(a);
    std::lock_guard lk(slot->lock);
    slot->session->repaint(mask({0, 0, 2, 2}), 4);
  }
  SessionStore other;
  other.restore(store.snapshot());
  EXPECT_EQ(other.ids(), store.ids());
  EXPECT_TRUE(other.find(a)->session->latent().bitwise_equal(store.find(a)->session->latent()));
  EXPECT_EQ(other.find(a)->session->history().size(), 1u);
  const auto c = other.create(spec(3));
  EXPECT_NE(c, a);
  EXPECT_NE(c, b);
}
