#include <gtest/gtest.h>

#include <deque>
#include <vector>

#include "oracles.hpp"
#include "panonav/memory.hpp"
#include "panonav/rng.hpp"

using namespace panonav;
using oracles::make_summary;

namespace {

void expect_same(const std::vector<GlobalSummary>& got, const std::deque<GlobalSummary>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].timestep, want[i].timestep);
    EXPECT_EQ(got[i].room_type, want[i].room_type);
    EXPECT_EQ(got[i].inventory, want[i].inventory);
    EXPECT_EQ(got[i].text, want[i].text);
  }
}

}  // namespace

TEST(MemoryQueue, StartsEmpty) {
  MemoryQueue q(5);
  EXPECT_EQ(q.capacity(), 5u);
  EXPECT_EQ(q.size(), 0u);
  EXPECT_TRUE(q.empty());
  EXPECT_FALSE(q.full());
  EXPECT_TRUE(q.snapshot().empty());
  EXPECT_THROW(MemoryQueue(0), Error);
}

TEST(MemoryQueue, EvictsOldestOnceFull) {
  MemoryQueue q(5);
  for (int t = 1; t <= 5; ++t) {
    auto evicted = q.push(make_summary(t, "kitchen", {"sink"}));
    EXPECT_FALSE(evicted.has_value());
    EXPECT_EQ(q.size(), static_cast<size_t>(t));
    EXPECT_EQ(q.full(), t == 5);
  }
  for (int t = 6; t <= 8; ++t) {
    auto evicted = q.push(make_summary(t, "kitchen", {"sink"}));
    ASSERT_TRUE(evicted.has_value());
    EXPECT_EQ(evicted->timestep, t - 5);
    EXPECT_EQ(q.size(), 5u);
    EXPECT_TRUE(q.full());
  }
  auto snap = q.snapshot();
  ASSERT_EQ(snap.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(snap[i].timestep, 4 + i);
}

TEST(MemoryQueue, FullFlagNeverClears) {
  MemoryQueue q(5);
  bool was_full = false;
  for (int t = 1; t <= 10000; ++t) {
    q.push(make_summary(t, "hallway", {}));
    if (was_full) ASSERT_TRUE(q.full()) << "flag dropped at t=" << t;
    was_full = was_full || q.full();
    ASSERT_EQ(q.size(), static_cast<size_t>(t < 5 ? t : 5));
  }
  EXPECT_TRUE(was_full);
}

TEST(MemoryQueue, RejectsStaleTimesteps) {
  MemoryQueue q(3);
  q.push(make_summary(4, "office", {"desk"}));
  EXPECT_THROW(q.push(make_summary(4, "office", {"desk"})), Error);
  EXPECT_THROW(q.push(make_summary(1, "office", {"desk"})), Error);
  EXPECT_EQ(q.size(), 1u);
  EXPECT_EQ(q.snapshot()[0].timestep, 4);
  q.push(make_summary(9, "office", {}));
  EXPECT_EQ(q.size(), 2u);
}

TEST(MemoryQueue, SnapshotIsADetachedCopy) {
  MemoryQueue q(2);
  q.push(make_summary(1, "bedroom", {"bed"}));
  auto snap = q.snapshot();
  snap[0].room_type = "garage";
  snap.clear();
  EXPECT_EQ(q.snapshot()[0].room_type, "bedroom");
}

TEST(MemoryQueue, MatchesPlainDequeModel) {
  Rng rng(4242);
  const std::vector<std::string> rooms{"kitchen", "office", "hallway"};
  for (int round = 0; round < 50; ++round) {
    size_t cap = 1 + rng.below(9);
    MemoryQueue q(cap);
    std::deque<GlobalSummary> model;
    int t = 0;
    for (int op = 0; op < 400; ++op) {
      t += 1 + static_cast<int>(rng.below(3));
      GlobalSummary gs = make_summary(t, rng.pick(rooms), {"obj" + std::to_string(t % 7)});
      std::optional<GlobalSummary> model_evicted;
      if (model.size() == cap) {
        model_evicted = model.front();
        model.pop_front();
      }
      model.push_back(gs);
      auto evicted = q.push(gs);
      ASSERT_EQ(evicted.has_value(), model_evicted.has_value());
      if (evicted) ASSERT_EQ(evicted->timestep, model_evicted->timestep);
      ASSERT_EQ(q.size(), model.size());
      ASSERT_EQ(q.full(), model.size() == cap);
      if (op % 37 == 0) expect_same(q.snapshot(), model);
    }
    expect_same(q.snapshot(), model);
  }
}
