#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "panonav/error.hpp"
#include "panonav/perception.hpp"

namespace panonav {

// Bounded FIFO of waypoint summaries. Starts empty each episode; once the
// capacity is reached the full flag stays set, because nothing ever dequeues
// without a matching enqueue.
class MemoryQueue {
 public:
  explicit MemoryQueue(size_t capacity) : capacity_(capacity) {
    require(capacity >= 1, Errc::invalid_input, "queue capacity must be at least 1");
  }

  size_t capacity() const { return capacity_; }
  size_t size() const { return entries_.size(); }
  bool full() const { return entries_.size() == capacity_; }
  bool empty() const { return entries_.empty(); }

  std::optional<GlobalSummary> push(const GlobalSummary& gs) {
    require(entries_.empty() || gs.timestep > entries_.back().timestep, Errc::contract,
            "summary timesteps must be strictly increasing");
    std::optional<GlobalSummary> evicted;
    if (full()) {
      evicted = entries_.front();
      entries_.pop_front();
    }
    entries_.push_back(gs);
    return evicted;
  }

  std::vector<GlobalSummary> snapshot() const {
    return {entries_.begin(), entries_.end()};  // oldest first
  }

 private:
  size_t capacity_;
  std::deque<GlobalSummary> entries_;
};

}  // namespace panonav
