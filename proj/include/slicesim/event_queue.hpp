/*
 *  Copyright 2026 The slicesim Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicesim/common.hpp"

namespace slicesim {

enum class EventKind : std::uint8_t { MessageDelivery, TriggerFire, TimerExpiry };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::MessageDelivery: return "MessageDelivery";
    case EventKind::TriggerFire: return "TriggerFire";
    case EventKind::TimerExpiry: return "TimerExpiry";
  }
  return "?";
}

class SchedulingError : public ContractError {
 public:
  using ContractError::ContractError;
};

template <typename Payload>
struct SimEvent {
  std::int64_t seq = 0;
  Tick at = 0;
  EventKind kind = EventKind::MessageDelivery;
  Payload payload;
};

/// Virtual clock plus a queue that releases events in (at, seq) order.
template <typename Payload>
class EventQueue {
 public:
  using Event = SimEvent<Payload>;

  Tick now() const noexcept { return clock_; }
  bool empty() const noexcept { return queue_.empty(); }
  std::size_t size() const noexcept { return queue_.size(); }
  std::int64_t processed() const noexcept { return processed_; }

  /// Enqueues an event and returns its sequence number.
  std::int64_t schedule(Tick at, EventKind kind, Payload payload) {
    if (at < clock_)
      throw SchedulingError("event at t=" + std::to_string(at) + " is before clock t=" + std::to_string(clock_));
    const auto seq = next_seq_++;
    queue_.push(Event{seq, at, kind, std::move(payload)});
    return seq;
  }

  /// Pops the next event and moves the clock to it.
  Event advance() {
    if (queue_.empty()) throw SchedulingError("advance() on empty queue");
    Event e = queue_.top();
    queue_.pop();
    clock_ = e.at;
    ++processed_;
    return e;
  }

  const Event& peek() const { return queue_.top(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  Tick clock_ = 0;
  std::int64_t next_seq_ = 0;
  std::int64_t processed_ = 0;
};

}  // namespace slicesim
