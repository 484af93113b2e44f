/*
 * Copyright 2026 The fabricsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace fabricsim {

enum class EventKind : uint8_t {
  ComputeDone = 0,
  TransferDone = 1,
  BackgroundEdge = 2,
  PacingRelease = 3,
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::ComputeDone;
  int64_t id = 0;
  uint64_t seq = 0;  // insertion order, final tie-break
};

/// Min-heap ordered by (time, kind, id, seq). The seq component only
/// separates exact duplicates (same flow, drain vs arrival at zero
/// latency), keeping the pop order fully deterministic.
class EventQueue {
 public:
  void push(double time, EventKind kind, int64_t id) {
    heap_.push(Event{time, kind, id, next_seq_++});
  }

  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }

  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  size_t size() const { return heap_.size(); }

 private:
  struct After {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return a.kind > b.kind;
      if (a.id != b.id) return a.id > b.id;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, After> heap_;
  uint64_t next_seq_ = 0;
};

}  // namespace fabricsim
