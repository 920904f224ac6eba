// include/hijacksim/harness/event_queue.hpp
// Min-queue of timed events. Ties go to the earlier insertion.

#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "hijacksim/core/types.hpp"

namespace hijacksim::harness {

template <class Payload>
class EventQueue {
public:
    struct Entry {
        VirtualTime t{0};
        std::uint64_t seq = 0;
        Payload payload;
    };

    void push(VirtualTime t, Payload p) {
        if (t < floor_) throw std::logic_error("event scheduled in the past");
        heap_.push(Entry{t, next_seq_++, std::move(p)});
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    std::optional<VirtualTime> next_time() const {
        if (heap_.empty()) return std::nullopt;
        return heap_.top().t;
    }

    Entry pop() {
        if (heap_.empty()) throw std::logic_error("pop from empty event queue");
        Entry e = heap_.top();
        heap_.pop();
        floor_ = e.t;
        return e;
    }

    /// Time of the last popped event; nothing earlier may be scheduled.
    VirtualTime floor() const { return floor_; }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    VirtualTime floor_{0};
};

}  // namespace hijacksim::harness
