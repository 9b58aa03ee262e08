#pragma once

#include "metarl/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace metarl {

/// One experience tuple (s, a, r, s') with episode bookkeeping.
struct Transition {
    Vec s;
    double a = 0.0;
    double r = 0.0;
    Vec s_next;
    bool done = false;
    int task_id = 0;
};

/// Ring storage with FIFO eviction. Insertion order is recoverable so the
/// recency-window context sampler can address the newest entries.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void insert(Transition t);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_inserted() const { return total_inserted_; }
    bool empty() const { return size_ == 0; }

    /// i = 0 is the newest transition, i = size()-1 the oldest retained.
    const Transition& recent(std::size_t i) const;

    /// n transitions drawn uniformly with replacement. Throws on empty buffer.
    std::vector<const Transition*> sample_uniform(std::size_t n, Rng& rng) const;

    void save(std::ostream& out) const;
    static ReplayBuffer load(std::istream& in);

private:
    std::vector<Transition> storage_;
    std::size_t capacity_ = 0;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;  // next write slot
    std::uint64_t total_inserted_ = 0;
};

void save_transition(std::ostream& out, const Transition& t);
Transition load_transition(std::istream& in);

}  // namespace metarl
