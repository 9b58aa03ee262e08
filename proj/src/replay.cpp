#include "metarl/replay.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace metarl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    storage_.reserve(capacity);
}

void ReplayBuffer::insert(Transition t) {
    if (size_ < capacity_) {
        storage_.push_back(std::move(t));
        ++size_;
    } else {
        storage_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
    ++total_inserted_;
}

const Transition& ReplayBuffer::recent(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("ReplayBuffer::recent: index past size");
    const std::size_t newest = (cursor_ + capacity_ - 1) % capacity_;
    return storage_[(newest + capacity_ - i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample_uniform(std::size_t n, Rng& rng) const {
    if (empty()) throw std::runtime_error("ReplayBuffer: sample from empty buffer");
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(&storage_[rng.index(size_)]);
    return out;
}

namespace {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("replay deserialization: truncated stream");
    return value;
}

void write_vec(std::ostream& out, const Vec& v) {
    write_raw<std::int32_t>(out, static_cast<std::int32_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * v.size()));
}

Vec read_vec(std::istream& in) {
    const auto n = read_raw<std::int32_t>(in);
    if (n < 0) throw std::runtime_error("replay deserialization: bad vector length");
    Vec v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
    if (!in) throw std::runtime_error("replay deserialization: truncated stream");
    return v;
}

}  // namespace

void save_transition(std::ostream& out, const Transition& t) {
    write_vec(out, t.s);
    write_raw<double>(out, t.a);
    write_raw<double>(out, t.r);
    write_vec(out, t.s_next);
    write_raw<std::uint8_t>(out, t.done ? 1 : 0);
    write_raw<std::int32_t>(out, t.task_id);
}

Transition load_transition(std::istream& in) {
    Transition t;
    t.s = read_vec(in);
    t.a = read_raw<double>(in);
    t.r = read_raw<double>(in);
    t.s_next = read_vec(in);
    t.done = read_raw<std::uint8_t>(in) != 0;
    t.task_id = read_raw<std::int32_t>(in);
    return t;
}

void ReplayBuffer::save(std::ostream& out) const {
    write_raw<std::uint64_t>(out, capacity_);
    write_raw<std::uint64_t>(out, size_);
    write_raw<std::uint64_t>(out, total_inserted_);
    // Oldest first, so reinsertion reproduces the ring layout.
    for (std::size_t i = size_; i-- > 0;) save_transition(out, recent(i));
}

ReplayBuffer ReplayBuffer::load(std::istream& in) {
    const auto capacity = read_raw<std::uint64_t>(in);
    const auto size = read_raw<std::uint64_t>(in);
    const auto total = read_raw<std::uint64_t>(in);
    ReplayBuffer buf(static_cast<std::size_t>(capacity));
    for (std::uint64_t i = 0; i < size; ++i) buf.insert(load_transition(in));
    buf.total_inserted_ = total;
    return buf;
}

}  // namespace metarl
