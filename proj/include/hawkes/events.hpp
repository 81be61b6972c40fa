#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hawkes {

struct Event {
    double t{0.0};       ///< seconds since the start of the window
    std::uint32_t k{0};  ///< coordinate, 0-based
    double x{1.0};       ///< mark; 1 for unmarked models
};

/// Time-ordered events of one realisation on per-coordinate windows [0, T_k].
/// Construction rejects unsorted input, repeated timestamps and events past
/// their coordinate's horizon.
class EventSequence {
public:
    EventSequence() = default;
    EventSequence(std::vector<Event> events, std::vector<double> horizons);

    [[nodiscard]] const std::vector<Event>& events() const noexcept { return events_; }
    [[nodiscard]] const std::vector<double>& horizons() const noexcept { return horizons_; }
    [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
    [[nodiscard]] bool empty() const noexcept { return events_.empty(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return horizons_.size(); }
    [[nodiscard]] std::vector<std::size_t> counts() const;

private:
    std::vector<Event> events_;
    std::vector<double> horizons_;
};

/// n >= 1 independent replicates sharing the same horizons.
class Dataset {
public:
    explicit Dataset(std::vector<EventSequence> replicates);

    [[nodiscard]] const std::vector<EventSequence>& replicates() const noexcept { return replicates_; }
    [[nodiscard]] std::size_t n() const noexcept { return replicates_.size(); }
    [[nodiscard]] const std::vector<double>& horizons() const noexcept { return replicates_.front().horizons(); }
    [[nodiscard]] std::size_t total_events() const noexcept;

private:
    std::vector<EventSequence> replicates_;
};

/// Superposition of all replicates on one timeline.
struct Aggregate {
    EventSequence events;
    std::size_t replicates{0};
    std::size_t jittered{0}; ///< events shifted to break exact cross-replicate ties
};

/// Offset added per replicate index to break an exact timestamp tie.
inline constexpr double kTieJitter = 0x1.0p-40;

/// Merges replicates in time order. When events of different replicates share a
/// timestamp, the event of replicate i is moved to t + i * 2^-40.
Aggregate aggregate(const Dataset& data);

/// 64-bit FNV-1a over every event (t, k, x) bit pattern, in order.
std::uint64_t content_hash(const Dataset& data) noexcept;

// JSON Lines: one replicate per line,
//   {"id": i, "horizons": [...], "events": [[t, k, x], ...]}
// with k 1-based and x null for unmarked models.
void write_jsonl(std::ostream& out, const Dataset& data, bool marked);
Dataset read_jsonl(std::istream& in);

} // namespace hawkes
