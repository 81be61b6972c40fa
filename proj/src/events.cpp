#include "hawkes/events.hpp"

#include "hawkes/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace hawkes {

EventSequence::EventSequence(std::vector<Event> events, std::vector<double> horizons)
    : events_(std::move(events)), horizons_(std::move(horizons)) {
    if (horizons_.empty()) throw InvalidInput("event sequence needs at least one horizon");
    for (double T : horizons_)
        if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("horizons must be finite and > 0");
    double prev = -1.0;
    for (std::size_t i = 0; i < events_.size(); ++i) {
        const Event& e = events_[i];
        if (e.k >= horizons_.size())
            throw InvalidInput("event " + std::to_string(i) + " has coordinate " + std::to_string(e.k + 1) +
                               " outside 1.." + std::to_string(horizons_.size()));
        if (!(e.t >= 0.0) || e.t > horizons_[e.k])
            throw InvalidInput("event " + std::to_string(i) + " at t=" + std::to_string(e.t) +
                               " lies outside [0, T_" + std::to_string(e.k + 1) + "]");
        if (!std::isfinite(e.x)) throw InvalidInput("event " + std::to_string(i) + " has a non-finite mark");
        if (e.t == prev) throw InvalidInput("events " + std::to_string(i - 1) + " and " + std::to_string(i) + " share a timestamp");
        if (e.t < prev) throw InvalidInput("events are not sorted by time at index " + std::to_string(i));
        prev = e.t;
    }
}

std::vector<std::size_t> EventSequence::counts() const {
    std::vector<std::size_t> c(horizons_.size(), 0);
    for (const auto& e : events_) ++c[e.k];
    return c;
}

Dataset::Dataset(std::vector<EventSequence> replicates) : replicates_(std::move(replicates)) {
    if (replicates_.empty()) throw InvalidInput("a dataset needs at least one replicate");
    for (const auto& r : replicates_)
        if (r.horizons() != replicates_.front().horizons())
            throw HorizonMismatch("replicates do not share the same horizons");
}

std::size_t Dataset::total_events() const noexcept {
    std::size_t total = 0;
    for (const auto& r : replicates_) total += r.size();
    return total;
}

Aggregate aggregate(const Dataset& data) {
    if (data.n() == 1) return {data.replicates().front(), 1, 0};

    struct Tagged {
        Event e;
        std::size_t replicate;
    };
    std::vector<Tagged> all;
    all.reserve(data.total_events());
    for (std::size_t i = 0; i < data.n(); ++i)
        for (const auto& e : data.replicates()[i].events()) all.push_back({e, i});
    std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
        return a.e.t < b.e.t || (a.e.t == b.e.t && a.replicate < b.replicate);
    });

    std::size_t jittered = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i + 1;
        while (j < all.size() && all[j].e.t == all[i].e.t) ++j;
        if (j - i > 1) {
            for (std::size_t m = i; m < j; ++m) {
                if (all[m].replicate == 0) continue;
                all[m].e.t += static_cast<double>(all[m].replicate) * kTieJitter;
                ++jittered;
            }
        }
        i = j;
    }
    if (jittered > 0)
        std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.e.t < b.e.t; });

    std::vector<Event> merged;
    merged.reserve(all.size());
    for (const auto& t : all) merged.push_back(t.e);
    return {EventSequence(std::move(merged), data.horizons()), data.n(), jittered};
}

std::uint64_t content_hash(const Dataset& data) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto feed = [&h](std::uint64_t word) {
        for (int b = 0; b < 8; ++b) {
            h ^= (word >> (8 * b)) & 0xFFU;
            h *= 0x100000001B3ULL;
        }
    };
    for (const auto& r : data.replicates()) {
        feed(r.size());
        for (const auto& e : r.events()) {
            feed(std::bit_cast<std::uint64_t>(e.t));
            feed(e.k);
            feed(std::bit_cast<std::uint64_t>(e.x));
        }
    }
    return h;
}

void write_jsonl(std::ostream& out, const Dataset& data, bool marked) {
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto& r = data.replicates()[i];
        nlohmann::json events = nlohmann::json::array();
        for (const auto& e : r.events()) {
            nlohmann::json x = marked ? nlohmann::json(e.x) : nlohmann::json(nullptr);
            events.push_back(nlohmann::json::array({e.t, e.k + 1, x}));
        }
        nlohmann::json line = {{"id", i}, {"horizons", r.horizons()}, {"events", std::move(events)}};
        out << line.dump() << '\n';
    }
}

Dataset read_jsonl(std::istream& in) {
    std::vector<EventSequence> replicates;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "dataset line " + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInput(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("horizons") || !j.contains("events"))
            throw InvalidInput(where + ": expected an object with 'horizons' and 'events'");
        std::vector<double> horizons;
        std::vector<Event> events;
        try {
            horizons = j.at("horizons").get<std::vector<double>>();
            for (const auto& item : j.at("events")) {
                if (!item.is_array() || item.size() < 2 || item.size() > 3)
                    throw InvalidInput(where + ": each event must be [t, k, x]");
                const auto k = item[1].get<std::int64_t>();
                if (k < 1) throw InvalidInput(where + ": coordinates are 1-based");
                Event e;
                e.t = item[0].get<double>();
                e.k = static_cast<std::uint32_t>(k - 1);
                e.x = item.size() == 3 && !item[2].is_null() ? item[2].get<double>() : 1.0;
                events.push_back(e);
            }
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInput(where + ": " + e.what());
        }
        try {
            replicates.emplace_back(std::move(events), std::move(horizons));
        } catch (const InvalidInput& e) {
            throw InvalidInput(where + ": " + e.what());
        }
    }
    if (replicates.empty()) throw InvalidInput("dataset contains no replicates");
    return Dataset(std::move(replicates));
}

} // namespace hawkes
