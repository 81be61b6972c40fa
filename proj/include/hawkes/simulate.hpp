#pragma once

#include "hawkes/events.hpp"
#include "hawkes/model.hpp"

#include <cstddef>
#include <cstdint>

namespace hawkes {

struct SimulationOptions {
    /// A replicate with more events than this aborts with Runaway.
    std::size_t max_events{1'000'000};
    /// For gamma/Pareto kernels, ignore history older than the lag whose
    /// remaining kernel mass is below `truncation_mass`. Off: exact.
    bool truncate_history{false};
    double truncation_mass{1e-12};
    /// Worker cap for simulate_dataset; 0 uses every hardware thread.
    unsigned threads{1};
};

/// One realisation on [0, T_k] per coordinate by Ogata thinning. The bound is
/// refreshed at every candidate over a short look-ahead window; marks are drawn
/// only for accepted events.
EventSequence simulate_replicate(const ModelSpec& spec, const ParamVector& theta, std::uint64_t seed,
                                 const SimulationOptions& options = {});

/// n replicates; replicate i uses stream_seed(master_seed, i), so the result
/// does not depend on the thread count.
Dataset simulate_dataset(const ModelSpec& spec, const ParamVector& theta, std::size_t n, std::uint64_t master_seed,
                         const SimulationOptions& options = {});

} // namespace hawkes
