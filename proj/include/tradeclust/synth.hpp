#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tradeclust/encoder.hpp"
#include "tradeclust/partition.hpp"

namespace tradeclust {

// Synthetic-dataset shape: planted cohorts trading synchronized state
// templates, plus independent noise investors with heavy-tailed activity.
struct SyntheticConfig {
    int t_days = 253;
    std::vector<int> cohort_sizes = {20, 20, 20, 20, 20};
    int n_noise_investors = 500;
    double cohort_activity = 0.8;   // chance a member trades a template day
    double cohort_day_rate = 0.15;  // fraction of days each cohort is active
    double state_noise = 0.05;      // chance a realized state is randomized
    double noise_exponent = 2.5;    // power-law exponent of noise day counts
    int noise_min_days = 5;         // day counts bounded to [min, t_days]
    int volume_scale = 1000;
    std::uint64_t seed = 1;
    std::string stock_id = "SYN1V";

    int n_cohorts() const { return static_cast<int>(cohort_sizes.size()); }
    void validate() const;
};

struct GroundTruth {
    Partition planted;  // cohort members only; label = cohort index
    // Per cohort: the intended day -> state template, sorted by day.
    std::vector<std::vector<std::pair<int, TradingState>>> cohort_profiles;
};

// Volumes whose compute_state at theta = 0.25 equals `state`; the BuySell
// range is derived so the ratio bound holds exactly, not sampled and
// retried.
std::pair<std::int64_t, std::int64_t> realize_volumes(TradingState state,
                                                      int volume_scale,
                                                      Rng& rng);

// Deterministic for a fixed seed: identical config yields a byte-identical
// record stream. Records come out grouped per investor, days ascending.
std::pair<std::vector<TransactionRecord>, GroundTruth> generate(
    const SyntheticConfig& config);

}  // namespace tradeclust
