#include "tradeclust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tradeclust {

void SyntheticConfig::validate() const {
    if (t_days < 10) throw ValidationError("t_days must be >= 10");
    for (int s : cohort_sizes) {
        if (s < 2) throw ValidationError("cohort sizes must be >= 2");
    }
    if (n_noise_investors < 0) {
        throw ValidationError("n_noise_investors must be >= 0");
    }
    if (cohort_sizes.empty() && n_noise_investors == 0) {
        throw ValidationError("nothing to generate");
    }
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError(std::string(name) + " must lie in [0, 1]");
        }
    };
    prob(cohort_activity, "cohort_activity");
    prob(state_noise, "state_noise");
    if (!(cohort_day_rate > 0.0) || cohort_day_rate > 1.0) {
        throw ValidationError("cohort_day_rate must lie in (0, 1]");
    }
    if (!(noise_exponent > 0.0)) {
        throw ValidationError("noise_exponent must be > 0");
    }
    if (noise_min_days < 1 || noise_min_days > t_days) {
        throw ValidationError("noise_min_days must lie in [1, t_days]");
    }
    if (volume_scale < 1) throw ValidationError("volume_scale must be >= 1");
}

std::pair<std::int64_t, std::int64_t> realize_volumes(TradingState state,
                                                      int volume_scale,
                                                      Rng& rng) {
    if (volume_scale < 1) throw ValidationError("volume_scale must be >= 1");
    const auto scale = static_cast<std::uint64_t>(volume_scale);
    switch (state) {
        case TradingState::Buy:
            return {static_cast<std::int64_t>(1 + rng.uniform_u64(scale)), 0};
        case TradingState::Sell:
            return {0, static_cast<std::int64_t>(1 + rng.uniform_u64(scale))};
        case TradingState::BuySell: {
            // |v - w| <= 0.25 (v + w)  <=>  3v/5 <= w <= 5v/3, both >= 1.
            const std::int64_t v =
                static_cast<std::int64_t>(1 + rng.uniform_u64(scale));
            const std::int64_t w_lo = std::max<std::int64_t>(1, (3 * v + 4) / 5);
            const std::int64_t w_hi = (5 * v) / 3;
            const std::int64_t w =
                w_lo + static_cast<std::int64_t>(rng.uniform_u64(
                           static_cast<std::uint64_t>(w_hi - w_lo + 1)));
            return {v, w};
        }
    }
    throw ValidationError("unknown trading state");
}

namespace {

std::string make_id(const char* prefix, int group, int member) {
    char buf[32];
    if (member >= 0) {
        std::snprintf(buf, sizeof(buf), "%s%02d_%04d", prefix, group, member);
    } else {
        std::snprintf(buf, sizeof(buf), "%s%04d", prefix, group);
    }
    return buf;
}

std::vector<int> sample_days(int t_days, int k, Rng& rng) {
    std::vector<int> days(static_cast<std::size_t>(t_days));
    for (int d = 0; d < t_days; ++d) days[static_cast<std::size_t>(d)] = d;
    rng.shuffle(days);
    days.resize(static_cast<std::size_t>(k));
    std::sort(days.begin(), days.end());
    return days;
}

TradingState random_state(Rng& rng) {
    return static_cast<TradingState>(rng.uniform_u64(3));
}

// Discrete bounded power law P(k) proportional to k^-gamma on
// [min_days, t_days], sampled through its cumulative table.
struct DayCountSampler {
    std::vector<double> cdf;
    int min_days;

    DayCountSampler(int min_days_, int t_days, double gamma)
        : min_days(min_days_) {
        double total = 0.0;
        for (int k = min_days; k <= t_days; ++k) {
            total += std::pow(static_cast<double>(k), -gamma);
            cdf.push_back(total);
        }
        for (double& c : cdf) c /= total;
    }

    int sample(Rng& rng) const {
        const double u = rng.uniform_real();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return min_days +
               static_cast<int>(std::distance(cdf.begin(), it));
    }
};

const char* kCategories[] = {"Households",   "Households", "Households",
                             "Corporations", "Financial",  "NonProfit",
                             "Governmental"};

}  // namespace

std::pair<std::vector<TransactionRecord>, GroundTruth> generate(
    const SyntheticConfig& config) {
    config.validate();
    Rng rng(config.seed);

    std::vector<TransactionRecord> records;
    GroundTruth truth;
    truth.planted.n_clusters = config.n_cohorts();

    const int cohort_days = std::max(
        1, static_cast<int>(std::lround(config.cohort_day_rate *
                                        config.t_days)));

    for (int c = 0; c < config.n_cohorts(); ++c) {
        std::vector<std::pair<int, TradingState>> profile;
        for (int day : sample_days(config.t_days, cohort_days, rng)) {
            profile.emplace_back(
                day, rng.bernoulli(0.5) ? TradingState::Buy
                                        : TradingState::Sell);
        }
        truth.cohort_profiles.push_back(profile);

        for (int m = 0; m < config.cohort_sizes[static_cast<std::size_t>(c)];
             ++m) {
            const std::string id = make_id("c", c, m);
            const std::string category =
                kCategories[rng.uniform_u64(std::size(kCategories))];
            truth.planted.ids.push_back(id);
            truth.planted.labels.push_back(c);

            std::size_t first_record = records.size();
            for (const auto& [day, template_state] : profile) {
                if (!rng.bernoulli(config.cohort_activity)) continue;
                TradingState state = template_state;
                if (rng.bernoulli(config.state_noise)) state = random_state(rng);
                const auto [v_buy, v_sell] =
                    realize_volumes(state, config.volume_scale, rng);
                records.push_back(TransactionRecord{id, config.stock_id, day,
                                                    v_buy, v_sell, category});
            }
            if (records.size() == first_record) {
                // A fully inactive member would fall out of the ground
                // truth's universe; give it one template day.
                const auto& [day, state] = profile.front();
                const auto [v_buy, v_sell] =
                    realize_volumes(state, config.volume_scale, rng);
                records.push_back(TransactionRecord{id, config.stock_id, day,
                                                    v_buy, v_sell, category});
            }
        }
    }

    if (config.n_noise_investors > 0) {
        const DayCountSampler sampler(config.noise_min_days, config.t_days,
                                      config.noise_exponent);
        for (int k = 0; k < config.n_noise_investors; ++k) {
            const std::string id = make_id("n", k, -1);
            const std::string category =
                kCategories[rng.uniform_u64(std::size(kCategories))];
            const int n_days = sampler.sample(rng);
            for (int day : sample_days(config.t_days, n_days, rng)) {
                const TradingState state = random_state(rng);
                const auto [v_buy, v_sell] =
                    realize_volumes(state, config.volume_scale, rng);
                records.push_back(TransactionRecord{id, config.stock_id, day,
                                                    v_buy, v_sell, category});
            }
        }
    }

    return {std::move(records), std::move(truth)};
}

}  // namespace tradeclust
