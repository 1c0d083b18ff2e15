#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tradeclust/encoder.hpp"

namespace tradeclust {

// Ordered state pair: `first` is the state of the lower-id investor of a
// pair, `second` the other's. Nine combinations in total.
struct StateCombo {
    TradingState first;
    TradingState second;

    bool operator==(const StateCombo&) const = default;
};

inline constexpr std::array<StateCombo, 9> all_state_combos() {
    using S = TradingState;
    return {{{S::Buy, S::Buy},
             {S::Buy, S::Sell},
             {S::Buy, S::BuySell},
             {S::Sell, S::Buy},
             {S::Sell, S::Sell},
             {S::Sell, S::BuySell},
             {S::BuySell, S::Buy},
             {S::BuySell, S::Sell},
             {S::BuySell, S::BuySell}}};
}

// Token vocabulary used in edge CSVs: first state, underscore, second state
// ("b_s" = lower-id investor buying, the other selling).
std::string combo_token(const StateCombo& combo);
StateCombo parse_combo_token(const std::string& token);

// Co-occurrence counts of one state combination over the intersection of two
// investors' activity periods: n_t days in the intersection, n_a of them
// with the first investor in `combo.first`, n_b with the second in
// `combo.second`, n_ab with both simultaneously.
struct CooccurrenceCount {
    StateCombo combo;
    int n_t = 0;
    int n_a = 0;
    int n_b = 0;
    int n_ab = 0;
};

struct PValueRecord {
    std::string investor_i;
    std::string investor_j;
    StateCombo combo;
    double p = 1.0;
};

enum class Correction { Bonferroni, Fdr };
Correction parse_correction(const std::string& name);
const char* correction_name(Correction c);

// Reading of the per-test threshold denominator: alpha over the
// 9 * N (N-1) / 2 unordered-pair tests (the default), or over 9 * N (N-1)
// ordered tests.
enum class BonferroniDenominator { UnorderedPairs, OrderedPairs };

struct ValidatedCombo {
    CooccurrenceCount counts;
    double p = 1.0;
};

struct ValidatedEdge {
    std::string investor_i;  // lower id
    std::string investor_j;
    std::vector<ValidatedCombo> combos;  // weight = combos.size()
    int weight() const { return static_cast<int>(combos.size()); }
    double min_p() const;
};

// Statistically validated network: investors as nodes, one undirected edge
// per pair with at least one validated state combination.
struct ValidatedNetwork {
    std::vector<std::string> nodes;  // sorted investor ids
    std::vector<ValidatedEdge> edges;
    Correction correction = Correction::Bonferroni;
    double alpha = 0.01;
    double per_test_alpha = 0.0;   // Bonferroni threshold alpha_b
    double threshold_used = 0.0;   // alpha_b, or the FDR step-up threshold
    std::int64_t n_tests = 0;      // p-values actually computed
    int n_investors = 0;           // series entering the run
};

// All nine state combinations counted on the activity-period intersection of
// two series; empty when the activity periods are disjoint. The first slot
// of each combo refers to `si`.
std::vector<CooccurrenceCount> count_cooccurrences(
    const DailyStateSeries& si, const DailyStateSeries& sj);

// Survival probability P(X >= n_ab) of the hypergeometric distribution
// H(X | n_t, n_a, n_b), evaluated in log space with log-factorial tables so
// extreme tails do not underflow. n_ab = 0 returns exactly 1.
double hypergeom_pvalue(int n_t, int n_a, int n_b, int n_ab);

// Per-test significance threshold for the 9-combination pair tests:
// 2 * alpha / (9 * n * (n - 1)) under the unordered-pairs reading.
double bonferroni_threshold(
    int n_investors, double alpha,
    BonferroniDenominator denom = BonferroniDenominator::UnorderedPairs);

// Benjamini-Hochberg step-up threshold: the largest p_k (ascending input,
// 1-based k) with p_k < k * per_test_alpha; 0 when no k qualifies.
// Validation then accepts p-values <= the returned threshold.
double fdr_threshold(const std::vector<double>& pvalues_ascending,
                     double per_test_alpha);

// Tests all unordered pairs with a nonempty activity intersection, all nine
// combinations each, and assembles the validated edge set. Bonferroni
// validates p < alpha_b; FDR validates p <= the step-up threshold computed
// from the pooled p-values of this run (one stock = one pool).
ValidatedNetwork build_svn(
    const std::vector<DailyStateSeries>& series, Correction correction,
    double alpha,
    BonferroniDenominator denom = BonferroniDenominator::UnorderedPairs,
    int n_threads = 1);

// Maximal connected node sets, largest first (ties by first node id); ids
// inside a component are sorted.
std::vector<std::vector<std::string>> connected_components(
    const ValidatedNetwork& net);

}  // namespace tradeclust
