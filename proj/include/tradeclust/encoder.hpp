#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tradeclust/common.hpp"

namespace tradeclust {

// Daily categorical trading state: primarily buying, primarily selling, or
// buying-and-selling. Days without trading carry no state at all.
enum class TradingState : std::uint8_t { Buy = 0, Sell = 1, BuySell = 2 };

inline const char* state_code(TradingState s) {
    switch (s) {
        case TradingState::Buy: return "b";
        case TradingState::Sell: return "s";
        case TradingState::BuySell: return "bs";
    }
    return "?";
}

std::optional<TradingState> parse_state_code(const std::string& code);

// One investor/stock/day row of aggregated daily volumes.
struct TransactionRecord {
    std::string investor_id;
    std::string stock_id;
    int day = 0;  // index in [0, t_days)
    std::int64_t v_buy = 0;
    std::int64_t v_sell = 0;
    std::string category;  // optional metadata, empty if absent
};

// Sparse day -> state series for one investor in one stock. `states` is
// sorted by day and non-empty.
struct DailyStateSeries {
    std::string investor_id;
    std::string stock_id;
    std::string category;
    std::vector<std::pair<int, TradingState>> states;

    int first_day() const { return states.front().first; }
    int last_day() const { return states.back().first; }
    int n_active() const { return static_cast<int>(states.size()); }
};

// Maps daily volumes to a trading state via the signed volume ratio
// r = (v_buy - v_sell) / (v_buy + v_sell):
//   Buy      if r > theta
//   Sell     if r < -theta
//   BuySell  if -theta <= r <= theta and both volumes positive
// The comparisons are evaluated exactly (integer cross-multiplication against
// the dyadic expansion of theta), so boundaries like r == 0.25 are bit-exact.
// Throws ValidationError when both volumes are zero or either is negative.
// The no-state return is the residual case -theta <= r <= theta with one
// volume zero, which cannot occur for theta < 1.
std::optional<TradingState> compute_state(std::int64_t v_buy,
                                          std::int64_t v_sell, double theta);

// One series per investor holding at least one state in `stock_id`.
// Records must be pre-aggregated to one row per (investor, stock, day);
// duplicates raise DataError listing the offending keys. Output is sorted by
// investor id.
std::vector<DailyStateSeries> build_state_series(
    const std::vector<TransactionRecord>& records, const std::string& stock_id,
    double theta);

// Keeps series with n_active >= min_transactions, preserving order.
std::vector<DailyStateSeries> filter_active(
    const std::vector<DailyStateSeries>& series, int min_transactions);

}  // namespace tradeclust
