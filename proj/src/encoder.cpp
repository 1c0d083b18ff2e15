#include "tradeclust/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace tradeclust {

std::optional<TradingState> parse_state_code(const std::string& code) {
    if (code == "b") return TradingState::Buy;
    if (code == "s") return TradingState::Sell;
    if (code == "bs") return TradingState::BuySell;
    return std::nullopt;
}

namespace {

// theta as an exact dyadic rational: theta = num / 2^shift. Every finite
// double is such a rational, so the state boundaries are decided in integer
// arithmetic with no rounding.
struct DyadicTheta {
    __int128 num = 0;
    int shift = 0;
};

DyadicTheta decompose_theta(double theta) {
    if (!(theta > 0.0) || !(theta < 1.0) || !std::isfinite(theta)) {
        throw ValidationError("theta must lie in (0, 1)");
    }
    int exp = 0;
    const double frac = std::frexp(theta, &exp);  // theta = frac * 2^exp
    const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    // theta = mant * 2^(exp - 53) = mant / 2^(53 - exp); exp <= 0 here.
    return DyadicTheta{static_cast<__int128>(mant), 53 - exp};
}

}  // namespace

std::optional<TradingState> compute_state(std::int64_t v_buy,
                                          std::int64_t v_sell, double theta) {
    if (v_buy < 0 || v_sell < 0) {
        throw ValidationError("negative volume in transaction record");
    }
    if (v_buy == 0 && v_sell == 0) {
        throw ValidationError(
            "record with zero bought and sold volume (state ratio undefined)");
    }
    const DyadicTheta th = decompose_theta(theta);
    // r > theta  <=>  (v_buy - v_sell) * 2^shift > num * (v_buy + v_sell)
    const __int128 lhs = (static_cast<__int128>(v_buy) - v_sell) << th.shift;
    const __int128 rhs = th.num * (static_cast<__int128>(v_buy) + v_sell);
    if (lhs > rhs) return TradingState::Buy;
    if (lhs < -rhs) return TradingState::Sell;
    if (v_buy > 0 && v_sell > 0) return TradingState::BuySell;
    return std::nullopt;  // unreachable for theta < 1; kept for totality
}

std::vector<DailyStateSeries> build_state_series(
    const std::vector<TransactionRecord>& records, const std::string& stock_id,
    double theta) {
    // investor -> sorted day map; std::map keeps both levels deterministic.
    std::map<std::string, std::map<int, const TransactionRecord*>> grouped;
    std::vector<std::string> duplicates;
    for (const auto& rec : records) {
        if (rec.stock_id != stock_id) continue;
        auto [it, inserted] =
            grouped[rec.investor_id].emplace(rec.day, &rec);
        if (!inserted) {
            duplicates.push_back(rec.investor_id + "/" + stock_id + "/day " +
                                 std::to_string(rec.day));
        }
    }
    if (!duplicates.empty()) {
        std::ostringstream msg;
        msg << "duplicate (investor, stock, day) keys:";
        for (const auto& d : duplicates) msg << " " << d;
        throw DataError(msg.str());
    }

    std::vector<DailyStateSeries> out;
    out.reserve(grouped.size());
    for (const auto& [investor, days] : grouped) {
        DailyStateSeries series;
        series.investor_id = investor;
        series.stock_id = stock_id;
        for (const auto& [day, rec] : days) {
            series.category = rec->category.empty() ? series.category
                                                    : rec->category;
            const auto state = compute_state(rec->v_buy, rec->v_sell, theta);
            if (state) series.states.emplace_back(day, *state);
        }
        if (!series.states.empty()) out.push_back(std::move(series));
    }
    return out;
}

std::vector<DailyStateSeries> filter_active(
    const std::vector<DailyStateSeries>& series, int min_transactions) {
    if (min_transactions < 1) {
        throw ValidationError("min_transactions must be >= 1");
    }
    std::vector<DailyStateSeries> out;
    out.reserve(series.size());
    for (const auto& s : series) {
        if (s.n_active() >= min_transactions) out.push_back(s);
    }
    return out;
}

}  // namespace tradeclust
