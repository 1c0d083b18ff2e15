#include "tradeclust/svn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <thread>

namespace tradeclust {

std::string combo_token(const StateCombo& combo) {
    return std::string(state_code(combo.first)) + "_" +
           state_code(combo.second);
}

StateCombo parse_combo_token(const std::string& token) {
    const auto sep = token.find('_');
    if (sep != std::string::npos) {
        const auto a = parse_state_code(token.substr(0, sep));
        const auto b = parse_state_code(token.substr(sep + 1));
        if (a && b) return StateCombo{*a, *b};
    }
    throw DataError("unknown state combination token: " + token);
}

Correction parse_correction(const std::string& name) {
    if (name == "bonferroni") return Correction::Bonferroni;
    if (name == "fdr") return Correction::Fdr;
    throw ValidationError("unknown correction: " + name);
}

const char* correction_name(Correction c) {
    return c == Correction::Bonferroni ? "bonferroni" : "fdr";
}

double ValidatedEdge::min_p() const {
    double m = 1.0;
    for (const auto& vc : combos) m = std::min(m, vc.p);
    return m;
}

std::vector<CooccurrenceCount> count_cooccurrences(
    const DailyStateSeries& si, const DailyStateSeries& sj) {
    if (si.investor_id == sj.investor_id) {
        throw ValidationError("co-occurrence of an investor with itself: " +
                              si.investor_id);
    }
    if (si.stock_id != sj.stock_id) {
        throw ValidationError("co-occurrence across stocks: " + si.stock_id +
                              " vs " + sj.stock_id);
    }
    const int lo = std::max(si.first_day(), sj.first_day());
    const int hi = std::min(si.last_day(), sj.last_day());
    if (lo > hi) return {};
    const int n_t = hi - lo + 1;

    int days_a[3] = {0, 0, 0};
    int days_b[3] = {0, 0, 0};
    int joint[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    auto in_window = [&](int day) { return day >= lo && day <= hi; };
    for (const auto& [day, state] : si.states) {
        if (in_window(day)) ++days_a[static_cast<int>(state)];
    }
    for (const auto& [day, state] : sj.states) {
        if (in_window(day)) ++days_b[static_cast<int>(state)];
    }
    auto it_a = si.states.begin();
    auto it_b = sj.states.begin();
    while (it_a != si.states.end() && it_b != sj.states.end()) {
        if (it_a->first < it_b->first) {
            ++it_a;
        } else if (it_b->first < it_a->first) {
            ++it_b;
        } else {
            if (in_window(it_a->first)) {
                ++joint[static_cast<int>(it_a->second)]
                       [static_cast<int>(it_b->second)];
            }
            ++it_a;
            ++it_b;
        }
    }

    std::vector<CooccurrenceCount> out;
    out.reserve(9);
    for (const StateCombo& combo : all_state_combos()) {
        CooccurrenceCount c;
        c.combo = combo;
        c.n_t = n_t;
        c.n_a = days_a[static_cast<int>(combo.first)];
        c.n_b = days_b[static_cast<int>(combo.second)];
        c.n_ab = joint[static_cast<int>(combo.first)]
                      [static_cast<int>(combo.second)];
        out.push_back(c);
    }
    return out;
}

namespace {

double log_factorial(int n) {
    thread_local std::vector<double> table{0.0, 0.0};
    while (static_cast<int>(table.size()) <= n) {
        table.push_back(std::lgamma(static_cast<double>(table.size()) + 1.0));
    }
    return table[static_cast<std::size_t>(n)];
}

double log_choose(int n, int k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace

double hypergeom_pvalue(int n_t, int n_a, int n_b, int n_ab) {
    if (n_t < 1 || n_a < 0 || n_b < 0 || n_a > n_t || n_b > n_t || n_ab < 0 ||
        n_ab > std::min(n_a, n_b)) {
        throw ValidationError("co-occurrence counts violate invariants");
    }
    const int x_lo = std::max(0, n_a + n_b - n_t);
    const int x_hi = std::min(n_a, n_b);
    if (n_ab <= x_lo) return 1.0;  // tail over the whole support, incl. n_ab=0

    // Two passes over the tail terms, anchored at the largest log term, so
    // tails near 1e-300 survive and no per-call buffer is needed.
    const double log_denom = log_choose(n_t, n_b);
    auto log_term = [&](int x) {
        return log_choose(n_a, x) + log_choose(n_t - n_a, n_b - x) - log_denom;
    };
    double max_term = -std::numeric_limits<double>::infinity();
    for (int x = n_ab; x <= x_hi; ++x) {
        max_term = std::max(max_term, log_term(x));
    }
    double sum = 0.0;
    for (int x = n_ab; x <= x_hi; ++x) {
        sum += std::exp(log_term(x) - max_term);
    }
    const double p = std::exp(max_term) * sum;
    return std::min(p, 1.0);
}

double bonferroni_threshold(int n_investors, double alpha,
                            BonferroniDenominator denom) {
    if (n_investors < 2) {
        throw ValidationError("bonferroni_threshold needs >= 2 investors");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0, 1)");
    }
    const double n = static_cast<double>(n_investors);
    const double ordered_tests = 9.0 * n * (n - 1.0);
    return denom == BonferroniDenominator::UnorderedPairs
               ? 2.0 * alpha / ordered_tests
               : alpha / ordered_tests;
}

double fdr_threshold(const std::vector<double>& pvalues_ascending,
                     double per_test_alpha) {
    for (std::size_t k = 1; k < pvalues_ascending.size(); ++k) {
        if (pvalues_ascending[k] < pvalues_ascending[k - 1]) {
            throw ValidationError("fdr_threshold requires ascending p-values");
        }
    }
    double threshold = 0.0;
    for (std::size_t k = 0; k < pvalues_ascending.size(); ++k) {
        const double bound = static_cast<double>(k + 1) * per_test_alpha;
        if (pvalues_ascending[k] < bound) threshold = pvalues_ascending[k];
    }
    return threshold;
}

namespace {

// Pairs are sharded dynamically across workers; shard results are merged in
// pair order so the outcome is independent of the worker count.
template <typename PerPair>
void for_all_pairs(std::size_t n, int n_threads, PerPair&& per_pair) {
    std::atomic<std::size_t> next_i{1};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_i.fetch_add(1);
            if (i >= n) break;
            for (std::size_t j = 0; j < i; ++j) per_pair(i, j);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
}

}  // namespace

ValidatedNetwork build_svn(const std::vector<DailyStateSeries>& series,
                           Correction correction, double alpha,
                           BonferroniDenominator denom, int n_threads) {
    if (series.size() < 2) throw ValidationError("build_svn needs >= 2 series");

    std::vector<const DailyStateSeries*> sorted;
    sorted.reserve(series.size());
    for (const auto& s : series) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const DailyStateSeries* a, const DailyStateSeries* b) {
                  return a->investor_id < b->investor_id;
              });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->investor_id == sorted[i - 1]->investor_id) {
            throw ValidationError("duplicate investor series: " +
                                  sorted[i]->investor_id);
        }
    }

    const std::size_t n = sorted.size();
    const double alpha_b =
        bonferroni_threshold(static_cast<int>(n), alpha, denom);

    double threshold = alpha_b;
    std::atomic<std::int64_t> n_tests{0};
    if (correction == Correction::Fdr) {
        // First pass: pool every computed p-value for the step-up rule.
        std::vector<std::vector<double>> per_row(n);
        for_all_pairs(n, n_threads, [&](std::size_t i, std::size_t j) {
            const auto counts = count_cooccurrences(*sorted[j], *sorted[i]);
            for (const auto& c : counts) {
                per_row[i].push_back(
                    hypergeom_pvalue(c.n_t, c.n_a, c.n_b, c.n_ab));
            }
        });
        std::vector<double> pool;
        for (auto& row : per_row) {
            pool.insert(pool.end(), row.begin(), row.end());
        }
        n_tests = static_cast<std::int64_t>(pool.size());
        std::sort(pool.begin(), pool.end());
        threshold = fdr_threshold(pool, alpha_b);
    }

    // Validation pass. Lower-id investor supplies the first state of each
    // combo (sorted[j] for j < i).
    std::vector<std::vector<ValidatedEdge>> row_edges(n);
    std::atomic<std::int64_t> tests_run{0};
    for_all_pairs(n, n_threads, [&](std::size_t i, std::size_t j) {
        const auto counts = count_cooccurrences(*sorted[j], *sorted[i]);
        if (counts.empty()) return;
        ValidatedEdge edge;
        for (const auto& c : counts) {
            const double p = hypergeom_pvalue(c.n_t, c.n_a, c.n_b, c.n_ab);
            tests_run.fetch_add(1, std::memory_order_relaxed);
            const bool validated = correction == Correction::Bonferroni
                                       ? p < threshold
                                       : p <= threshold && threshold > 0.0;
            if (validated) edge.combos.push_back(ValidatedCombo{c, p});
        }
        if (!edge.combos.empty()) {
            edge.investor_i = sorted[j]->investor_id;
            edge.investor_j = sorted[i]->investor_id;
            row_edges[i].push_back(std::move(edge));
        }
    });

    ValidatedNetwork net;
    net.correction = correction;
    net.alpha = alpha;
    net.per_test_alpha = alpha_b;
    net.threshold_used = threshold;
    net.n_investors = static_cast<int>(n);
    net.n_tests = correction == Correction::Fdr ? n_tests.load()
                                                : tests_run.load();

    for (auto& row : row_edges) {
        std::sort(row.begin(), row.end(),
                  [](const ValidatedEdge& a, const ValidatedEdge& b) {
                      return a.investor_i < b.investor_i;
                  });
        for (auto& e : row) net.edges.push_back(std::move(e));
    }
    std::sort(net.edges.begin(), net.edges.end(),
              [](const ValidatedEdge& a, const ValidatedEdge& b) {
                  return a.investor_i != b.investor_i
                             ? a.investor_i < b.investor_i
                             : a.investor_j < b.investor_j;
              });

    std::vector<std::string> nodes;
    for (const auto& e : net.edges) {
        nodes.push_back(e.investor_i);
        nodes.push_back(e.investor_j);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    net.nodes = std::move(nodes);
    return net;
}

std::vector<std::vector<std::string>> connected_components(
    const ValidatedNetwork& net) {
    std::map<std::string, std::size_t> index;
    for (const auto& id : net.nodes) index.emplace(id, index.size());

    std::vector<std::size_t> parent(index.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find =
        [&](std::size_t x) -> std::size_t {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : net.edges) {
        parent[find(index.at(e.investor_i))] = find(index.at(e.investor_j));
    }

    std::map<std::size_t, std::vector<std::string>> groups;
    for (const auto& [id, idx] : index) groups[find(idx)].push_back(id);
    std::vector<std::vector<std::string>> components;
    components.reserve(groups.size());
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end());
        components.push_back(std::move(members));
    }
    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) {
                  return a.size() != b.size() ? a.size() > b.size()
                                              : a.front() < b.front();
              });
    return components;
}

}  // namespace tradeclust
