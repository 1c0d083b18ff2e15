#include "tradeclust/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

namespace tradeclust {

namespace {

// Pair-count bookkeeping shared by the dense and hashed contingency paths.
double ari_from_counts(std::int64_t index, std::int64_t sum_rows,
                       std::int64_t sum_cols, std::int64_t n) {
    const std::int64_t total = n * (n - 1) / 2;
    if (total == 0) return 1.0;  // single element: identical by definition
    const long double expected =
        static_cast<long double>(sum_rows) * sum_cols / total;
    const long double max_index =
        (static_cast<long double>(sum_rows) + sum_cols) / 2.0L;
    const long double denom = max_index - expected;
    if (denom == 0.0L) return 1.0;  // both trivial in the same way
    return static_cast<double>((index - expected) / denom);
}

}  // namespace

double adjusted_rand_index(const Partition& p1, const Partition& p2) {
    if (p1.size() != p2.size()) {
        throw ValidationError("ARI needs identical element sets");
    }
    const std::size_t n = p1.size();

    // Align p2's labels to p1's element order; identical id vectors (the
    // common case in sweeps and enumerations) need no lookup table.
    std::vector<int> aligned;
    const std::vector<int>* labels2 = &p2.labels;
    if (p1.ids != p2.ids) {
        const auto by_id = p2.label_by_id();
        aligned.reserve(n);
        for (const auto& id : p1.ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw ValidationError(
                    "ARI element missing from second partition: " + id);
            }
            aligned.push_back(it->second);
        }
        labels2 = &aligned;
    }

    int k1 = 0;
    int k2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p1.labels[i] < 0 || (*labels2)[i] < 0) {
            throw ValidationError("ARI labels must be nonnegative");
        }
        k1 = std::max(k1, p1.labels[i] + 1);
        k2 = std::max(k2, (*labels2)[i] + 1);
    }

    auto choose2 = [](std::int64_t k) { return k * (k - 1) / 2; };
    std::int64_t index = 0;
    std::int64_t sum_rows = 0;
    std::int64_t sum_cols = 0;
    const std::size_t cells =
        static_cast<std::size_t>(k1) * static_cast<std::size_t>(k2);
    if (cells <= 4096 || cells <= 4 * n) {
        std::vector<std::int64_t> cell(cells, 0);
        std::vector<std::int64_t> row(static_cast<std::size_t>(k1), 0);
        std::vector<std::int64_t> col(static_cast<std::size_t>(k2), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(p1.labels[i]);
            const auto v = static_cast<std::size_t>((*labels2)[i]);
            ++cell[u * static_cast<std::size_t>(k2) + v];
            ++row[u];
            ++col[v];
        }
        for (std::int64_t c : cell) index += choose2(c);
        for (std::int64_t a : row) sum_rows += choose2(a);
        for (std::int64_t b : col) sum_cols += choose2(b);
    } else {
        std::unordered_map<std::int64_t, std::int64_t> cell;
        std::vector<std::int64_t> row(static_cast<std::size_t>(k1), 0);
        std::vector<std::int64_t> col(static_cast<std::size_t>(k2), 0);
        cell.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int u = p1.labels[i];
            const int v = (*labels2)[i];
            ++cell[static_cast<std::int64_t>(u) * k2 + v];
            ++row[static_cast<std::size_t>(u)];
            ++col[static_cast<std::size_t>(v)];
        }
        for (const auto& [_, c] : cell) index += choose2(c);
        for (std::int64_t a : row) sum_rows += choose2(a);
        for (std::int64_t b : col) sum_cols += choose2(b);
    }
    return ari_from_counts(index, sum_rows, sum_cols,
                           static_cast<std::int64_t>(n));
}

Partition restrict_partition(const Partition& p,
                             const std::vector<std::string>& subset) {
    std::unordered_set<std::string> wanted(subset.begin(), subset.end());
    if (wanted.size() != subset.size()) {
        throw ValidationError("restriction subset contains duplicates");
    }
    Partition out;
    out.ids.reserve(wanted.size());
    out.labels.reserve(wanted.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (wanted.erase(p.ids[i]) > 0) {
            out.ids.push_back(p.ids[i]);
            out.labels.push_back(p.labels[i]);
        }
    }
    if (!wanted.empty()) {
        throw ValidationError("restriction subset element not in partition: " +
                              *wanted.begin());
    }
    out.compact();
    return out;
}

SweepResult ari_sweep(const Dendrogram& tree, const Partition& reference,
                      const std::vector<std::string>& subset,
                      double coarse_step, double fine_step) {
    if (!(fine_step > 0.0) || fine_step > coarse_step) {
        throw ValidationError("need 0 < fine_step <= coarse_step");
    }
    SweepResult result;
    auto evaluate = [&](double t) {
        const double ari =
            adjusted_rand_index(restrict_partition(cut(tree, t), subset),
                                reference);
        result.thresholds.push_back(t);
        result.ari_values.push_back(ari);
        return ari;
    };

    // Coarse pass over the full dissimilarity range.
    const double reach = std::max(tree.root_height(), std::sqrt(2.0));
    double best_coarse_t = 0.0;
    double best_coarse = -2.0;
    for (int k = 0;; ++k) {
        const double t = k * coarse_step;
        const double ari = evaluate(t);
        if (ari > best_coarse) {
            best_coarse = ari;
            best_coarse_t = t;
        }
        if (t > reach) break;
    }

    // Fine pass around the coarse maximizer.
    result.best_threshold = best_coarse_t;
    result.best_ari = best_coarse;
    const double lo = std::max(0.0, best_coarse_t - coarse_step);
    const double hi = best_coarse_t + coarse_step;
    for (int m = 0;; ++m) {
        const double t = lo + m * fine_step;
        if (t > hi + fine_step * 1e-9) break;
        const double ari = evaluate(t);
        if (ari > result.best_ari) {
            result.best_ari = ari;
            result.best_threshold = t;
        }
    }
    return result;
}

SizeDistribution cluster_size_distribution(const Partition& p) {
    std::vector<int> sizes(static_cast<std::size_t>(p.n_clusters), 0);
    for (int label : p.labels) ++sizes[static_cast<std::size_t>(label)];
    SizeDistribution dist;
    for (int s : sizes) ++dist.counts[s];
    for (const auto& [size, count] : dist.counts) {
        dist.density[size] =
            static_cast<double>(count) / static_cast<double>(p.n_clusters);
    }
    return dist;
}

}  // namespace tradeclust
