// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and thresholds are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tradeclust/pipeline.hpp"

namespace tc = tradeclust;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    std::string name;
    std::function<bool(std::string&)> run;
};

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
}

#define EXPECT(cond, detailvar, ...)                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            char buf_[512];                                            \
            std::snprintf(buf_, sizeof(buf_), __VA_ARGS__);            \
            (detailvar) += std::string("; ") + buf_;                   \
            ok = false;                                                \
        }                                                              \
    } while (0)

// ---------------------------------------------------------------------- 1
bool criterion_hypergeom(std::string& detail) {
    bool ok = true;
    long checked = 0;
    double worst = 0.0;
    for (int n_t = 1; n_t <= 25; ++n_t) {
        for (int n_a = 0; n_a <= n_t; ++n_a) {
            for (int n_b = 0; n_b <= n_t; ++n_b) {
                const int lo = std::max(0, n_a + n_b - n_t);
                const int hi = std::min(n_a, n_b);
                for (int n_ab = lo; n_ab <= hi; ++n_ab) {
                    const double got =
                        tc::hypergeom_pvalue(n_t, n_a, n_b, n_ab);
                    const double want = static_cast<double>(
                        oracles::hypergeom_survival_exact(n_t, n_a, n_b,
                                                          n_ab));
                    const double rel =
                        std::abs(got - want) / std::max(want, 1e-300);
                    worst = std::max(worst, rel);
                    ++checked;
                }
            }
        }
    }
    EXPECT(worst <= 1e-12, detail,
           "worst relative error %.3e exceeds 1e-12", worst);

    const double p10 = tc::hypergeom_pvalue(5, 3, 3, 3);
    const double p6 = tc::hypergeom_pvalue(4, 2, 2, 2);
    EXPECT(std::abs(p10 - 0.1) <= 1e-15, detail, "p(5,3,3,3) = %.17g", p10);
    EXPECT(std::abs(p6 - 1.0 / 6.0) <= 1e-15, detail, "p(4,2,2,2) = %.17g",
           p6);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%ld tuples, worst rel err %.2e", checked,
                  worst);
    detail = buf + detail;
    return ok;
}

// ---------------------------------------------------------------------- 2
bool criterion_linkage(std::string& detail) {
    bool ok = true;
    tc::Rng rng(20240202);
    int matrices = 0;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_u64(46));  // <= 50
        std::vector<std::vector<double>> dense(
            static_cast<std::size_t>(n),
            std::vector<double>(static_cast<std::size_t>(n), 0.0));
        std::vector<std::string> ids;
        std::vector<double> tri;
        for (int i = 0; i < n; ++i) ids.push_back("L" + std::to_string(i));
        for (int i = 1; i < n; ++i) {
            for (int j = 0; j < i; ++j) {
                const double v = 0.01 + rng.uniform_real();
                dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    v;
                dense[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                    v;
                tri.push_back(v);
            }
        }
        const tc::DissimilarityMatrix matrix(ids, tri);
        ++matrices;
        for (auto method :
             {tc::LinkageMethod::Single, tc::LinkageMethod::Average,
              tc::LinkageMethod::Complete}) {
            const auto tree = tc::linkage(matrix, method);
            const auto naive = oracles::naive_linkage(dense, method);

            std::vector<double> got;
            for (const auto& m : tree.merges) got.push_back(m.height);
            auto want = naive.heights;
            std::sort(got.begin(), got.end());
            std::sort(want.begin(), want.end());
            for (std::size_t k = 0; k < got.size() && ok; ++k) {
                EXPECT(std::abs(got[k] - want[k]) <= 1e-12, detail,
                       "trial %d method %s merge %zu: height %.17g vs %.17g",
                       trial, tc::linkage_method_name(method), k, got[k],
                       want[k]);
            }
            for (int c = 0; c < 20 && ok; ++c) {
                const double thr = rng.uniform_real() * 1.2;
                const auto cut_got =
                    oracles::canonical_clusters(tc::cut(tree, thr).labels);
                const auto cut_want = oracles::naive_cut(naive, n, thr);
                EXPECT(cut_got == cut_want, detail,
                       "trial %d method %s: cut mismatch at %.6f", trial,
                       tc::linkage_method_name(method), thr);
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "%d matrices x 3 linkages x 20 thresholds", matrices);
    detail = buf + detail;
    return ok;
}

// ---------------------------------------------------------------------- 3
bool criterion_ari(std::string& detail) {
    bool ok = true;
    long pairs = 0;
    for (int n = 1; n <= 8 && ok; ++n) {
        std::vector<std::vector<int>> all;
        oracles::enumerate_partitions(
            n, [&](const std::vector<int>& l) { all.push_back(l); });
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i) ids.push_back("e" + std::to_string(i));
        std::vector<tc::Partition> parts;
        parts.reserve(all.size());
        for (const auto& labels : all) {
            tc::Partition p;
            p.ids = ids;
            p.labels = labels;
            p.compact();
            parts.push_back(std::move(p));
        }
        for (std::size_t a = 0; a < parts.size() && ok; ++a) {
            for (std::size_t b = 0; b < parts.size(); ++b) {
                const double got =
                    tc::adjusted_rand_index(parts[a], parts[b]);
                const double want =
                    oracles::ari_pair_counting(all[a], all[b]);
                ++pairs;
                if (std::abs(got - want) > 1e-12) {
                    EXPECT(false, detail, "n=%d pair (%zu,%zu): %.17g vs %.17g",
                           n, a, b, got, want);
                    break;
                }
                if (a == b && got != 1.0) {
                    EXPECT(false, detail, "identical partition ARI %.17g",
                           got);
                    break;
                }
            }
        }
    }

    // Chance correction: 1,000 label shuffles of 5 x 20 elements.
    std::vector<int> base(100);
    for (int i = 0; i < 100; ++i) base[static_cast<std::size_t>(i)] = i / 20;
    std::vector<std::string> ids;
    for (int i = 0; i < 100; ++i) ids.push_back("e" + std::to_string(i));
    tc::Partition ref;
    ref.ids = ids;
    ref.labels = base;
    ref.compact();
    tc::Rng rng(777);
    double sum = 0.0;
    for (int s = 0; s < 1000; ++s) {
        auto shuffled = base;
        rng.shuffle(shuffled);
        tc::Partition p;
        p.ids = ids;
        p.labels = shuffled;
        p.compact();
        sum += tc::adjusted_rand_index(ref, p);
    }
    const double mean = sum / 1000.0;
    EXPECT(std::abs(mean) <= 0.02, detail, "null shuffle mean %.5f", mean);

    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "%ld partition pairs, null mean %.4f", pairs, mean);
    detail = buf + detail;
    return ok;
}

// ---------------------------------------------------------------------- 4
bool criterion_infomap(std::string& detail) {
    bool ok = true;
    struct Fixture {
        std::string name;
        tc::WeightedGraph g;
    };
    std::vector<Fixture> fixtures;
    auto graph = [](int n, std::vector<tc::WeightedEdge> edges) {
        tc::WeightedGraph g;
        for (int i = 0; i < n; ++i) {
            g.node_ids.push_back("n" + std::to_string(i));
        }
        g.edges = std::move(edges);
        return g;
    };
    {
        std::vector<tc::WeightedEdge> edges;
        for (int base : {0, 5}) {
            for (int i = 0; i < 5; ++i) {
                for (int j = i + 1; j < 5; ++j) {
                    edges.push_back({base + i, base + j, 1});
                }
            }
        }
        edges.push_back({4, 5, 1});
        fixtures.push_back({"two-clique bridge", graph(10, edges)});
    }
    {
        std::vector<tc::WeightedEdge> edges;
        for (int i = 0; i < 8; ++i) edges.push_back({i, (i + 1) % 8, 1});
        fixtures.push_back({"ring8", graph(8, edges)});
    }
    {
        std::vector<tc::WeightedEdge> edges;
        for (int i = 1; i < 7; ++i) edges.push_back({0, i, 1});
        fixtures.push_back({"star7", graph(7, edges)});
    }
    tc::Rng rng(20240404);
    for (int r = 0; r < 5; ++r) {
        const int n = 8 + static_cast<int>(rng.uniform_u64(3));  // 8..10
        std::vector<tc::WeightedEdge> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng.bernoulli(0.35)) {
                    edges.push_back(
                        {i, j, 1 + static_cast<int>(rng.uniform_u64(3))});
                }
            }
        }
        fixtures.push_back({"random" + std::to_string(n) + "#" +
                                std::to_string(r),
                            graph(n, edges)});
    }

    for (const auto& fx : fixtures) {
        double best = std::numeric_limits<double>::infinity();
        oracles::enumerate_partitions(
            fx.g.n_nodes(), [&](const std::vector<int>& labels) {
                tc::Partition p;
                p.ids = fx.g.node_ids;
                p.labels = labels;
                p.compact();
                best = std::min(best, tc::codelength(fx.g, p));
            });
        const auto found = tc::infomap_partition(fx.g, 11, 10);
        const double got = tc::codelength(fx.g, found);
        EXPECT(got <= best + 1e-9, detail,
               "%s: codelength %.12f vs optimum %.12f", fx.name.c_str(), got,
               best);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu fixtures vs exhaustive optimum",
                  fixtures.size());
    detail = buf + detail;
    return ok;
}

// ---------------------------------------------------------------------- 5
bool criterion_null_model(std::string& detail) {
    bool ok = true;
    int empty_runs = 0;
    int total_false_edges = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        tc::SyntheticConfig config;
        config.cohort_sizes = {};
        config.n_noise_investors = 100;
        config.seed = seed;
        const auto [records, truth] = tc::generate(config);
        const auto series =
            tc::build_state_series(records, config.stock_id, 0.25);
        const auto net =
            tc::build_svn(series, tc::Correction::Bonferroni, 0.01);
        empty_runs += net.edges.empty();
        total_false_edges += static_cast<int>(net.edges.size());
    }
    EXPECT(empty_runs >= 95, detail, "only %d/100 empty networks",
           empty_runs);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d/100 empty, %d false edges total",
                  empty_runs, total_false_edges);
    detail = buf + detail;
    return ok;
}

// ------------------------------------------------------------------- 6 & 7
struct RecoveryOutcome {
    int svn_ok = 0;       // seeds with SVN+infomap ARI >= 0.90
    int sweep_ok = 0;     // seeds with sweep-cut ARI >= 0.85 and coverage
    int containment_ok = 0;
    int sweep_shape_ok = 0;
    std::string worst;
};

RecoveryOutcome run_recovery() {
    RecoveryOutcome out;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        tc::SyntheticConfig config;  // spec defaults: 5 x 20 + 500 noise
        config.seed = seed;
        const auto [records, truth] = tc::generate(config);
        const auto series =
            tc::build_state_series(records, config.stock_id, 0.25);

        // SVN branch on the unfiltered set.
        const auto net =
            tc::build_svn(series, tc::Correction::Bonferroni, 0.01,
                          tc::BonferroniDenominator::UnorderedPairs, 2);
        const auto graph = tc::WeightedGraph::from_network(net);
        tc::Partition communities;
        double svn_ari = 0.0;
        if (!net.nodes.empty()) {
            communities = tc::infomap_partition(graph, 1, 10);
            std::vector<std::string> members_in_net;
            const std::set<std::string> nodes(net.nodes.begin(),
                                              net.nodes.end());
            for (const auto& id : truth.planted.ids) {
                if (nodes.count(id)) members_in_net.push_back(id);
            }
            if (members_in_net.size() >= 2) {
                svn_ari = tc::adjusted_rand_index(
                    tc::restrict_partition(communities, members_in_net),
                    tc::restrict_partition(truth.planted, members_in_net));
            }
        }
        out.svn_ok += svn_ari >= 0.90;

        // Similarity branch: average linkage over the filtered set.
        const auto filtered = tc::filter_active(series, 5);
        std::vector<tc::ProfileVector> vectors;
        for (const auto& s : filtered) {
            vectors.push_back(
                tc::ProfileVector::from_series(s, config.t_days));
        }
        const auto matrix = tc::dissimilarity_matrix(vectors, 2);
        const auto tree = tc::linkage(matrix, tc::LinkageMethod::Average);

        // Reference partition: network communities restricted to leaves.
        std::vector<std::string> subset;
        {
            const std::set<std::string> leaves(tree.leaf_names.begin(),
                                               tree.leaf_names.end());
            for (const auto& id : net.nodes) {
                if (leaves.count(id)) subset.push_back(id);
            }
        }
        double sweep_ari = 0.0;
        double coverage = 0.0;
        bool shape_ok = false;
        if (subset.size() >= 2) {
            const auto reference =
                tc::restrict_partition(communities, subset);
            const auto sweep = tc::ari_sweep(tree, reference, subset, 0.1,
                                             0.01);
            const auto combined = tc::cut(tree, sweep.best_threshold);

            // Criterion 7: the coarse-then-fine best equals the full fine
            // grid's maximum at 0.01 resolution.
            double full_best = -2.0;
            for (int k = 0;; ++k) {
                const double t = 0.01 * k;
                full_best = std::max(
                    full_best,
                    tc::adjusted_rand_index(
                        tc::restrict_partition(tc::cut(tree, t), subset),
                        reference));
                if (t > std::sqrt(2.0) + 0.01) break;
            }
            shape_ok = sweep.best_ari >= full_best - 1e-12;

            // Recovery of the planted cohorts by the combined partition.
            std::vector<std::string> members_in_cut;
            const std::set<std::string> leaves(tree.leaf_names.begin(),
                                               tree.leaf_names.end());
            for (const auto& id : truth.planted.ids) {
                if (leaves.count(id)) members_in_cut.push_back(id);
            }
            coverage = static_cast<double>(members_in_cut.size()) /
                       static_cast<double>(truth.planted.size());
            if (members_in_cut.size() >= 2) {
                sweep_ari = tc::adjusted_rand_index(
                    tc::restrict_partition(combined, members_in_cut),
                    tc::restrict_partition(truth.planted, members_in_cut));
            }
        }
        out.sweep_ok += sweep_ari >= 0.85 && coverage >= 0.95;
        out.sweep_shape_ok += shape_ok;

        // Containment: FDR node set contains the Bonferroni node set.
        const auto fdr =
            tc::build_svn(series, tc::Correction::Fdr, 0.01,
                          tc::BonferroniDenominator::UnorderedPairs, 2);
        const std::set<std::string> fdr_nodes(fdr.nodes.begin(),
                                              fdr.nodes.end());
        bool contained = true;
        for (const auto& id : net.nodes) contained &= fdr_nodes.count(id) > 0;
        out.containment_ok += contained;

        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "seed %llu: svn_ari %.3f sweep_ari %.3f coverage %.3f",
                      static_cast<unsigned long long>(seed), svn_ari,
                      sweep_ari, coverage);
        out.worst = buf;  // last seed's numbers; details go to stdout below
        std::printf("       %s\n", buf);
    }
    return out;
}

// ---------------------------------------------------------------------- 8
bool criterion_performance(std::string& detail) {
    bool ok = true;
    const int n = 8000;
    const int t_days = 253;  // 759 bits
    std::vector<tc::ProfileVector> vectors;
    vectors.reserve(static_cast<std::size_t>(n));
    tc::Rng rng(4242);
    for (int i = 0; i < n; ++i) {
        tc::ProfileVector v("p" + std::to_string(i), t_days);
        const int n_days = 5 + static_cast<int>(rng.uniform_u64(60));
        for (int k = 0; k < n_days; ++k) {
            const auto day =
                rng.uniform_u64(static_cast<std::uint64_t>(t_days));
            const auto slot = rng.uniform_u64(3);
            v.set_bit(static_cast<std::size_t>(slot) * t_days + day);
        }
        vectors.push_back(std::move(v));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto m4 = tc::dissimilarity_matrix(vectors, 4);
    const double t_parallel = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    const auto m1 = tc::dissimilarity_matrix(vectors, 1);
    const double t_single = seconds_since(t1);

    EXPECT(t_parallel < 60.0, detail, "4-thread run took %.1f s", t_parallel);
    EXPECT(t_single < 240.0, detail, "single-thread run took %.1f s",
           t_single);
    EXPECT(m1.lower_triangle() == m4.lower_triangle(), detail,
           "outputs differ across worker counts");

    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "32M pairs: %.2f s on 4 threads, %.2f s on 1", t_parallel,
                  t_single);
    detail = buf + detail;
    return ok;
}

// ---------------------------------------------------------------------- 9
bool criterion_determinism(std::string& detail) {
    bool ok = true;
    const fs::path base = fs::path("acceptance_tmp_determinism");
    fs::remove_all(base);
    fs::create_directories(base);

    tc::SyntheticConfig synth;
    synth.t_days = 120;
    synth.cohort_sizes = {10, 10, 10};
    synth.n_noise_investors = 100;
    synth.seed = 9;
    const auto [records, truth] = tc::generate(synth);
    const std::string input = (base / "tx.csv").string();
    tc::save_transactions_csv(records, tc::default_dates(synth.t_days),
                              input);

    tc::RunConfig config;
    config.input_path = input;
    config.output_dir = (base / "out").string();
    config.infomap_seed = 5;
    config.n_threads = 2;

    auto slurp = [&]() {
        std::map<std::string, std::string> bytes;
        for (const auto& entry :
             fs::recursive_directory_iterator(config.output_dir)) {
            if (entry.is_regular_file()) {
                bytes[entry.path().lexically_relative(config.output_dir)
                          .string()] = tc::read_file(entry.path().string());
            }
        }
        return bytes;
    };

    tc::run_pipeline(config);
    const auto first = slurp();
    tc::run_pipeline(config);
    const auto second = slurp();

    EXPECT(first.size() == second.size(), detail,
           "output file sets differ: %zu vs %zu", first.size(),
           second.size());
    int diffs = 0;
    for (const auto& [name, content] : first) {
        const auto it = second.find(name);
        if (it == second.end() || it->second != content) {
            ++diffs;
            EXPECT(false, detail, "output differs across reruns: %s",
                   name.c_str());
            break;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%zu output files byte-identical",
                  first.size());
    detail = buf + detail;
    fs::remove_all(base);
    return ok;
}

}  // namespace

int main() {
    RecoveryOutcome recovery;
    bool recovery_ran = false;

    std::vector<Criterion> criteria{
        {1, "hypergeometric oracle", criterion_hypergeom},
        {2, "linkage oracle", criterion_linkage},
        {3, "ari oracle", criterion_ari},
        {4, "infomap small-instance optimality", criterion_infomap},
        {5, "null-model false-positive control", criterion_null_model},
        {6, "planted-cohort recovery",
         [&](std::string& detail) {
             if (!recovery_ran) {
                 recovery = run_recovery();
                 recovery_ran = true;
             }
             bool ok = true;
             EXPECT(recovery.svn_ok >= 9, detail,
                    "svn+infomap ARI >= 0.90 on %d/10 seeds",
                    recovery.svn_ok);
             EXPECT(recovery.sweep_ok >= 10, detail,
                    "sweep cut ARI/coverage ok on %d/10 seeds",
                    recovery.sweep_ok);
             EXPECT(recovery.containment_ok >= 10, detail,
                    "FDR containment on %d/10 seeds",
                    recovery.containment_ok);
             char buf[128];
             std::snprintf(buf, sizeof(buf),
                           "svn %d/10, sweep %d/10, containment %d/10",
                           recovery.svn_ok, recovery.sweep_ok,
                           recovery.containment_ok);
             detail = buf + detail;
             return ok;
         }},
        {7, "sweep finds the fine-grid maximum",
         [&](std::string& detail) {
             if (!recovery_ran) {
                 recovery = run_recovery();
                 recovery_ran = true;
             }
             bool ok = true;
             EXPECT(recovery.sweep_shape_ok >= 10, detail,
                    "coarse-then-fine matched the full grid on %d/10 seeds",
                    recovery.sweep_shape_ok);
             char buf[64];
             std::snprintf(buf, sizeof(buf), "%d/10 seeds",
                           recovery.sweep_shape_ok);
             detail = buf + detail;
             return ok;
         }},
        {8, "pairwise kernel performance", criterion_performance},
        {9, "pipeline determinism", criterion_determinism},
    };

    int failures = 0;
    for (auto& criterion : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail += std::string("; exception: ") + e.what();
        }
        const double dt = seconds_since(t0);
        std::printf("[%s] criterion %d: %s (%s) [%.1f s]\n",
                    ok ? "PASS" : "FAIL", criterion.number,
                    criterion.name.c_str(), detail.c_str(), dt);
        std::fflush(stdout);
        failures += !ok;
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
