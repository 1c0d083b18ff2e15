// Command-line front end for the trading-profile clustering pipeline.

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tradeclust/community.hpp"
#include "tradeclust/pipeline.hpp"

namespace tc = tradeclust;

namespace {

std::string resolve_stock(const tc::IngestResult& input,
                          const std::string& requested) {
    if (!requested.empty()) {
        for (const auto& s : input.stock_ids) {
            if (s == requested) return s;
        }
        throw tc::DataError("stock not present in input: " + requested);
    }
    if (input.stock_ids.size() == 1) return input.stock_ids.front();
    throw tc::ValidationError(
        "input holds multiple stocks; pick one with --stock");
}

std::vector<tc::DailyStateSeries> filtered_series(const tc::SeriesFile& file,
                                                  int min_transactions) {
    return tc::filter_active(file.series, min_transactions);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Clusters investors with similar trading profiles from daily "
        "transaction records: Jaccard-based hierarchical clustering plus "
        "hypergeometric validated co-occurrence networks."};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override it");

    // ---- ingest-check ----
    std::string in_path;
    auto* check = app.add_subcommand(
        "ingest-check", "Validate a transactions file and print a summary");
    check->add_option("--input", in_path, "transactions CSV")->required();
    check->callback([&] {
        const auto input = tc::ingest(in_path);
        std::printf("records: %zu\n", input.records.size());
        std::printf("trading days: %d (%s .. %s)\n", input.t_days(),
                    input.dates.front().c_str(), input.dates.back().c_str());
        std::printf("stocks:");
        for (const auto& s : input.stock_ids) std::printf(" %s", s.c_str());
        std::printf("\nzero-volume daily aggregates dropped: %d\n",
                    input.n_zero_dropped);
        if (input.n_unknown_categories > 0) {
            std::printf("warning: %d rows with unknown category labels\n",
                        input.n_unknown_categories);
        }
    });

    // ---- encode ----
    struct {
        std::string input, stock, output;
        double theta = 0.25;
    } enc;
    auto* encode =
        app.add_subcommand("encode", "Transactions to daily trading states");
    encode->add_option("--input", enc.input, "transactions CSV")->required();
    encode->add_option("--stock", enc.stock, "stock to encode");
    encode->add_option("--theta", enc.theta, "state ratio threshold");
    encode->add_option("--output", enc.output, "state series CSV")->required();
    encode->callback([&] {
        const auto input = tc::ingest(enc.input);
        const auto stock = resolve_stock(input, enc.stock);
        const auto series =
            tc::build_state_series(input.records, stock, enc.theta);
        tc::save_series_csv(series, input.t_days(), enc.output);
        std::printf("%zu series for %s over %d days -> %s\n", series.size(),
                    stock.c_str(), input.t_days(), enc.output.c_str());
    });

    // ---- dissim ----
    struct {
        std::string series, output, csv;
        int min_transactions = 5;
        int threads = 0;
    } dis;
    auto* dissim = app.add_subcommand(
        "dissim", "Pairwise Jaccard dissimilarity matrix of profiles");
    dissim->add_option("--series", dis.series, "state series CSV")->required();
    dissim->add_option("--min-transactions", dis.min_transactions,
                       "activity filter");
    dissim->add_option("--threads", dis.threads, "worker threads (0 = auto)");
    dissim->add_option("--output", dis.output, "binary matrix")->required();
    dissim->add_option("--csv", dis.csv, "also write a CSV debug dump");
    dissim->callback([&] {
        const auto file = tc::load_series_csv(dis.series);
        const auto kept = filtered_series(file, dis.min_transactions);
        std::vector<tc::ProfileVector> vectors;
        vectors.reserve(kept.size());
        for (const auto& s : kept) {
            vectors.push_back(tc::ProfileVector::from_series(s, file.t_days));
        }
        tc::RunConfig defaults;
        defaults.n_threads = dis.threads;
        const auto matrix =
            tc::dissimilarity_matrix(vectors, defaults.effective_threads());
        matrix.save_binary(dis.output);
        if (!dis.csv.empty()) matrix.save_csv(dis.csv);
        std::printf("%zu investors, %zu pairs -> %s\n", matrix.size(),
                    matrix.lower_triangle().size(), dis.output.c_str());
    });

    // ---- hclust ----
    struct {
        std::string matrix, output, partition;
        std::string method = "average";
        double cut_threshold = -1.0;
    } hc;
    auto* hclust =
        app.add_subcommand("hclust", "Agglomerative clustering of the matrix");
    hclust->add_option("--matrix", hc.matrix, "binary matrix")->required();
    hclust->add_option("--method", hc.method, "single|average|complete");
    hclust->add_option("--output", hc.output, "dendrogram text file")
        ->required();
    hclust->add_option("--cut", hc.cut_threshold,
                       "also cut at this threshold");
    hclust->add_option("--partition", hc.partition,
                       "partition CSV for --cut");
    hclust->callback([&] {
        const auto matrix = tc::DissimilarityMatrix::load_binary(hc.matrix);
        const auto tree =
            tc::linkage(matrix, tc::parse_linkage_method(hc.method));
        tc::write_file_atomic(hc.output, tc::to_newick(tree));
        std::printf("%d leaves, root height %s -> %s\n", tree.n_leaves,
                    tc::format_double(tree.root_height()).c_str(),
                    hc.output.c_str());
        if (hc.cut_threshold >= 0.0) {
            if (hc.partition.empty()) {
                throw tc::ValidationError("--cut needs --partition");
            }
            const auto part = tc::cut(tree, hc.cut_threshold);
            tc::save_partition_csv(part, hc.partition);
            std::printf("cut at %s: %d clusters -> %s\n",
                        tc::format_double(hc.cut_threshold).c_str(),
                        part.n_clusters, hc.partition.c_str());
        }
    });

    // ---- svn ----
    struct {
        std::string series, edges, nodes, audit;
        std::string correction = "bonferroni";
        std::string denominator = "unordered_pairs";
        double alpha = 0.01;
        int threads = 0;
    } sv;
    auto* svn = app.add_subcommand(
        "svn", "Statistically validated co-occurrence network");
    svn->add_option("--series", sv.series, "state series CSV")->required();
    svn->add_option("--correction", sv.correction, "bonferroni|fdr");
    svn->add_option("--alpha", sv.alpha, "significance level");
    svn->add_option("--denominator", sv.denominator,
                    "unordered_pairs|ordered_pairs");
    svn->add_option("--threads", sv.threads, "worker threads (0 = auto)");
    svn->add_option("--edges", sv.edges, "edge CSV")->required();
    svn->add_option("--nodes", sv.nodes, "node CSV");
    svn->add_option("--audit", sv.audit, "audit CSV");
    svn->callback([&] {
        const auto file = tc::load_series_csv(sv.series);
        tc::RunConfig defaults;
        defaults.n_threads = sv.threads;
        tc::BonferroniDenominator denom;
        if (sv.denominator == "unordered_pairs") {
            denom = tc::BonferroniDenominator::UnorderedPairs;
        } else if (sv.denominator == "ordered_pairs") {
            denom = tc::BonferroniDenominator::OrderedPairs;
        } else {
            throw tc::ValidationError("unknown denominator convention: " +
                                      sv.denominator);
        }
        const auto net = tc::build_svn(
            file.series, tc::parse_correction(sv.correction), sv.alpha, denom,
            defaults.effective_threads());
        tc::save_edges_csv(net, sv.edges);
        if (!sv.nodes.empty()) {
            std::map<std::string, std::string> categories;
            for (const auto& s : file.series) {
                categories[s.investor_id] = s.category;
            }
            tc::save_nodes_csv(net, categories, sv.nodes);
        }
        if (!sv.audit.empty()) tc::save_audit_csv(net, sv.audit);
        std::printf("%zu nodes, %zu edges (threshold %s) -> %s\n",
                    net.nodes.size(), net.edges.size(),
                    tc::format_double(net.threshold_used).c_str(),
                    sv.edges.c_str());
    });

    // ---- communities ----
    struct {
        std::string edges, output;
        std::uint64_t seed = 1;
        int trials = 10;
    } com;
    auto* communities = app.add_subcommand(
        "communities", "Map-equation community detection on an edge list");
    communities->add_option("--edges", com.edges, "edge CSV")->required();
    communities->add_option("--seed", com.seed, "rng seed");
    communities->add_option("--trials", com.trials, "optimizer restarts");
    communities->add_option("--output", com.output, "partition CSV")
        ->required();
    communities->callback([&] {
        const auto file = tc::load_edges_csv(com.edges);
        tc::WeightedGraph g;
        g.node_ids = file.nodes;
        std::map<std::string, int> index;
        for (int i = 0; i < g.n_nodes(); ++i) index[g.node_ids[i]] = i;
        for (const auto& [pair, weight] : file.edges) {
            g.edges.push_back(tc::WeightedEdge{index.at(pair.first),
                                               index.at(pair.second), weight});
        }
        const auto part = tc::infomap_partition(g, com.seed, com.trials);
        tc::save_partition_csv(part, com.output);
        std::printf("%d modules over %d nodes, codelength %s bits -> %s\n",
                    part.n_clusters, g.n_nodes(),
                    tc::format_double(tc::codelength(g, part)).c_str(),
                    com.output.c_str());
    });

    // ---- compare ----
    struct {
        std::string a, b;
        bool restrict_common = false;
    } cmp;
    auto* compare = app.add_subcommand(
        "compare", "Adjusted Rand Index between two partition files");
    compare->add_option("--partition-a", cmp.a, "partition CSV")->required();
    compare->add_option("--partition-b", cmp.b, "partition CSV")->required();
    compare->add_flag("--restrict-to-common", cmp.restrict_common,
                      "compare on the shared element set");
    compare->callback([&] {
        auto pa = tc::load_partition_csv(cmp.a);
        auto pb = tc::load_partition_csv(cmp.b);
        if (cmp.restrict_common) {
            std::vector<std::string> common;
            const auto in_b = pb.label_by_id();
            for (const auto& id : pa.ids) {
                if (in_b.count(id)) common.push_back(id);
            }
            pa = tc::restrict_partition(pa, common);
            pb = tc::restrict_partition(pb, common);
            std::printf("common elements: %zu\n", common.size());
        }
        std::printf("ari %s\n",
                    tc::format_double(tc::adjusted_rand_index(pa, pb)).c_str());
    });

    // ---- sweep ----
    struct {
        std::string tree, reference, output, partition_out;
        double coarse = 0.1;
        double fine = 0.01;
    } sw;
    auto* sweep = app.add_subcommand(
        "sweep", "ARI threshold sweep of a tree against a reference partition");
    sweep->add_option("--tree", sw.tree, "dendrogram text file")->required();
    sweep->add_option("--reference", sw.reference, "reference partition CSV")
        ->required();
    sweep->add_option("--coarse", sw.coarse, "coarse step");
    sweep->add_option("--fine", sw.fine, "fine step");
    sweep->add_option("--output", sw.output, "sweep CSV")->required();
    sweep->add_option("--partition-out", sw.partition_out,
                      "cut the tree at the best threshold");
    sweep->callback([&] {
        const auto tree = tc::parse_newick(tc::read_file(sw.tree));
        const auto reference = tc::load_partition_csv(sw.reference);
        std::vector<std::string> subset;
        {
            std::set<std::string> leaves(tree.leaf_names.begin(),
                                         tree.leaf_names.end());
            for (const auto& id : reference.ids) {
                if (leaves.count(id)) subset.push_back(id);
            }
        }
        if (subset.size() < 2) {
            throw tc::ValidationError(
                "reference shares fewer than 2 elements with the tree");
        }
        auto result =
            tc::ari_sweep(tree, tc::restrict_partition(reference, subset),
                          subset, sw.coarse, sw.fine);
        tc::save_sweep_csv(result, sw.output);
        std::printf("best ari %s at threshold %s (%zu thresholds) -> %s\n",
                    tc::format_double(result.best_ari).c_str(),
                    tc::format_double(result.best_threshold).c_str(),
                    result.thresholds.size(), sw.output.c_str());
        if (!sw.partition_out.empty()) {
            tc::save_partition_csv(tc::cut(tree, result.best_threshold),
                                   sw.partition_out);
        }
    });

    // ---- synth ----
    struct {
        tc::SyntheticConfig config;
        int cohorts = 5;
        int cohort_size = 20;
        std::string sizes_csv;
        std::string output, truth;
    } sy;
    auto* synth = app.add_subcommand(
        "synth", "Generate a planted-cohort synthetic transactions file");
    synth->add_option("--seed", sy.config.seed, "rng seed");
    synth->add_option("--t-days", sy.config.t_days, "trading days");
    synth->add_option("--cohorts", sy.cohorts, "number of cohorts");
    synth->add_option("--cohort-size", sy.cohort_size, "members per cohort");
    synth->add_option("--cohort-sizes", sy.sizes_csv,
                      "comma-separated sizes (overrides the two above)");
    synth->add_option("--noise", sy.config.n_noise_investors,
                      "independent noise investors");
    synth->add_option("--cohort-activity", sy.config.cohort_activity,
                      "member activity probability");
    synth->add_option("--day-rate", sy.config.cohort_day_rate,
                      "fraction of days a cohort is active");
    synth->add_option("--state-noise", sy.config.state_noise,
                      "state corruption probability");
    synth->add_option("--noise-exponent", sy.config.noise_exponent,
                      "power-law exponent of noise activity");
    synth->add_option("--volume-scale", sy.config.volume_scale,
                      "volume magnitude");
    synth->add_option("--stock", sy.config.stock_id, "stock id to emit");
    synth->add_option("--output", sy.output, "transactions CSV")->required();
    synth->add_option("--truth", sy.truth, "ground-truth CSV");
    synth->callback([&] {
        if (!sy.sizes_csv.empty()) {
            sy.config.cohort_sizes.clear();
            std::stringstream ss(sy.sizes_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                sy.config.cohort_sizes.push_back(std::stoi(tok));
            }
        } else {
            sy.config.cohort_sizes.assign(static_cast<std::size_t>(sy.cohorts),
                                          sy.cohort_size);
        }
        const auto [records, truth] = tc::generate(sy.config);
        tc::save_transactions_csv(records,
                                  tc::default_dates(sy.config.t_days),
                                  sy.output);
        if (!sy.truth.empty()) tc::save_ground_truth_csv(truth, sy.truth);
        std::printf("%zu records, %zu cohort members, %d noise -> %s\n",
                    records.size(), truth.planted.size(),
                    sy.config.n_noise_investors, sy.output.c_str());
    });

    // ---- heatmap ----
    struct {
        std::string partition, series, csv, ppm;
    } hm;
    auto* heatmap = app.add_subcommand(
        "heatmap", "Trading-profile grid for a partition of investors");
    heatmap->add_option("--partition", hm.partition, "partition CSV")
        ->required();
    heatmap->add_option("--series", hm.series, "state series CSV")->required();
    heatmap->add_option("--csv", hm.csv, "grid CSV output");
    heatmap->add_option("--ppm", hm.ppm, "portable pixmap output");
    heatmap->callback([&] {
        if (hm.csv.empty() && hm.ppm.empty()) {
            throw tc::ValidationError("pick at least one of --csv/--ppm");
        }
        const auto part = tc::load_partition_csv(hm.partition);
        const auto file = tc::load_series_csv(hm.series);
        const auto covered = part.label_by_id();
        std::vector<tc::DailyStateSeries> rows;
        for (const auto& s : file.series) {
            if (covered.count(s.investor_id)) rows.push_back(s);
        }
        const auto grid = tc::make_heatmap(part, rows, file.t_days);
        if (!hm.csv.empty()) tc::save_heatmap_csv(grid, hm.csv);
        if (!hm.ppm.empty()) tc::save_heatmap_ppm(grid, hm.ppm);
        std::printf("%zu investors x %d days\n", grid.investor_ids.size(),
                    grid.t_days);
    });

    // ---- pipeline ----
    tc::RunConfig run;
    std::string correction = "bonferroni";
    std::string linkage_name = "average";
    std::string denominator = "unordered_pairs";
    auto* pipeline =
        app.add_subcommand("pipeline", "Full per-stock analysis run");
    pipeline->add_option("--input", run.input_path, "transactions CSV")
        ->required();
    pipeline->add_option("--output", run.output_dir, "output directory")
        ->required();
    pipeline->add_option("--theta", run.theta, "state ratio threshold");
    pipeline->add_option("--min-transactions", run.min_transactions,
                         "similarity-branch activity filter");
    pipeline->add_option("--alpha", run.alpha, "significance level");
    pipeline->add_option("--correction", correction, "bonferroni|fdr");
    pipeline->add_option("--linkage", linkage_name,
                         "single|average|complete");
    pipeline->add_option("--coarse-step", run.coarse_step, "sweep coarse step");
    pipeline->add_option("--fine-step", run.fine_step, "sweep fine step");
    pipeline->add_option("--infomap-seed", run.infomap_seed, "rng seed");
    pipeline->add_option("--infomap-trials", run.infomap_trials,
                         "optimizer restarts");
    pipeline->add_option("--denominator", denominator,
                         "unordered_pairs|ordered_pairs");
    pipeline->add_option("--threads", run.n_threads,
                         "worker threads (0 = auto)");
    pipeline->callback([&] {
        run.correction = tc::parse_correction(correction);
        run.linkage_method = tc::parse_linkage_method(linkage_name);
        if (denominator == "unordered_pairs") {
            run.bonferroni_denominator =
                tc::BonferroniDenominator::UnorderedPairs;
        } else if (denominator == "ordered_pairs") {
            run.bonferroni_denominator =
                tc::BonferroniDenominator::OrderedPairs;
        } else {
            throw tc::ValidationError("unknown denominator convention: " +
                                      denominator);
        }
        const auto manifest = tc::run_pipeline(run);
        std::printf("manifest: %s\n", manifest.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const tc::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const tc::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
