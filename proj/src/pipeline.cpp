#include "tradeclust/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <thread>

#include <json.hpp>

namespace tradeclust {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

int RunConfig::effective_threads() const {
    if (n_threads > 0) return n_threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void RunConfig::validate() const {
    if (!(theta > 0.0) || !(theta < 1.0)) {
        throw ValidationError("theta must lie in (0, 1)");
    }
    if (min_transactions < 1) {
        throw ValidationError("min_transactions must be >= 1");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0, 1)");
    }
    if (!(fine_step > 0.0) || fine_step > coarse_step) {
        throw ValidationError("need 0 < fine_step <= coarse_step");
    }
    if (infomap_trials < 1) {
        throw ValidationError("infomap_trials must be >= 1");
    }
    if (n_threads < 0) throw ValidationError("n_threads must be >= 0");
    if (input_path.empty()) throw ValidationError("input path required");
    if (output_dir.empty()) throw ValidationError("output dir required");
}

namespace {

std::string digest_hex(const std::string& path) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_file(path)));
    return buf;
}

// Tracks files written for one stock so a failing stage can take its
// partial outputs down with it.
struct StockOutputs {
    fs::path dir;
    std::vector<std::string> files;  // relative to dir

    std::string path(const std::string& name) {
        files.push_back(name);
        return (dir / name).string();
    }

    void remove_all() {
        for (const auto& name : files) {
            std::error_code ec;
            fs::remove(dir / name, ec);
        }
    }

    ordered_json digests(const std::string& stock) const {
        ordered_json out = ordered_json::object();
        for (const auto& name : files) {
            out[stock + "/" + name] = digest_hex((dir / name).string());
        }
        return out;
    }
};

ordered_json config_json(const RunConfig& c) {
    ordered_json j = ordered_json::object();
    j["theta"] = c.theta;
    j["min_transactions"] = c.min_transactions;
    j["alpha"] = c.alpha;
    j["correction"] = correction_name(c.correction);
    j["linkage"] = linkage_method_name(c.linkage_method);
    j["coarse_step"] = c.coarse_step;
    j["fine_step"] = c.fine_step;
    j["infomap_seed"] = c.infomap_seed;
    j["infomap_trials"] = c.infomap_trials;
    j["bonferroni_denominator"] =
        c.bonferroni_denominator == BonferroniDenominator::UnorderedPairs
            ? "unordered_pairs"
            : "ordered_pairs";
    j["n_threads"] = c.n_threads;
    j["input_path"] = c.input_path;
    j["output_dir"] = c.output_dir;
    return j;
}

struct StageGuard {
    const char* stage;
    const std::string& stock;

    [[noreturn]] void rethrow(const std::exception& e) const {
        throw DataError("stage '" + std::string(stage) + "' failed for stock " +
                        stock + ": " + e.what());
    }
};

ordered_json process_stock(const RunConfig& config, const IngestResult& input,
                           const std::string& stock, StockOutputs& outputs) {
    ordered_json report = ordered_json::object();
    const int threads = config.effective_threads();
    const char* stage = "encode";
    try {
        // Encode: unfiltered series feed the SVN, filtered ones the
        // similarity branch.
        const auto series =
            build_state_series(input.records, stock, config.theta);
        if (series.empty()) {
            report["skipped"] = "no state series";
            return report;
        }
        save_series_csv(series, input.t_days(), outputs.path("series.csv"));
        const auto filtered = filter_active(series, config.min_transactions);
        report["n_investors"] = series.size();
        report["n_filtered"] = filtered.size();

        std::map<std::string, std::string> categories;
        for (const auto& s : series) categories[s.investor_id] = s.category;

        stage = "profiles";
        bool have_tree = false;
        Dendrogram tree;
        if (filtered.size() >= 2) {
            std::vector<ProfileVector> vectors;
            vectors.reserve(filtered.size());
            for (const auto& s : filtered) {
                vectors.push_back(
                    ProfileVector::from_series(s, input.t_days()));
            }
            const auto matrix = dissimilarity_matrix(vectors, threads);
            matrix.save_binary(outputs.path("matrix.bin"));

            stage = "hclust";
            tree = linkage(matrix, config.linkage_method);
            write_file_atomic(outputs.path("dendrogram.nwk"),
                              to_newick(tree));
            have_tree = true;
        } else {
            report["similarity_skipped"] =
                "fewer than 2 investors pass the activity filter";
        }

        stage = "svn";
        const auto net =
            build_svn(series, config.correction, config.alpha,
                      config.bonferroni_denominator, threads);
        save_edges_csv(net, outputs.path("svn_edges.csv"));
        save_nodes_csv(net, categories, outputs.path("svn_nodes.csv"));
        save_audit_csv(net, outputs.path("svn_audit.csv"));
        const auto components = connected_components(net);
        {
            ordered_json svn = ordered_json::object();
            svn["n_nodes"] = net.nodes.size();
            svn["n_edges"] = net.edges.size();
            svn["per_test_alpha"] = net.per_test_alpha;
            svn["threshold_used"] = net.threshold_used;
            svn["n_tests"] = net.n_tests;
            ordered_json sizes = ordered_json::array();
            for (const auto& comp : components) sizes.push_back(comp.size());
            svn["component_sizes"] = std::move(sizes);
            report["svn"] = std::move(svn);
        }

        stage = "communities";
        Partition reference;
        if (!net.nodes.empty()) {
            const auto graph = WeightedGraph::from_network(net);
            reference = infomap_partition(graph, config.infomap_seed,
                                          config.infomap_trials);
            save_partition_csv(reference, outputs.path("communities.csv"));
            save_size_distribution_csv(
                cluster_size_distribution(reference),
                outputs.path("cluster_sizes_svn.csv"));
            ordered_json im = ordered_json::object();
            im["codelength"] = codelength(graph, reference);
            im["n_modules"] = reference.n_clusters;
            report["infomap"] = std::move(im);

            std::vector<DailyStateSeries> node_series;
            for (const auto& s : series) {
                if (std::binary_search(net.nodes.begin(), net.nodes.end(),
                                       s.investor_id)) {
                    node_series.push_back(s);
                }
            }
            const auto grid =
                make_heatmap(reference, node_series, input.t_days());
            save_heatmap_csv(grid, outputs.path("heatmap_svn.csv"));
            save_heatmap_ppm(grid, outputs.path("heatmap_svn.ppm"));
        } else {
            report["communities_skipped"] = "validated network is empty";
        }

        stage = "sweep";
        if (have_tree && !net.nodes.empty()) {
            // Restrict the comparison to network nodes that are also tree
            // leaves (network investors below the activity filter make the
            // node set a superset of the leaves).
            std::vector<std::string> subset;
            for (const auto& id : net.nodes) {
                if (std::find(tree.leaf_names.begin(), tree.leaf_names.end(),
                              id) != tree.leaf_names.end()) {
                    subset.push_back(id);
                }
            }
            if (subset.size() >= 2) {
                auto sweep =
                    ari_sweep(tree, restrict_partition(reference, subset),
                              subset, config.coarse_step, config.fine_step);
                sweep.method = linkage_method_name(config.linkage_method);
                save_sweep_csv(sweep, outputs.path("sweep.csv"));

                const auto combined = cut(tree, sweep.best_threshold);
                save_partition_csv(combined,
                                   outputs.path("combined_partition.csv"));
                save_size_distribution_csv(
                    cluster_size_distribution(combined),
                    outputs.path("cluster_sizes_combined.csv"));
                const auto grid =
                    make_heatmap(combined, filtered, input.t_days());
                save_heatmap_csv(grid, outputs.path("heatmap_combined.csv"));
                save_heatmap_ppm(grid, outputs.path("heatmap_combined.ppm"));

                ordered_json sj = ordered_json::object();
                sj["method"] = sweep.method;
                sj["subset_size"] = subset.size();
                sj["best_threshold"] = sweep.best_threshold;
                sj["best_ari"] = sweep.best_ari;
                sj["combined_clusters"] = combined.n_clusters;
                sj["combined_investors"] = combined.size();
                report["sweep"] = std::move(sj);
            } else {
                report["sweep_skipped"] =
                    "fewer than 2 network nodes among tree leaves";
            }
        } else {
            report["sweep_skipped"] = "tree or network unavailable";
        }
    } catch (const std::exception& e) {
        StageGuard{stage, stock}.rethrow(e);
    }
    return report;
}

}  // namespace

std::string run_pipeline(const RunConfig& config) {
    config.validate();
    const auto input = ingest(config.input_path);
    fs::create_directories(config.output_dir);

    ordered_json manifest = ordered_json::object();
    manifest["config"] = config_json(config);
    {
        ordered_json in = ordered_json::object();
        in["path"] = config.input_path;
        in["digest"] = digest_hex(config.input_path);
        in["n_records"] = input.records.size();
        in["t_days"] = input.t_days();
        in["stocks"] = input.stock_ids;
        in["zero_volume_dropped"] = input.n_zero_dropped;
        in["unknown_categories"] = input.n_unknown_categories;
        manifest["input"] = std::move(in);
    }

    ordered_json stocks = ordered_json::object();
    ordered_json output_digests = ordered_json::object();
    for (const auto& stock : input.stock_ids) {
        StockOutputs outputs;
        outputs.dir = fs::path(config.output_dir) / stock;
        fs::create_directories(outputs.dir);
        try {
            stocks[stock] = process_stock(config, input, stock, outputs);
        } catch (...) {
            outputs.remove_all();
            throw;
        }
        output_digests.update(outputs.digests(stock));
    }
    manifest["stocks"] = std::move(stocks);
    manifest["outputs"] = std::move(output_digests);

    const std::string manifest_path =
        (fs::path(config.output_dir) / "manifest.json").string();
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

}  // namespace tradeclust
