#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tradeclust/compare.hpp"
#include "tradeclust/encoder.hpp"
#include "tradeclust/hclust.hpp"
#include "tradeclust/partition.hpp"
#include "tradeclust/svn.hpp"
#include "tradeclust/synth.hpp"

namespace tradeclust {

// Transactions CSV: header investor_id,stock_id,date,v_buy,v_sell[,category]
// with ISO-8601 dates. Rows sharing (investor, stock, date) are summed into
// daily volumes; aggregates with zero total volume are dropped and counted.
// Day indices come from the sorted set of distinct dates in the file.
struct IngestResult {
    std::vector<TransactionRecord> records;  // sorted (investor, stock, day)
    std::vector<std::string> dates;          // day i corresponds to dates[i]
    std::vector<std::string> stock_ids;      // sorted distinct
    int n_zero_dropped = 0;
    int n_unknown_categories = 0;

    int t_days() const { return static_cast<int>(dates.size()); }
};

IngestResult ingest(const std::string& path);

void save_transactions_csv(const std::vector<TransactionRecord>& records,
                           const std::vector<std::string>& dates,
                           const std::string& path);

// ISO date for a day offset from 2003-01-01; used when exporting synthetic
// data, whose records carry bare day indices.
std::vector<std::string> default_dates(int t_days);

// State-series CSV: "# t_days=N" line, then
// investor_id,stock_id,day,state,category rows.
void save_series_csv(const std::vector<DailyStateSeries>& series, int t_days,
                     const std::string& path);
struct SeriesFile {
    std::vector<DailyStateSeries> series;
    int t_days = 0;
};
SeriesFile load_series_csv(const std::string& path);

// Partition CSV: element_id,cluster_id.
void save_partition_csv(const Partition& p, const std::string& path);
Partition load_partition_csv(const std::string& path);

// Validated-network CSVs. The edge file documents the 9-token combination
// vocabulary in its header comments; the audit file carries the counts and
// p-value behind every validated combination so the arithmetic can be
// re-checked externally.
void save_edges_csv(const ValidatedNetwork& net, const std::string& path);
void save_nodes_csv(const ValidatedNetwork& net,
                    const std::map<std::string, std::string>& categories,
                    const std::string& path);
void save_audit_csv(const ValidatedNetwork& net, const std::string& path);

struct EdgeFile {
    std::vector<std::string> nodes;
    std::vector<std::pair<std::pair<std::string, std::string>, int>> edges;
};
EdgeFile load_edges_csv(const std::string& path);

void save_sweep_csv(const SweepResult& sweep, const std::string& path);
void save_size_distribution_csv(const SizeDistribution& dist,
                                const std::string& path);
void save_ground_truth_csv(const GroundTruth& truth, const std::string& path);

// Heatmap rows are investors grouped by cluster (clusters by decreasing
// size, then id; members by id), columns are days.
struct HeatmapGrid {
    std::vector<std::string> investor_ids;
    std::vector<int> cluster_ids;  // per row
    int t_days = 0;
    // Row-major cells: 0 inactive, 1 buy, 2 sell, 3 buysell.
    std::vector<std::uint8_t> cells;

    std::uint8_t at(std::size_t row, int day) const {
        return cells[row * static_cast<std::size_t>(t_days) +
                     static_cast<std::size_t>(day)];
    }
};

HeatmapGrid make_heatmap(const Partition& partition,
                         const std::vector<DailyStateSeries>& series,
                         int t_days);

void save_heatmap_csv(const HeatmapGrid& grid, const std::string& path);
// Binary portable pixmap, one pixel per cell: red buy, green sell, white
// buy/sell, black inactive.
void save_heatmap_ppm(const HeatmapGrid& grid, const std::string& path);

}  // namespace tradeclust
