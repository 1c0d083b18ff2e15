#include "tradeclust/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace tradeclust {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_nonneg_int(const std::string& s, std::int64_t* out) {
    if (s.empty()) return false;
    std::int64_t v = 0;
    for (char ch : s) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
        v = v * 10 + (ch - '0');
        if (v < 0) return false;
    }
    *out = v;
    return true;
}

bool looks_like_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

const std::unordered_set<std::string>& known_categories() {
    static const std::unordered_set<std::string> cats{
        "Corporations", "Financial",  "FinancialNR", "ForeignOrg",
        "Governmental", "Households", "NonProfit"};
    return cats;
}

}  // namespace

IngestResult ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open transactions file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    {
        const auto header = split_csv_line(line);
        if (header.size() < 5 || header[0] != "investor_id" ||
            header[1] != "stock_id" || header[2] != "date" ||
            header[3] != "v_buy" || header[4] != "v_sell" ||
            (header.size() == 6 && header[5] != "category") ||
            header.size() > 6) {
            throw DataError(
                "bad header, expected "
                "investor_id,stock_id,date,v_buy,v_sell[,category]: " +
                path);
        }
    }

    struct Aggregate {
        std::int64_t v_buy = 0;
        std::int64_t v_sell = 0;
        std::string category;
    };
    // (investor, stock, date) -> summed volumes; std::map keeps output order
    // deterministic.
    std::map<std::tuple<std::string, std::string, std::string>, Aggregate>
        daily;
    std::set<std::string> dates;
    std::set<std::string> stocks;
    std::vector<std::size_t> bad_lines;
    IngestResult result;

    std::size_t line_no = 1;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::int64_t v_buy = 0;
        std::int64_t v_sell = 0;
        if ((fields.size() != 5 && fields.size() != 6) ||
            fields[0].empty() || fields[1].empty() ||
            !looks_like_iso_date(fields[2]) ||
            !parse_nonneg_int(fields[3], &v_buy) ||
            !parse_nonneg_int(fields[4], &v_sell)) {
            bad_lines.push_back(line_no);
            if (bad_lines.size() >= 20) break;
            continue;
        }
        ++n_rows;
        dates.insert(fields[2]);
        stocks.insert(fields[1]);
        auto& agg = daily[{fields[0], fields[1], fields[2]}];
        agg.v_buy += v_buy;
        agg.v_sell += v_sell;
        if (fields.size() == 6 && !fields[5].empty()) {
            if (agg.category.empty()) agg.category = fields[5];
            if (!known_categories().count(fields[5])) {
                ++result.n_unknown_categories;
            }
        }
    }
    if (!bad_lines.empty()) {
        std::ostringstream msg;
        msg << "malformed rows in " << path << " at line(s):";
        for (std::size_t ln : bad_lines) msg << " " << ln;
        throw DataError(msg.str());
    }
    if (n_rows == 0) throw DataError("no transaction rows in " + path);

    result.dates.assign(dates.begin(), dates.end());
    result.stock_ids.assign(stocks.begin(), stocks.end());
    std::unordered_map<std::string, int> day_index;
    day_index.reserve(result.dates.size());
    for (std::size_t i = 0; i < result.dates.size(); ++i) {
        day_index.emplace(result.dates[i], static_cast<int>(i));
    }

    for (const auto& [key, agg] : daily) {
        if (agg.v_buy == 0 && agg.v_sell == 0) {
            ++result.n_zero_dropped;
            continue;
        }
        result.records.push_back(TransactionRecord{
            std::get<0>(key), std::get<1>(key), day_index.at(std::get<2>(key)),
            agg.v_buy, agg.v_sell, agg.category});
    }
    return result;
}

void save_transactions_csv(const std::vector<TransactionRecord>& records,
                           const std::vector<std::string>& dates,
                           const std::string& path) {
    std::ostringstream out;
    out << "investor_id,stock_id,date,v_buy,v_sell,category\n";
    for (const auto& r : records) {
        if (r.day < 0 || r.day >= static_cast<int>(dates.size())) {
            throw ValidationError("record day outside the date table");
        }
        out << r.investor_id << ',' << r.stock_id << ','
            << dates[static_cast<std::size_t>(r.day)] << ',' << r.v_buy << ','
            << r.v_sell << ',' << r.category << '\n';
    }
    write_file_atomic(path, out.str());
}

namespace {

// Civil-date conversion (Hinnant's algorithm); enough calendar support to
// stamp synthetic day indices with real ISO dates.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
        static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int* y, int* m, int* d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe =
        (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    *d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    *m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    *y = static_cast<int>(yy + (*m <= 2));
}

}  // namespace

std::vector<std::string> default_dates(int t_days) {
    const std::int64_t base = days_from_civil(2003, 1, 1);
    std::vector<std::string> dates;
    dates.reserve(static_cast<std::size_t>(t_days));
    for (int k = 0; k < t_days; ++k) {
        int y = 0;
        int m = 0;
        int d = 0;
        civil_from_days(base + k, &y, &m, &d);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        dates.emplace_back(buf);
    }
    return dates;
}

void save_series_csv(const std::vector<DailyStateSeries>& series, int t_days,
                     const std::string& path) {
    std::ostringstream out;
    out << "# t_days=" << t_days << '\n';
    out << "investor_id,stock_id,day,state,category\n";
    for (const auto& s : series) {
        for (const auto& [day, state] : s.states) {
            out << s.investor_id << ',' << s.stock_id << ',' << day << ','
                << state_code(state) << ',' << s.category << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

SeriesFile load_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open series file: " + path);
    std::string line;
    SeriesFile out;
    if (!std::getline(in, line)) throw DataError("empty series file: " + path);
    if (line.rfind("# t_days=", 0) == 0) {
        out.t_days = std::atoi(line.c_str() + 9);
        if (!std::getline(in, line)) {
            throw DataError("missing header in " + path);
        }
    }
    if (split_csv_line(line) !=
        std::vector<std::string>{"investor_id", "stock_id", "day", "state",
                                 "category"}) {
        throw DataError("bad series header in " + path);
    }

    std::map<std::pair<std::string, std::string>, DailyStateSeries> grouped;
    std::size_t line_no = out.t_days > 0 ? 2 : 1;
    int max_day = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::int64_t day = 0;
        std::optional<TradingState> state;
        if (fields.size() == 5) state = parse_state_code(fields[3]);
        if (fields.size() != 5 || !parse_nonneg_int(fields[2], &day) ||
            !state) {
            throw DataError("malformed series row at line " +
                            std::to_string(line_no) + " in " + path);
        }
        auto& s = grouped[{fields[0], fields[1]}];
        s.investor_id = fields[0];
        s.stock_id = fields[1];
        if (s.category.empty()) s.category = fields[4];
        s.states.emplace_back(static_cast<int>(day), *state);
        max_day = std::max(max_day, static_cast<int>(day));
    }
    if (grouped.empty()) throw DataError("no series rows in " + path);
    if (out.t_days == 0) out.t_days = max_day + 1;
    for (auto& [key, s] : grouped) {
        std::sort(s.states.begin(), s.states.end());
        for (std::size_t i = 1; i < s.states.size(); ++i) {
            if (s.states[i].first == s.states[i - 1].first) {
                throw DataError("duplicate day for " + s.investor_id + " in " +
                                path);
            }
        }
        out.series.push_back(std::move(s));
    }
    return out;
}

void save_partition_csv(const Partition& p, const std::string& path) {
    // Canonical file form: rows sorted by element id, cluster ids numbered
    // by first appearance in that order. Equal partitions produce equal
    // bytes no matter how their elements were ordered in memory.
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p.ids[a] < p.ids[b];
    });
    std::unordered_map<int, int> renumber;
    std::ostringstream out;
    out << "element_id,cluster_id\n";
    for (std::size_t i : order) {
        const auto [it, _] = renumber.emplace(
            p.labels[i], static_cast<int>(renumber.size()));
        out << p.ids[i] << ',' << it->second << '\n';
    }
    write_file_atomic(path, out.str());
}

Partition load_partition_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open partition file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) !=
            std::vector<std::string>{"element_id", "cluster_id"}) {
        throw DataError("bad partition header in " + path);
    }
    Partition p;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::int64_t label = 0;
        if (fields.size() != 2 || fields[0].empty() ||
            !parse_nonneg_int(fields[1], &label)) {
            throw DataError("malformed partition row at line " +
                            std::to_string(line_no) + " in " + path);
        }
        p.ids.push_back(fields[0]);
        p.labels.push_back(static_cast<int>(label));
    }
    if (p.ids.empty()) throw DataError("no partition rows in " + path);
    p.compact();
    return p;
}

void save_edges_csv(const ValidatedNetwork& net, const std::string& path) {
    std::ostringstream out;
    out << "# validated co-occurrence network ("
        << correction_name(net.correction) << " correction, alpha "
        << format_double(net.alpha) << ", per-test threshold "
        << format_double(net.per_test_alpha) << ", acceptance threshold "
        << format_double(net.threshold_used) << ")\n";
    out << "# combination tokens <first>_<second>, first state belongs to "
           "investor_i (the lower id):";
    for (const auto& combo : all_state_combos()) out << ' ' << combo_token(combo);
    out << '\n';
    out << "investor_i,investor_j,validated_combos,weight,min_p\n";
    for (const auto& e : net.edges) {
        out << e.investor_i << ',' << e.investor_j << ',';
        for (std::size_t k = 0; k < e.combos.size(); ++k) {
            if (k > 0) out << ';';
            out << combo_token(e.combos[k].counts.combo);
        }
        out << ',' << e.weight() << ',' << format_double(e.min_p()) << '\n';
    }
    write_file_atomic(path, out.str());
}

void save_nodes_csv(const ValidatedNetwork& net,
                    const std::map<std::string, std::string>& categories,
                    const std::string& path) {
    std::ostringstream out;
    out << "investor_id,category\n";
    for (const auto& id : net.nodes) {
        const auto it = categories.find(id);
        out << id << ',' << (it == categories.end() ? "" : it->second) << '\n';
    }
    write_file_atomic(path, out.str());
}

void save_audit_csv(const ValidatedNetwork& net, const std::string& path) {
    std::ostringstream out;
    out << "investor_i,investor_j,combo,n_t,n_a,n_b,n_ab,p,threshold\n";
    for (const auto& e : net.edges) {
        for (const auto& vc : e.combos) {
            out << e.investor_i << ',' << e.investor_j << ','
                << combo_token(vc.counts.combo) << ',' << vc.counts.n_t << ','
                << vc.counts.n_a << ',' << vc.counts.n_b << ','
                << vc.counts.n_ab << ',' << format_double(vc.p) << ','
                << format_double(net.threshold_used) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

EdgeFile load_edges_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge file: " + path);
    std::string line;
    bool header_seen = false;
    EdgeFile out;
    std::set<std::string> nodes;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (!header_seen) {
            if (split_csv_line(line) !=
                std::vector<std::string>{"investor_i", "investor_j",
                                         "validated_combos", "weight",
                                         "min_p"}) {
                throw DataError("bad edge header in " + path);
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        std::int64_t weight = 0;
        if (fields.size() != 5 || fields[0].empty() || fields[1].empty() ||
            !parse_nonneg_int(fields[3], &weight) || weight < 1) {
            throw DataError("malformed edge row at line " +
                            std::to_string(line_no) + " in " + path);
        }
        out.edges.push_back({{fields[0], fields[1]},
                             static_cast<int>(weight)});
        nodes.insert(fields[0]);
        nodes.insert(fields[1]);
    }
    if (!header_seen) throw DataError("no edge header in " + path);
    out.nodes.assign(nodes.begin(), nodes.end());
    return out;
}

void save_sweep_csv(const SweepResult& sweep, const std::string& path) {
    std::ostringstream out;
    out << "# method=" << sweep.method
        << " best_threshold=" << format_double(sweep.best_threshold)
        << " best_ari=" << format_double(sweep.best_ari) << '\n';
    out << "threshold,ari\n";
    for (std::size_t i = 0; i < sweep.thresholds.size(); ++i) {
        out << format_double(sweep.thresholds[i]) << ','
            << format_double(sweep.ari_values[i]) << '\n';
    }
    write_file_atomic(path, out.str());
}

void save_size_distribution_csv(const SizeDistribution& dist,
                                const std::string& path) {
    std::ostringstream out;
    out << "cluster_size,count,density\n";
    for (const auto& [size, count] : dist.counts) {
        out << size << ',' << count << ','
            << format_double(dist.density.at(size)) << '\n';
    }
    write_file_atomic(path, out.str());
}

void save_ground_truth_csv(const GroundTruth& truth, const std::string& path) {
    std::ostringstream out;
    out << "investor_id,cohort_id\n";
    for (std::size_t i = 0; i < truth.planted.size(); ++i) {
        out << truth.planted.ids[i] << ',' << truth.planted.labels[i] << '\n';
    }
    write_file_atomic(path, out.str());
}

HeatmapGrid make_heatmap(const Partition& partition,
                         const std::vector<DailyStateSeries>& series,
                         int t_days) {
    const auto label_of = partition.label_by_id();
    for (const auto& s : series) {
        if (!label_of.count(s.investor_id)) {
            throw ValidationError("partition does not cover investor " +
                                  s.investor_id);
        }
    }

    // Cluster display order: decreasing size, then cluster id; members by id.
    std::vector<int> cluster_sizes(
        static_cast<std::size_t>(partition.n_clusters), 0);
    for (const auto& s : series) {
        ++cluster_sizes[static_cast<std::size_t>(label_of.at(s.investor_id))];
    }
    std::vector<const DailyStateSeries*> rows;
    rows.reserve(series.size());
    for (const auto& s : series) rows.push_back(&s);
    std::sort(rows.begin(), rows.end(),
              [&](const DailyStateSeries* a, const DailyStateSeries* b) {
                  const int ca = label_of.at(a->investor_id);
                  const int cb = label_of.at(b->investor_id);
                  const int sa = cluster_sizes[static_cast<std::size_t>(ca)];
                  const int sb = cluster_sizes[static_cast<std::size_t>(cb)];
                  if (sa != sb) return sa > sb;
                  if (ca != cb) return ca < cb;
                  return a->investor_id < b->investor_id;
              });

    HeatmapGrid grid;
    grid.t_days = t_days;
    grid.cells.assign(rows.size() * static_cast<std::size_t>(t_days), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        grid.investor_ids.push_back(rows[r]->investor_id);
        grid.cluster_ids.push_back(label_of.at(rows[r]->investor_id));
        for (const auto& [day, state] : rows[r]->states) {
            if (day < 0 || day >= t_days) {
                throw ValidationError("state day outside heatmap width");
            }
            grid.cells[r * static_cast<std::size_t>(t_days) +
                       static_cast<std::size_t>(day)] =
                static_cast<std::uint8_t>(static_cast<int>(state) + 1);
        }
    }
    return grid;
}

void save_heatmap_csv(const HeatmapGrid& grid, const std::string& path) {
    std::ostringstream out;
    out << "investor_id,cluster_id";
    for (int d = 0; d < grid.t_days; ++d) out << ",day" << d;
    out << '\n';
    static const char* codes[] = {"", "b", "s", "bs"};
    for (std::size_t r = 0; r < grid.investor_ids.size(); ++r) {
        out << grid.investor_ids[r] << ',' << grid.cluster_ids[r];
        for (int d = 0; d < grid.t_days; ++d) {
            out << ',' << codes[grid.at(r, d)];
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

void save_heatmap_ppm(const HeatmapGrid& grid, const std::string& path) {
    static const std::array<std::array<unsigned char, 3>, 4> palette{{
        {0, 0, 0},        // inactive
        {255, 0, 0},      // buy
        {0, 255, 0},      // sell
        {255, 255, 255},  // buy/sell
    }};
    std::ostringstream out(std::ios::binary);
    out << "P6\n" << grid.t_days << ' ' << grid.investor_ids.size()
        << "\n255\n";
    for (std::size_t r = 0; r < grid.investor_ids.size(); ++r) {
        for (int d = 0; d < grid.t_days; ++d) {
            const auto& rgb = palette[grid.at(r, d)];
            out.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
    }
    write_file_atomic(path, out.str());
}

}  // namespace tradeclust
