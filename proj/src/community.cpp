#include "tradeclust/community.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace tradeclust {

void WeightedGraph::validate() const {
    std::unordered_map<std::int64_t, bool> seen;
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n_nodes() || e.v >= n_nodes()) {
            throw ValidationError("edge endpoint out of range");
        }
        if (e.u == e.v) throw ValidationError("self-loop in weighted graph");
        if (e.weight < 1) throw ValidationError("edge weight must be >= 1");
        const auto key = static_cast<std::int64_t>(std::min(e.u, e.v)) *
                             n_nodes() +
                         std::max(e.u, e.v);
        if (!seen.emplace(key, true).second) {
            throw ValidationError("duplicate edge in weighted graph");
        }
    }
}

WeightedGraph WeightedGraph::from_network(const ValidatedNetwork& net) {
    WeightedGraph g;
    g.node_ids = net.nodes;
    std::unordered_map<std::string, int> index;
    index.reserve(g.node_ids.size());
    for (int i = 0; i < g.n_nodes(); ++i) index.emplace(g.node_ids[i], i);
    g.edges.reserve(net.edges.size());
    for (const auto& e : net.edges) {
        g.edges.push_back(WeightedEdge{index.at(e.investor_i),
                                       index.at(e.investor_j), e.weight()});
    }
    return g;
}

namespace {

double plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

struct FlowGraph {
    std::vector<std::vector<std::pair<int, double>>> adjacency;
    std::vector<double> node_flow;  // strength / total strength
    double total_strength = 0.0;

    explicit FlowGraph(int n) : adjacency(static_cast<std::size_t>(n)),
                                node_flow(static_cast<std::size_t>(n), 0.0) {}

    int n_nodes() const { return static_cast<int>(adjacency.size()); }

    void add_edge(int u, int v, double w) {
        adjacency[static_cast<std::size_t>(u)].emplace_back(v, w);
        adjacency[static_cast<std::size_t>(v)].emplace_back(u, w);
        total_strength += 2.0 * w;
    }

    void finalize_flow() {
        for (int i = 0; i < n_nodes(); ++i) {
            double s = 0.0;
            for (const auto& [_, w] : adjacency[static_cast<std::size_t>(i)]) {
                s += w;
            }
            node_flow[static_cast<std::size_t>(i)] =
                total_strength > 0.0 ? s / total_strength : 0.0;
        }
    }
};

FlowGraph make_flow_graph(const WeightedGraph& g) {
    FlowGraph fg(g.n_nodes());
    for (const auto& e : g.edges) {
        fg.add_edge(e.u, e.v, static_cast<double>(e.weight));
    }
    fg.finalize_flow();
    return fg;
}

// Module bookkeeping for incremental map-equation evaluation: exit flow q_m
// and internal visit flow sum per module.
struct ModuleState {
    std::vector<double> exit_flow;
    std::vector<double> flow_sum;
    std::vector<int> n_members;
    double total_exit = 0.0;

    double module_terms(int m) const {
        const auto mm = static_cast<std::size_t>(m);
        return -2.0 * plogp(exit_flow[mm]) +
               plogp(exit_flow[mm] + flow_sum[mm]);
    }
};

ModuleState init_modules(const FlowGraph& fg, const std::vector<int>& labels,
                         int n_modules) {
    ModuleState st;
    st.exit_flow.assign(static_cast<std::size_t>(n_modules), 0.0);
    st.flow_sum.assign(static_cast<std::size_t>(n_modules), 0.0);
    st.n_members.assign(static_cast<std::size_t>(n_modules), 0);
    for (int v = 0; v < fg.n_nodes(); ++v) {
        const auto m = static_cast<std::size_t>(labels[static_cast<std::size_t>(v)]);
        st.flow_sum[m] += fg.node_flow[static_cast<std::size_t>(v)];
        st.n_members[m] += 1;
        for (const auto& [u, w] : fg.adjacency[static_cast<std::size_t>(v)]) {
            if (labels[static_cast<std::size_t>(u)] !=
                static_cast<int>(m)) {
                st.exit_flow[m] += fg.total_strength > 0.0
                                       ? w / fg.total_strength
                                       : 0.0;
            }
        }
    }
    for (double q : st.exit_flow) st.total_exit += q;
    return st;
}

double codelength_from_state(const FlowGraph& fg, const ModuleState& st) {
    double len = plogp(st.total_exit);
    for (std::size_t m = 0; m < st.exit_flow.size(); ++m) {
        if (st.n_members[m] == 0) continue;
        len += -2.0 * plogp(st.exit_flow[m]) +
               plogp(st.exit_flow[m] + st.flow_sum[m]);
    }
    for (double f : fg.node_flow) len -= plogp(f);
    return len;
}

// One sweep-until-stable greedy pass over node moves; returns true if any
// move was applied. Candidate targets are neighboring modules plus a fresh
// empty module; ties prefer the smallest module label.
bool greedy_node_moves(const FlowGraph& fg, std::vector<int>& labels,
                       ModuleState& st, Rng& rng) {
    const int n = fg.n_nodes();
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);

    // A sweep can free module slots; reuse the lowest freed slot for the
    // fresh-module candidate.
    auto find_empty_slot = [&]() -> int {
        for (std::size_t m = 0; m < st.n_members.size(); ++m) {
            if (st.n_members[m] == 0) return static_cast<int>(m);
        }
        st.exit_flow.push_back(0.0);
        st.flow_sum.push_back(0.0);
        st.n_members.push_back(0);
        return static_cast<int>(st.n_members.size()) - 1;
    };

    bool any_move = false;
    bool moved_in_sweep = true;
    while (moved_in_sweep) {
        moved_in_sweep = false;
        for (int idx = 0; idx < n; ++idx) {
            const int v = order[static_cast<std::size_t>(idx)];
            const auto sv = static_cast<std::size_t>(v);
            const int from = labels[sv];
            const double p_v = fg.node_flow[sv];

            // Flow from v into each adjacent module.
            std::unordered_map<int, double> link_flow;
            for (const auto& [u, w] : fg.adjacency[sv]) {
                link_flow[labels[static_cast<std::size_t>(u)]] +=
                    fg.total_strength > 0.0 ? w / fg.total_strength : 0.0;
            }
            const double w_from = link_flow.count(from) ? link_flow[from] : 0.0;

            const int empty_slot = find_empty_slot();
            std::vector<std::pair<int, double>> candidates(link_flow.begin(),
                                                           link_flow.end());
            candidates.emplace_back(empty_slot, 0.0);
            std::sort(candidates.begin(), candidates.end());

            // Terms of L touched by moving v out of `from`.
            const auto sfrom = static_cast<std::size_t>(from);
            const double q_from_new = st.exit_flow[sfrom] - p_v + 2.0 * w_from;
            const double flow_from_new = st.flow_sum[sfrom] - p_v;
            const double from_terms_old = st.module_terms(from);
            const double from_terms_new =
                st.n_members[sfrom] == 1
                    ? 0.0
                    : -2.0 * plogp(q_from_new) +
                          plogp(q_from_new + flow_from_new);

            int best_to = from;
            double best_delta = 0.0;
            double best_q_to_new = 0.0;
            for (const auto& [to, w_to] : candidates) {
                if (to == from) continue;
                const auto sto = static_cast<std::size_t>(to);
                const double q_to_new =
                    st.exit_flow[sto] + p_v - 2.0 * w_to;
                const double to_terms_old = st.n_members[sto] == 0
                                                ? 0.0
                                                : st.module_terms(to);
                const double to_terms_new =
                    -2.0 * plogp(q_to_new) +
                    plogp(q_to_new + st.flow_sum[sto] + p_v);
                const double exit_new = st.total_exit +
                                        (q_from_new - st.exit_flow[sfrom]) +
                                        (q_to_new - st.exit_flow[sto]);
                const double delta = plogp(exit_new) - plogp(st.total_exit) +
                                     from_terms_new - from_terms_old +
                                     to_terms_new - to_terms_old;
                if (delta < best_delta - 1e-12) {
                    best_delta = delta;
                    best_to = to;
                    best_q_to_new = q_to_new;
                }
            }

            if (best_to != from) {
                const auto sto = static_cast<std::size_t>(best_to);
                st.total_exit += (q_from_new - st.exit_flow[sfrom]) +
                                 (best_q_to_new - st.exit_flow[sto]);
                st.exit_flow[sfrom] = q_from_new;
                st.flow_sum[sfrom] = flow_from_new;
                st.n_members[sfrom] -= 1;
                st.exit_flow[sto] = best_q_to_new;
                st.flow_sum[sto] += p_v;
                st.n_members[sto] += 1;
                labels[sv] = best_to;
                moved_in_sweep = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

std::vector<int> compact_labels(std::vector<int> labels, int* n_out) {
    std::unordered_map<int, int> remap;
    for (int& l : labels) {
        auto [it, _] = remap.emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    if (n_out) *n_out = static_cast<int>(remap.size());
    return labels;
}

// One optimization trial: greedy moves, then recurse on the aggregated
// module graph until the partition stops changing.
std::vector<int> run_trial(const FlowGraph& fg, Rng& rng) {
    const int n = fg.n_nodes();
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i;

    ModuleState st = init_modules(fg, labels, n);
    if (!greedy_node_moves(fg, labels, st, rng)) return labels;

    int n_modules = 0;
    labels = compact_labels(std::move(labels), &n_modules);
    if (n_modules == 1 || n_modules == n) return labels;

    // Module-merging refinement: aggregate modules into super-nodes and
    // optimize the coarse graph with the same objective.
    FlowGraph coarse(n_modules);
    std::unordered_map<std::int64_t, double> agg;
    for (int v = 0; v < n; ++v) {
        for (const auto& [u, w] : fg.adjacency[static_cast<std::size_t>(v)]) {
            if (u <= v) continue;
            const int mu = labels[static_cast<std::size_t>(u)];
            const int mv = labels[static_cast<std::size_t>(v)];
            if (mu == mv) continue;
            const auto key = static_cast<std::int64_t>(std::min(mu, mv)) *
                                 n_modules +
                             std::max(mu, mv);
            agg[key] += w;
        }
    }
    std::vector<std::pair<std::int64_t, double>> coarse_edges(agg.begin(),
                                                              agg.end());
    std::sort(coarse_edges.begin(), coarse_edges.end());
    for (const auto& [key, w] : coarse_edges) {
        coarse.add_edge(static_cast<int>(key / n_modules),
                        static_cast<int>(key % n_modules), w);
    }
    // Intra-module weight keeps node flow of super-nodes faithful: add it as
    // self-strength.
    std::vector<double> internal(static_cast<std::size_t>(n_modules), 0.0);
    for (int v = 0; v < n; ++v) {
        for (const auto& [u, w] : fg.adjacency[static_cast<std::size_t>(v)]) {
            if (u <= v) continue;
            const int mu = labels[static_cast<std::size_t>(u)];
            const int mv = labels[static_cast<std::size_t>(v)];
            if (mu == mv) internal[static_cast<std::size_t>(mu)] += w;
        }
    }
    coarse.total_strength = fg.total_strength;
    for (int m = 0; m < n_modules; ++m) {
        double s = 0.0;
        for (const auto& [_, w] : coarse.adjacency[static_cast<std::size_t>(m)]) {
            s += w;
        }
        s += 2.0 * internal[static_cast<std::size_t>(m)];
        coarse.node_flow[static_cast<std::size_t>(m)] =
            fg.total_strength > 0.0 ? s / fg.total_strength : 0.0;
    }

    const std::vector<int> coarse_labels = run_trial(coarse, rng);
    for (int v = 0; v < n; ++v) {
        labels[static_cast<std::size_t>(v)] = coarse_labels[static_cast<std::size_t>(
            labels[static_cast<std::size_t>(v)])];
    }
    return compact_labels(std::move(labels), &n_modules);
}

}  // namespace

double codelength(const WeightedGraph& g, const Partition& p) {
    g.validate();
    if (p.ids.size() != static_cast<std::size_t>(g.n_nodes())) {
        throw ValidationError("partition does not label every node");
    }
    std::vector<int> labels = p.labels;
    if (p.ids != g.node_ids) {
        const auto by_id = p.label_by_id();
        labels.clear();
        for (const auto& id : g.node_ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw ValidationError("partition missing node: " + id);
            }
            labels.push_back(it->second);
        }
    }
    const FlowGraph fg = make_flow_graph(g);
    int n_modules = 0;
    labels = compact_labels(std::move(labels), &n_modules);
    const ModuleState st = init_modules(fg, labels, n_modules);
    return codelength_from_state(fg, st);
}

Partition infomap_partition(const WeightedGraph& g, std::uint64_t seed,
                            int n_trials) {
    g.validate();
    if (g.n_nodes() == 0) throw ValidationError("infomap on empty graph");
    if (n_trials < 1) throw ValidationError("n_trials must be >= 1");

    const FlowGraph fg = make_flow_graph(g);
    const int n = g.n_nodes();

    auto as_partition = [&](std::vector<int> labels) {
        Partition p;
        p.ids = g.node_ids;
        p.labels = std::move(labels);
        p.compact();
        return p;
    };

    // Baselines: all singletons and one module per connected component.
    std::vector<int> singleton(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) singleton[static_cast<std::size_t>(i)] = i;

    std::vector<int> component(static_cast<std::size_t>(n), -1);
    {
        int next = 0;
        std::vector<int> stack;
        for (int s = 0; s < n; ++s) {
            if (component[static_cast<std::size_t>(s)] >= 0) continue;
            component[static_cast<std::size_t>(s)] = next;
            stack.push_back(s);
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                for (const auto& [u, _] :
                     fg.adjacency[static_cast<std::size_t>(v)]) {
                    if (component[static_cast<std::size_t>(u)] < 0) {
                        component[static_cast<std::size_t>(u)] = next;
                        stack.push_back(u);
                    }
                }
            }
            ++next;
        }
    }

    Partition best = as_partition(singleton);
    double best_len = codelength(g, best);
    auto consider = [&](std::vector<int> labels) {
        Partition p = as_partition(std::move(labels));
        const double len = codelength(g, p);
        if (len < best_len - 1e-12 ||
            (std::abs(len - best_len) <= 1e-12 && p.labels < best.labels)) {
            best = std::move(p);
            best_len = len;
        }
    };
    consider(component);

    for (int trial = 0; trial < n_trials; ++trial) {
        Rng rng(seed + 0x9e3779b97f4a7c15ULL *
                           (static_cast<std::uint64_t>(trial) + 1));
        consider(run_trial(fg, rng));
    }
    return best;
}

}  // namespace tradeclust
