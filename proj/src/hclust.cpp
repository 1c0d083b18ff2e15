#include "tradeclust/hclust.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace tradeclust {

LinkageMethod parse_linkage_method(const std::string& name) {
    if (name == "single") return LinkageMethod::Single;
    if (name == "average") return LinkageMethod::Average;
    if (name == "complete") return LinkageMethod::Complete;
    throw ValidationError("unknown linkage method: " + name);
}

const char* linkage_method_name(LinkageMethod m) {
    switch (m) {
        case LinkageMethod::Single: return "single";
        case LinkageMethod::Average: return "average";
        case LinkageMethod::Complete: return "complete";
    }
    return "?";
}

namespace {

struct RawMerge {
    int rep_a = 0;  // smallest leaf id of one side at merge time
    int rep_b = 0;
    double height = 0.0;
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(
                    parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        parent[static_cast<std::size_t>(find(a))] = find(b);
    }
};

// Sorts raw merges by height (ties by representative pair) and rewrites them
// as node references via union-find, the usual post-pass for chain-order
// merge lists.
std::vector<Merge> finalize_merges(int n, std::vector<RawMerge> raw) {
    std::stable_sort(raw.begin(), raw.end(),
                     [](const RawMerge& x, const RawMerge& y) {
                         if (x.height != y.height) return x.height < y.height;
                         const int xa = std::min(x.rep_a, x.rep_b);
                         const int xb = std::max(x.rep_a, x.rep_b);
                         const int ya = std::min(y.rep_a, y.rep_b);
                         const int yb = std::max(y.rep_a, y.rep_b);
                         return xa != ya ? xa < ya : xb < yb;
                     });

    UnionFind uf(n);
    std::vector<int> node_of_root(static_cast<std::size_t>(n));
    std::vector<int> size_of_root(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) node_of_root[static_cast<std::size_t>(i)] = i;

    std::vector<Merge> merges;
    merges.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        // The side holding the smaller leaf becomes the left child.
        const int rep_l = std::min(raw[k].rep_a, raw[k].rep_b);
        const int rep_r = std::max(raw[k].rep_a, raw[k].rep_b);
        const int ra = uf.find(rep_l);
        const int rb = uf.find(rep_r);
        Merge m;
        m.left = node_of_root[static_cast<std::size_t>(ra)];
        m.right = node_of_root[static_cast<std::size_t>(rb)];
        m.height = raw[k].height;
        m.size = size_of_root[static_cast<std::size_t>(ra)] +
                 size_of_root[static_cast<std::size_t>(rb)];
        uf.unite(ra, rb);
        const int root = uf.find(ra);
        node_of_root[static_cast<std::size_t>(root)] =
            n + static_cast<int>(k);
        size_of_root[static_cast<std::size_t>(root)] = m.size;
        merges.push_back(m);
    }
    for (std::size_t k = 1; k < merges.size(); ++k) {
        if (merges[k].height < merges[k - 1].height) {
            throw ValidationError("merge height inversion detected");
        }
    }
    return merges;
}

}  // namespace

Dendrogram linkage(const DissimilarityMatrix& matrix, LinkageMethod method) {
    const int n = static_cast<int>(matrix.size());
    if (n < 2) throw ValidationError("linkage needs >= 2 elements");

    // Working condensed distances; clusters are merged in place into the
    // lower slot index.
    std::vector<double> d(matrix.lower_triangle());
    auto dist = [&](int i, int j) -> double& {
        return i > j ? d[tri_index(static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j))]
                     : d[tri_index(static_cast<std::size_t>(j),
                                   static_cast<std::size_t>(i))];
    };

    std::vector<char> active(static_cast<std::size_t>(n), 1);
    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<int> min_leaf(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) min_leaf[static_cast<std::size_t>(i)] = i;

    std::vector<RawMerge> raw;
    raw.reserve(static_cast<std::size_t>(n - 1));
    std::vector<int> chain;
    chain.reserve(static_cast<std::size_t>(n));
    int first_active = 0;

    while (static_cast<int>(raw.size()) < n - 1) {
        if (chain.size() < 2) {
            chain.clear();
            while (!active[static_cast<std::size_t>(first_active)]) {
                ++first_active;
            }
            chain.push_back(first_active);
        }
        for (;;) {
            const int a = chain.back();
            const int pred =
                chain.size() >= 2 ? chain[chain.size() - 2] : -1;
            // Seeding with the predecessor and replacing only on strict
            // improvement keeps the chain from cycling on tied distances;
            // among other ties the smallest slot wins via scan order.
            double best_d = std::numeric_limits<double>::infinity();
            int best = -1;
            if (pred >= 0) {
                best_d = dist(a, pred);
                best = pred;
            }
            for (int c = 0; c < n; ++c) {
                if (c == a || !active[static_cast<std::size_t>(c)]) continue;
                if (dist(a, c) < best_d) {
                    best_d = dist(a, c);
                    best = c;
                }
            }
            if (best == pred && pred >= 0) {
                chain.pop_back();
                chain.pop_back();
                const int lo = std::min(a, pred);
                const int hi = std::max(a, pred);
                raw.push_back(RawMerge{
                    min_leaf[static_cast<std::size_t>(lo)],
                    min_leaf[static_cast<std::size_t>(hi)], best_d});

                const int s_lo = size[static_cast<std::size_t>(lo)];
                const int s_hi = size[static_cast<std::size_t>(hi)];
                for (int c = 0; c < n; ++c) {
                    if (c == lo || c == hi ||
                        !active[static_cast<std::size_t>(c)]) {
                        continue;
                    }
                    double& dc = dist(lo, c);
                    const double dh = dist(hi, c);
                    switch (method) {
                        case LinkageMethod::Single:
                            dc = std::min(dc, dh);
                            break;
                        case LinkageMethod::Complete:
                            dc = std::max(dc, dh);
                            break;
                        case LinkageMethod::Average:
                            dc = (s_lo * dc + s_hi * dh) /
                                 static_cast<double>(s_lo + s_hi);
                            break;
                    }
                }
                active[static_cast<std::size_t>(hi)] = 0;
                size[static_cast<std::size_t>(lo)] = s_lo + s_hi;
                min_leaf[static_cast<std::size_t>(lo)] =
                    std::min(min_leaf[static_cast<std::size_t>(lo)],
                             min_leaf[static_cast<std::size_t>(hi)]);
                break;
            }
            chain.push_back(best);
        }
    }

    Dendrogram tree;
    tree.n_leaves = n;
    tree.leaf_names = matrix.ids();
    tree.merges = finalize_merges(n, std::move(raw));
    return tree;
}

Partition cut(const Dendrogram& tree, double threshold) {
    if (threshold < 0.0) throw ValidationError("cut threshold must be >= 0");
    const int n = tree.n_leaves;
    UnionFind uf(n);
    for (const auto& m : tree.merges) {
        if (!(m.height < threshold)) break;  // merges are height-sorted
        // Any leaf under each child works as a union representative; walk
        // down the left spine of each subtree.
        auto leaf_under = [&](int ref) {
            while (ref >= n) ref = tree.merges[static_cast<std::size_t>(ref - n)].left;
            return ref;
        };
        uf.unite(leaf_under(m.left), leaf_under(m.right));
    }

    Partition p;
    p.ids = tree.leaf_names;
    p.labels.assign(static_cast<std::size_t>(n), -1);
    std::unordered_map<int, int> cluster_of_root;
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        auto [it, inserted] = cluster_of_root.emplace(
            root, static_cast<int>(cluster_of_root.size()));
        p.labels[static_cast<std::size_t>(i)] = it->second;
    }
    p.n_clusters = static_cast<int>(cluster_of_root.size());
    return p;
}

namespace {

void append_node(const Dendrogram& tree, int ref, std::string& out) {
    const int n = tree.n_leaves;
    if (ref < n) {
        const std::string& name =
            tree.leaf_names[static_cast<std::size_t>(ref)];
        if (name.find_first_of("():,; \t\n") != std::string::npos ||
            name.empty()) {
            throw ValidationError("leaf name not representable in tree text: '" +
                                  name + "'");
        }
        out += name;
        return;
    }
    const Merge& m = tree.merges[static_cast<std::size_t>(ref - n)];
    const std::string h = format_double(m.height);
    out += '(';
    append_node(tree, m.left, out);
    out += ':';
    out += h;
    out += ',';
    append_node(tree, m.right, out);
    out += ':';
    out += h;
    out += ')';
}

}  // namespace

std::string to_newick(const Dendrogram& tree) {
    if (tree.n_leaves < 2 ||
        tree.merges.size() != static_cast<std::size_t>(tree.n_leaves - 1)) {
        throw ValidationError("dendrogram must have n_leaves - 1 merges");
    }
    std::string out;
    append_node(tree, tree.n_leaves + static_cast<int>(tree.merges.size()) - 1,
                out);
    out += ";\n";
    return out;
}

namespace {

// Each child carries the height of the merge that created its parent, so
// node heights are read back verbatim rather than reconstructed.
struct NewickParser {
    const std::string& text;
    std::size_t pos = 0;
    std::vector<std::string> leaf_names;
    std::vector<RawMerge> raw;

    explicit NewickParser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw DataError("tree parse error at offset " + std::to_string(pos) +
                        ": " + why);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(
                                        static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    }

    char peek() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        return text[pos];
    }

    double number() {
        skip_ws();
        std::size_t end = pos;
        while (end < text.size() &&
               std::string("+-.0123456789eE").find(text[end]) !=
                   std::string::npos) {
            ++end;
        }
        if (end == pos) fail("expected a number");
        const double v = std::strtod(text.substr(pos, end - pos).c_str(),
                                     nullptr);
        pos = end;
        return v;
    }

    // Returns (min leaf id of subtree, height annotation on this node).
    std::pair<int, double> node() {
        if (peek() == '(') {
            ++pos;
            auto [rep_l, h_l] = node();
            if (peek() != ',') fail("expected ','");
            ++pos;
            auto [rep_r, h_r] = node();
            if (peek() != ')') fail("expected ')'");
            ++pos;
            if (h_l != h_r) fail("children carry different merge heights");
            raw.push_back(RawMerge{rep_l, rep_r, h_l});
            // The annotation after this node is the parent's merge height;
            // the root has none and h_l is never used by a caller then.
            double parent_height = h_l;
            if (peek() == ':') {
                ++pos;
                parent_height = number();
            }
            return {std::min(rep_l, rep_r), parent_height};
        }
        skip_ws();
        std::size_t end = pos;
        while (end < text.size() &&
               std::string("():,; \t\n").find(text[end]) ==
                   std::string::npos) {
            ++end;
        }
        if (end == pos) fail("expected a leaf name");
        leaf_names.push_back(text.substr(pos, end - pos));
        const int leaf = static_cast<int>(leaf_names.size()) - 1;
        pos = end;
        if (peek() != ':') fail("leaf missing height annotation");
        ++pos;
        return {leaf, number()};
    }
};

}  // namespace

Dendrogram parse_newick(const std::string& text) {
    NewickParser p(text);
    if (p.peek() != '(') p.fail("tree must start with '('");
    p.node();
    if (p.peek() != ';') p.fail("expected trailing ';'");

    Dendrogram tree;
    tree.n_leaves = static_cast<int>(p.leaf_names.size());
    if (tree.n_leaves < 2) throw DataError("tree has fewer than 2 leaves");
    tree.leaf_names = std::move(p.leaf_names);
    tree.merges = finalize_merges(tree.n_leaves, std::move(p.raw));
    return tree;
}

}  // namespace tradeclust
