#include "cliquetree/graph.hpp"

#include <algorithm>
#include <sstream>

#include "cliquetree/errors.hpp"
#include "cliquetree/util.hpp"

namespace cliquetree {

DependencyGraph DependencyGraph::empty(int n) {
    DependencyGraph g;
    g.n = n;
    g.adj.assign(n, std::vector<char>(n, 0));
    return g;
}

void DependencyGraph::add_edge(int i, int j) {
    if (i == j) throw InternalError("graph: self loop");
    adj[i][j] = adj[j][i] = 1;
}

void DependencyGraph::add_weighted_edge(int i, int j, double w) {
    add_edge(i, j);
    weights[std::minmax(i, j)] = w;
}

void DependencyGraph::add_fill_edge(int i, int j) {
    add_edge(i, j);
    fill_ins.insert(std::minmax(i, j));
}

std::vector<std::pair<int, int>> DependencyGraph::edge_list() const {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adj[i][j]) edges.emplace_back(i, j);
    return edges;
}

int64_t DependencyGraph::edge_count() const {
    int64_t count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) count += adj[i][j] != 0;
    return count;
}

DependencyGraph prune(const NmiMatrix& matrix, double threshold) {
    if (threshold < 0.0) throw UserError("threshold must be non-negative");
    DependencyGraph g = DependencyGraph::empty(matrix.n_attrs);
    g.threshold = threshold;
    for (int i = 0; i < matrix.n_attrs; ++i) {
        for (int j = i + 1; j < matrix.n_attrs; ++j) {
            double w = matrix.at(i, j);
            if (w >= threshold) g.add_weighted_edge(i, j, w);
        }
    }
    return g;
}

DependencyGraph triangulate(const DependencyGraph& graph) {
    int n = graph.n;
    DependencyGraph result = graph;
    // Working adjacency, vertices removed as they are eliminated.
    std::vector<std::vector<char>> work = graph.adj;
    std::vector<char> alive(n, 1);

    auto fill_needed = [&](int v) {
        std::vector<int> nb;
        for (int u = 0; u < n; ++u)
            if (alive[u] && work[v][u]) nb.push_back(u);
        int missing = 0;
        for (size_t a = 0; a < nb.size(); ++a)
            for (size_t b = a + 1; b < nb.size(); ++b)
                if (!work[nb[a]][nb[b]]) ++missing;
        return missing;
    };

    for (int step = 0; step < n; ++step) {
        int best = -1, best_fill = 0;
        for (int v = 0; v < n; ++v) {
            if (!alive[v]) continue;
            int f = fill_needed(v);
            if (best < 0 || f < best_fill) {  // ties go to the lowest index
                best = v;
                best_fill = f;
            }
        }
        std::vector<int> nb;
        for (int u = 0; u < n; ++u)
            if (alive[u] && work[best][u]) nb.push_back(u);
        for (size_t a = 0; a < nb.size(); ++a) {
            for (size_t b = a + 1; b < nb.size(); ++b) {
                if (!work[nb[a]][nb[b]]) {
                    work[nb[a]][nb[b]] = work[nb[b]][nb[a]] = 1;
                    result.add_fill_edge(nb[a], nb[b]);
                }
            }
        }
        alive[best] = 0;
    }
    return result;
}

namespace {

// Maximum cardinality search: repeatedly pick the unvisited vertex with the
// most visited neighbors, lowest index on ties.
std::vector<int> mcs_order(const DependencyGraph& graph) {
    int n = graph.n;
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> weight(n, 0);
    std::vector<char> visited(n, 0);
    for (int step = 0; step < n; ++step) {
        int best = -1;
        for (int v = 0; v < n; ++v)
            if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = v;
        visited[best] = 1;
        order.push_back(best);
        for (int u = 0; u < n; ++u)
            if (!visited[u] && graph.adj[best][u]) ++weight[u];
    }
    return order;
}

}  // namespace

ChordalityResult is_chordal(const DependencyGraph& graph) {
    int n = graph.n;
    ChordalityResult result;
    if (n == 0) {
        result.chordal = true;
        return result;
    }
    std::vector<int> order = mcs_order(graph);
    std::vector<int> position(n);
    for (int i = 0; i < n; ++i) position[order[i]] = i;

    // Tarjan-Yannakakis check: the earlier neighbors of each vertex, minus
    // the latest of them, must all be adjacent to that latest one.
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        int parent = -1, parent_pos = -1;
        std::vector<int> earlier;
        for (int u = 0; u < n; ++u) {
            if (graph.adj[v][u] && position[u] < i) {
                earlier.push_back(u);
                if (position[u] > parent_pos) {
                    parent_pos = position[u];
                    parent = u;
                }
            }
        }
        for (int u : earlier) {
            if (u != parent && !graph.adj[parent][u]) return result;  // chordless cycle
        }
    }
    result.chordal = true;
    result.elimination_order.assign(order.rbegin(), order.rend());
    return result;
}

std::vector<MaximalClique> maximal_cliques(const DependencyGraph& graph) {
    auto chordality = is_chordal(graph);
    if (!chordality)
        throw UserError("maximal cliques: graph is not chordal; triangulate it first");

    int n = graph.n;
    std::vector<int> order = mcs_order(graph);
    std::vector<int> position(n);
    for (int i = 0; i < n; ++i) position[order[i]] = i;

    // Candidate cliques: each vertex together with its earlier neighbors in
    // MCS order. Every maximal clique of a chordal graph appears this way.
    std::vector<std::vector<int>> candidates;
    candidates.reserve(n);
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        std::vector<int> clique{v};
        for (int u = 0; u < n; ++u)
            if (graph.adj[v][u] && position[u] < i) clique.push_back(u);
        std::sort(clique.begin(), clique.end());
        candidates.push_back(std::move(clique));
    }
    // Drop candidates contained in another candidate.
    auto contains = [](const std::vector<int>& big, const std::vector<int>& small) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
    };
    std::vector<std::vector<int>> maximal;
    for (size_t i = 0; i < candidates.size(); ++i) {
        bool dominated = false;
        for (size_t j = 0; j < candidates.size() && !dominated; ++j) {
            if (i == j) continue;
            if (candidates[j].size() > candidates[i].size() &&
                contains(candidates[j], candidates[i]))
                dominated = true;
            // Equal sets cannot occur: the later of the two vertices would
            // list the earlier one among its earlier neighbors.
        }
        if (!dominated) maximal.push_back(candidates[i]);
    }
    std::sort(maximal.begin(), maximal.end());
    maximal.erase(std::unique(maximal.begin(), maximal.end()), maximal.end());

    std::vector<MaximalClique> out;
    out.reserve(maximal.size());
    for (size_t i = 0; i < maximal.size(); ++i)
        out.push_back(MaximalClique{static_cast<int>(i), std::move(maximal[i])});
    return out;
}

namespace {

void bron_kerbosch_rec(const DependencyGraph& g, std::vector<int>& r, std::vector<int> p,
                       std::vector<int> x, std::vector<std::vector<int>>& out) {
    if (p.empty() && x.empty()) {
        out.push_back(r);
        return;
    }
    // Pivot: vertex of P u X with the most neighbors in P, lowest index on ties.
    int pivot = -1, pivot_deg = -1;
    auto consider = [&](int u) {
        int deg = 0;
        for (int v : p)
            if (g.adj[u][v]) ++deg;
        if (deg > pivot_deg) {
            pivot_deg = deg;
            pivot = u;
        }
    };
    for (int u : p) consider(u);
    for (int u : x) consider(u);

    std::vector<int> expand;
    for (int v : p)
        if (!g.adj[pivot][v]) expand.push_back(v);

    for (int v : expand) {
        std::vector<int> p2, x2;
        for (int u : p)
            if (g.adj[v][u]) p2.push_back(u);
        for (int u : x)
            if (g.adj[v][u]) x2.push_back(u);
        r.push_back(v);
        bron_kerbosch_rec(g, r, std::move(p2), std::move(x2), out);
        r.pop_back();
        p.erase(std::find(p.begin(), p.end(), v));
        x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
}

}  // namespace

std::vector<std::vector<int>> bron_kerbosch(const DependencyGraph& graph) {
    if (graph.n == 0) return {};
    std::vector<int> p(graph.n);
    for (int i = 0; i < graph.n; ++i) p[i] = i;
    std::vector<int> r, x;
    std::vector<std::vector<int>> out;
    bron_kerbosch_rec(graph, r, std::move(p), std::move(x), out);
    for (auto& clique : out) std::sort(clique.begin(), clique.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::string to_dot(const DependencyGraph& graph, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "graph dependency_graph {\n";
    out << "  // threshold=" << format_double(graph.threshold) << "\n";
    for (int v = 0; v < graph.n; ++v)
        out << "  n" << v << " [label=\"" << names.at(v) << "\"];\n";
    for (auto [i, j] : graph.edge_list()) {
        out << "  n" << i << " -- n" << j;
        if (graph.fill_ins.count({i, j})) {
            out << " [style=dashed]";
        } else if (auto it = graph.weights.find({i, j}); it != graph.weights.end()) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", it->second);
            out << " [label=\"" << buf << "\"]";
        }
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace cliquetree
