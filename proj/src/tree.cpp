#include "cliquetree/tree.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cliquetree/errors.hpp"

namespace cliquetree {

namespace {

std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

class UnionFind {
  public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

  private:
    std::vector<int> parent_;
};

}  // namespace

CliqueGraph build_clique_graph(const std::vector<MaximalClique>& cliques) {
    CliqueGraph graph;
    graph.cliques = cliques;
    for (size_t i = 0; i < cliques.size(); ++i) {
        for (size_t j = i + 1; j < cliques.size(); ++j) {
            auto sep = intersect_sorted(cliques[i].members, cliques[j].members);
            if (!sep.empty())
                graph.edges.push_back(CliqueGraphEdge{static_cast<int>(i), static_cast<int>(j),
                                                      std::move(sep)});
        }
    }
    return graph;
}

int CliqueTree::max_clique_size() const {
    size_t best = 0;
    for (const auto& node : nodes) best = std::max(best, node.members.size());
    return static_cast<int>(best);
}

CliqueTree spanning_tree(const CliqueGraph& graph) {
    CliqueTree tree;
    tree.nodes = graph.cliques;

    // Kruskal on separator size; the tie-break on (a,b) makes the tree unique.
    std::vector<size_t> order(graph.edges.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t lhs, size_t rhs) {
        const auto& a = graph.edges[lhs];
        const auto& b = graph.edges[rhs];
        if (a.separator.size() != b.separator.size())
            return a.separator.size() > b.separator.size();
        if (a.a != b.a) return a.a < b.a;
        return a.b < b.b;
    });

    UnionFind uf(static_cast<int>(graph.cliques.size()));
    for (size_t k : order) {
        const auto& e = graph.edges[k];
        if (uf.unite(e.a, e.b)) tree.edges.push_back(CliqueTreeEdge{e.a, e.b, e.separator});
    }
    std::sort(tree.edges.begin(), tree.edges.end(), [](const auto& x, const auto& y) {
        return std::make_pair(x.a, x.b) < std::make_pair(y.a, y.b);
    });

    // Component ids in order of first appearance.
    tree.component.assign(tree.nodes.size(), -1);
    int next_component = 0;
    for (size_t v = 0; v < tree.nodes.size(); ++v) {
        int root = uf.find(static_cast<int>(v));
        if (tree.component[root] < 0) tree.component[root] = next_component++;
        tree.component[v] = tree.component[root];
    }
    tree.n_components = next_component;

    if (!verify_rip(tree))
        throw InternalError("clique tree violates the running intersection property");
    return tree;
}

bool verify_rip(const CliqueTree& tree) {
    // Collect the attributes present anywhere.
    std::vector<int> attrs;
    for (const auto& node : tree.nodes)
        attrs.insert(attrs.end(), node.members.begin(), node.members.end());
    std::sort(attrs.begin(), attrs.end());
    attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());

    auto node_has = [&](int node, int attr) {
        const auto& m = tree.nodes[node].members;
        return std::binary_search(m.begin(), m.end(), attr);
    };

    for (int attr : attrs) {
        std::vector<int> holders;
        for (size_t v = 0; v < tree.nodes.size(); ++v)
            if (node_has(static_cast<int>(v), attr)) holders.push_back(static_cast<int>(v));
        if (holders.size() <= 1) continue;
        // BFS over tree edges whose both endpoints contain the attribute.
        std::vector<std::vector<int>> adj(tree.nodes.size());
        for (const auto& e : tree.edges) {
            if (node_has(e.a, attr) && node_has(e.b, attr)) {
                adj[e.a].push_back(e.b);
                adj[e.b].push_back(e.a);
            }
        }
        std::vector<char> seen(tree.nodes.size(), 0);
        std::vector<int> stack{holders[0]};
        seen[holders[0]] = 1;
        size_t reached = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : adj[v]) {
                if (!seen[u]) {
                    seen[u] = 1;
                    ++reached;
                    stack.push_back(u);
                }
            }
        }
        if (reached != holders.size()) return false;
    }
    return true;
}

std::string to_dot(const CliqueTree& tree, const std::vector<std::string>& names) {
    std::ostringstream out;
    auto label = [&](const std::vector<int>& members) {
        std::string s;
        for (size_t i = 0; i < members.size(); ++i) {
            if (i) s += ",";
            s += names.at(members[i]);
        }
        return s;
    };
    out << "graph clique_tree {\n  node [shape=ellipse];\n";
    for (size_t v = 0; v < tree.nodes.size(); ++v)
        out << "  c" << v << " [label=\"" << label(tree.nodes[v].members) << "\"];\n";
    for (const auto& e : tree.edges)
        out << "  c" << e.a << " -- c" << e.b << " [label=\"" << label(e.separator) << "\"];\n";
    out << "}\n";
    return out.str();
}

}  // namespace cliquetree
