#ifndef CLIQUETREE_GRAPH_HPP
#define CLIQUETREE_GRAPH_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cliquetree/information.hpp"

namespace cliquetree {

// Thresholded attribute dependency graph. Edges that came from the NMI
// matrix carry their weight; fill-in edges added by triangulation carry no
// weight and never enter any NMI statistic.
struct DependencyGraph {
    int n = 0;
    double threshold = 0.0;
    std::vector<std::vector<char>> adj;                  // symmetric, no self loops
    std::map<std::pair<int, int>, double> weights;       // (i<j) -> NMI, original edges only
    std::set<std::pair<int, int>> fill_ins;              // (i<j)

    static DependencyGraph empty(int n);
    bool has_edge(int i, int j) const { return adj[i][j] != 0; }
    void add_edge(int i, int j);
    void add_weighted_edge(int i, int j, double w);
    void add_fill_edge(int i, int j);
    // All edges (i<j) in lexicographic order.
    std::vector<std::pair<int, int>> edge_list() const;
    int64_t edge_count() const;
};

// Edge (i,j) retained iff matrix[i][j] >= threshold. threshold may exceed 1
// (the sweep uses max+epsilon to realize the empty graph).
DependencyGraph prune(const NmiMatrix& matrix, double threshold);

// Greedy min-fill elimination: repeatedly eliminate the vertex whose
// neighborhood needs the fewest missing edges, lowest index on ties.
// The result is chordal; added edges are recorded in fill_ins.
DependencyGraph triangulate(const DependencyGraph& graph);

struct ChordalityResult {
    bool chordal = false;
    // Perfect elimination order (witness) when chordal.
    std::vector<int> elimination_order;
    explicit operator bool() const { return chordal; }
};

// Maximum cardinality search + perfect-elimination-order verification.
ChordalityResult is_chordal(const DependencyGraph& graph);

struct MaximalClique {
    int id = 0;
    std::vector<int> members;  // sorted ascending
};

// All maximal cliques of a chordal graph, read off the MCS order. Each clique
// is sorted; the list is sorted lexicographically and ids follow list order.
// Throws UserError on non-chordal input (triangulate first).
std::vector<MaximalClique> maximal_cliques(const DependencyGraph& graph);

// Bron-Kerbosch with pivoting; works on any graph. Kept as the independent
// cross-check for the chordal fast path.
std::vector<std::vector<int>> bron_kerbosch(const DependencyGraph& graph);

// DOT text; fill-in edges are dashed, weighted edges labeled.
std::string to_dot(const DependencyGraph& graph, const std::vector<std::string>& names);

}  // namespace cliquetree

#endif  // CLIQUETREE_GRAPH_HPP
