#ifndef CLIQUETREE_TREE_HPP
#define CLIQUETREE_TREE_HPP

#include <string>
#include <vector>

#include "cliquetree/graph.hpp"

namespace cliquetree {

struct CliqueGraphEdge {
    int a = 0, b = 0;               // clique ids, a < b
    std::vector<int> separator;     // intersection of the two cliques, sorted
};

// Cliques plus every pair with a non-empty intersection; the separator is the
// edge label and its size the edge weight.
struct CliqueGraph {
    std::vector<MaximalClique> cliques;
    std::vector<CliqueGraphEdge> edges;  // (a,b) lexicographic order
};

CliqueGraph build_clique_graph(const std::vector<MaximalClique>& cliques);

struct CliqueTreeEdge {
    int a = 0, b = 0;
    std::vector<int> separator;
};

// Spanning forest of the clique graph maximizing total separator size
// (equivalently, minimum spanning tree under 1/|separator| distances).
// Satisfies the running intersection property for cliques of a chordal graph.
struct CliqueTree {
    std::vector<MaximalClique> nodes;
    std::vector<CliqueTreeEdge> edges;
    std::vector<int> component;     // per node, 0-based component id
    int n_components = 0;

    int max_clique_size() const;
};

// Kruskal over edges ordered by (descending |separator|, ascending (a,b)).
// Verifies the running intersection property and throws InternalError if it
// does not hold (it must, for cliques of a chordal graph).
CliqueTree spanning_tree(const CliqueGraph& graph);

// True iff, for every attribute, the tree nodes containing it induce a
// connected subtree. Callable on arbitrary hand-built trees.
bool verify_rip(const CliqueTree& tree);

std::string to_dot(const CliqueTree& tree, const std::vector<std::string>& names);

}  // namespace cliquetree

#endif  // CLIQUETREE_TREE_HPP
