#ifndef CLIQUETREE_INFORMATION_HPP
#define CLIQUETREE_INFORMATION_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cliquetree/dataset.hpp"

namespace cliquetree {

// Symmetric normalized-mutual-information matrix over all attribute pairs.
// Entries are clamped to [0,1]; the diagonal is unused and left at 0.
// Entropies are in nats (natural log everywhere in this library).
struct NmiMatrix {
    int n_attrs = 0;
    std::vector<double> values;     // row-major n x n, symmetric
    std::vector<double> entropies;  // per attribute

    double at(int i, int j) const { return values[static_cast<size_t>(i) * n_attrs + j]; }
    // The n(n-1)/2 pair values (i < j), in (i,j) lexicographic order.
    std::vector<double> pair_values() const;
};

// Empirical entropy H(X) = -sum p ln p over the given rows.
double entropy(const CategoricalTable& table, int attr, std::span<const int64_t> rows);

// Empirical mutual information I(X,Y); zero-count cells contribute 0, and
// tiny negative values from floating-point cancellation are clamped to 0.
double mutual_information(const CategoricalTable& table, int x, int y,
                          std::span<const int64_t> rows);

// I(X,Y) / min(H(X), H(Y)), clamped to [0,1]. A constant attribute has zero
// entropy and is defined to have NMI 0 with everything: it carries no
// information and ends up as a singleton clique.
double nmi(const CategoricalTable& table, int x, int y, std::span<const int64_t> rows);

NmiMatrix nmi_matrix(const CategoricalTable& table, std::span<const int64_t> rows,
                     int jobs = 1);

// Histogram of the pair values: one (bin_lower, count) per bin of the given
// width, from 0 through the bin containing the maximum value. Plot data.
std::vector<std::pair<double, int64_t>> nmi_histogram(const NmiMatrix& matrix,
                                                      double bin_width);

}  // namespace cliquetree

#endif  // CLIQUETREE_INFORMATION_HPP
