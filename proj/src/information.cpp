#include "cliquetree/information.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "cliquetree/errors.hpp"
#include "cliquetree/util.hpp"

namespace cliquetree {

namespace {

// H = ln n - (sum c ln c) / n, over nonzero counts.
double entropy_of_counts(const std::vector<int64_t>& counts, int64_t n) {
    double sum_clnc = 0.0;
    for (int64_t c : counts) {
        if (c > 0) sum_clnc += static_cast<double>(c) * std::log(static_cast<double>(c));
    }
    double h = std::log(static_cast<double>(n)) - sum_clnc / static_cast<double>(n);
    return h < 0.0 ? 0.0 : h;
}

std::vector<int64_t> value_counts(const CategoricalTable& table, int attr,
                                  std::span<const int64_t> rows) {
    std::vector<int64_t> counts(table.domain(attr).cardinality(), 0);
    const auto& col = table.column(attr);
    for (int64_t r : rows) ++counts[col[r]];
    return counts;
}

}  // namespace

double entropy(const CategoricalTable& table, int attr, std::span<const int64_t> rows) {
    if (rows.empty()) throw UserError("entropy: empty row subset");
    return entropy_of_counts(value_counts(table, attr, rows),
                             static_cast<int64_t>(rows.size()));
}

double mutual_information(const CategoricalTable& table, int x, int y,
                          std::span<const int64_t> rows) {
    if (rows.empty()) throw UserError("mutual information: empty row subset");
    if (x == y) throw UserError("mutual information: attributes must differ");
    const auto& cx = table.column(x);
    const auto& cy = table.column(y);
    int64_t card_x = table.domain(x).cardinality();
    int64_t card_y = table.domain(y).cardinality();
    int64_t n = static_cast<int64_t>(rows.size());

    std::vector<int64_t> marg_x(card_x, 0), marg_y(card_y, 0);
    // Dense joint counts for small domains, hashed otherwise.
    std::unordered_map<int64_t, int64_t> sparse_joint;
    std::vector<int64_t> dense_joint;
    bool dense = card_x * card_y <= 1 << 22;
    if (dense) dense_joint.assign(card_x * card_y, 0);
    for (int64_t r : rows) {
        int64_t a = cx[r], b = cy[r];
        ++marg_x[a];
        ++marg_y[b];
        if (dense)
            ++dense_joint[a * card_y + b];
        else
            ++sparse_joint[a * card_y + b];
    }

    double dn = static_cast<double>(n);
    double mi = 0.0;
    auto accumulate = [&](int64_t key, int64_t c) {
        if (c == 0) return;
        int64_t a = key / card_y, b = key % card_y;
        double pc = static_cast<double>(c);
        mi += pc / dn *
              std::log(pc * dn / (static_cast<double>(marg_x[a]) * static_cast<double>(marg_y[b])));
    };
    if (dense) {
        for (int64_t key = 0; key < static_cast<int64_t>(dense_joint.size()); ++key)
            accumulate(key, dense_joint[key]);
    } else {
        // Sort keys so the summation order (and thus the rounding) is fixed.
        std::vector<std::pair<int64_t, int64_t>> items(sparse_joint.begin(), sparse_joint.end());
        std::sort(items.begin(), items.end());
        for (auto& [key, c] : items) accumulate(key, c);
    }
    return mi < 0.0 ? 0.0 : mi;  // clamp floating point noise
}

double nmi(const CategoricalTable& table, int x, int y, std::span<const int64_t> rows) {
    double hx = entropy(table, x, rows);
    double hy = entropy(table, y, rows);
    double hmin = std::min(hx, hy);
    if (hmin <= 0.0) return 0.0;  // a constant attribute is independent of everything
    double value = mutual_information(table, x, y, rows) / hmin;
    return std::clamp(value, 0.0, 1.0);
}

std::vector<double> NmiMatrix::pair_values() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n_attrs) * (n_attrs - 1) / 2);
    for (int i = 0; i < n_attrs; ++i)
        for (int j = i + 1; j < n_attrs; ++j) out.push_back(at(i, j));
    return out;
}

NmiMatrix nmi_matrix(const CategoricalTable& table, std::span<const int64_t> rows, int jobs) {
    int n = table.n_attrs();
    if (n < 2) throw UserError("NMI matrix needs at least 2 attributes");
    if (rows.empty()) throw UserError("NMI matrix: empty row subset");

    NmiMatrix m;
    m.n_attrs = n;
    m.values.assign(static_cast<size_t>(n) * n, 0.0);
    m.entropies.resize(n);
    for (int i = 0; i < n; ++i) m.entropies[i] = entropy(table, i, rows);

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    // Each cell is independent, so any schedule gives identical results.
    parallel_for(pairs.size(), jobs, [&](size_t k) {
        auto [i, j] = pairs[k];
        double hmin = std::min(m.entropies[i], m.entropies[j]);
        double value = 0.0;
        if (hmin > 0.0) {
            value = std::clamp(mutual_information(table, i, j, rows) / hmin, 0.0, 1.0);
        }
        m.values[static_cast<size_t>(i) * n + j] = value;
        m.values[static_cast<size_t>(j) * n + i] = value;
    });
    return m;
}

std::vector<std::pair<double, int64_t>> nmi_histogram(const NmiMatrix& matrix,
                                                      double bin_width) {
    if (!(bin_width > 0.0)) throw UserError("histogram bin width must be positive");
    auto values = matrix.pair_values();
    double max_value = 0.0;
    for (double v : values) max_value = std::max(max_value, v);
    size_t n_bins = static_cast<size_t>(std::floor(max_value / bin_width)) + 1;
    std::vector<int64_t> counts(n_bins, 0);
    for (double v : values) {
        size_t bin = std::min(static_cast<size_t>(std::floor(v / bin_width)), n_bins - 1);
        ++counts[bin];
    }
    std::vector<std::pair<double, int64_t>> out;
    out.reserve(n_bins);
    for (size_t b = 0; b < n_bins; ++b) out.emplace_back(static_cast<double>(b) * bin_width, counts[b]);
    return out;
}

}  // namespace cliquetree
