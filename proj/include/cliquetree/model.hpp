#ifndef CLIQUETREE_MODEL_HPP
#define CLIQUETREE_MODEL_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliquetree/dataset.hpp"
#include "cliquetree/tree.hpp"

namespace cliquetree {

// Sparse empirical count table over a sorted attribute subset. Counts are
// integers so that marginal consistency between cliques and separators is
// exact, never a floating-point coincidence.
class MarginalTable {
  public:
    struct Entry {
        std::vector<int32_t> codes;  // one per attr, in attrs order
        int64_t count = 0;
    };

    MarginalTable() = default;

    static MarginalTable tally(const CategoricalTable& table, std::vector<int> attrs,
                               std::span<const int64_t> rows);
    // Rebuild from serialized parts; validates codes, ordering and the
    // count-sum invariant.
    static MarginalTable from_entries(std::vector<int> attrs, std::vector<int64_t> cards,
                                      std::vector<Entry> entries, int64_t total);

    const std::vector<int>& attrs() const { return attrs_; }
    const std::vector<int64_t>& cardinalities() const { return cards_; }
    int64_t total() const { return total_; }
    const std::vector<Entry>& entries() const { return entries_; }

    // Count of the row's restriction to this table's attributes; row spans
    // the full table width.
    int64_t count_of_row(std::span<const int32_t> row) const;
    // Count of a tuple given in attrs order (arity must match).
    int64_t count_of_tuple(std::span<const int32_t> tuple) const;

    // -sum (c/total) ln(c/total), in nats.
    double entropy() const;

    // Number of possible tuples (product of cardinalities), as a double;
    // used by Laplace smoothing at scoring time.
    double domain_size() const;

    // Marginalize onto a subset of this table's attributes.
    MarginalTable marginalize(const std::vector<int>& onto_attrs) const;

    bool operator==(const MarginalTable& other) const;

  private:
    std::vector<int> attrs_;        // sorted attribute ids
    std::vector<int64_t> cards_;    // cardinality per attr
    // Mixed-radix packing (big endian, so numeric key order == lexicographic
    // tuple order). Disabled when the radix product would overflow.
    bool packed_ = false;
    std::vector<uint64_t> strides_;
    std::vector<Entry> entries_;    // sorted lexicographically by codes
    std::unordered_map<uint64_t, int64_t> lookup_;  // packed key -> count
    int64_t total_ = 0;

    void init_packing();
    void finalize();
    uint64_t pack(std::span<const int32_t> tuple) const;
};

// Provenance carried inside a fitted model and echoed into every artifact.
struct ModelInfo {
    std::string tool_version;
    uint64_t seed = 0;
    double train_fraction = 0.0;
    double laplace_alpha = 0.0;   // scoring-time smoothing; 0 = off
    bool refit_on_all = false;
    std::string input_hash;       // fnv1a64 hex of the input file, "" if in-memory
    std::string config;           // CLI config echo, "" for library use
    // Column selection applied to the raw input at fit time, so scoring can
    // re-apply it to files shaped like the original input.
    std::vector<int> selected_columns;
    int input_column_count = 0;
    struct GraphEdge {
        int a = 0, b = 0;
        double weight = 0.0;      // NMI; meaningless when fill is true
        bool fill = false;
    };
    // Triangulated dependency graph the tree was built from, kept so `export`
    // can reproduce the graph without the original data.
    std::vector<GraphEdge> graph_edges;
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Fitted clique-tree density: the tree, one count table per clique and per
// separator (all tallied over the same rows), and cached entropy.
class CliqueTreeModel {
  public:
    CliqueTreeModel() = default;

    static CliqueTreeModel fit(const CliqueTree& tree, const CategoricalTable& table,
                               std::span<const int64_t> rows, double threshold,
                               ModelInfo info = {});

    const CliqueTree& tree() const { return tree_; }
    const std::vector<MarginalTable>& clique_tables() const { return clique_tables_; }
    const std::vector<MarginalTable>& separator_tables() const { return separator_tables_; }
    const std::vector<AttributeDomain>& domains() const { return domains_; }
    double threshold() const { return threshold_; }
    int64_t fit_row_count() const { return fit_rows_; }
    const ModelInfo& info() const { return info_; }
    ModelInfo& info() { return info_; }

    // Clique/separator entropy difference (nats); equals the Shannon entropy
    // of the factored distribution. Cached at fit time.
    double entropy() const { return entropy_; }

    // log of the factored probability of a full row (codes across all modeled
    // attributes). A zero clique factor short-circuits to -inf before any
    // separator is touched, so no division by zero can occur. alpha > 0
    // applies Laplace smoothing per factor (scoring aid; not a density).
    double log_probability(std::span<const int32_t> row, double alpha = 0.0) const;
    double probability(std::span<const int32_t> row, double alpha = 0.0) const;

    // Per-row log probabilities in row order.
    std::vector<double> row_log_probabilities(const CategoricalTable& table,
                                              std::span<const int64_t> rows,
                                              double alpha = 0.0) const;

    // Sum of log probabilities; -inf as soon as any row has probability 0.
    double log_likelihood(const CategoricalTable& table,
                          std::span<const int64_t> rows) const;

    // Visit every full assignment with its probability. Errors when the
    // number of assignments exceeds cap. Desk-scale oracle for normalization
    // and entropy checks.
    void enumerate_distribution(
        uint64_t cap,
        const std::function<void(std::span<const int32_t>, double)>& visit) const;
    static constexpr uint64_t kDefaultEnumerationCap = 1000000;

    nlohmann::ordered_json to_json() const;
    static CliqueTreeModel from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static CliqueTreeModel load(const std::filesystem::path& path);

  private:
    CliqueTree tree_;
    std::vector<MarginalTable> clique_tables_;
    std::vector<MarginalTable> separator_tables_;
    std::vector<AttributeDomain> domains_;
    double threshold_ = 0.0;
    int64_t fit_rows_ = 0;
    double entropy_ = 0.0;
    ModelInfo info_;

    void compute_entropy();
    void validate() const;
};

}  // namespace cliquetree

#endif  // CLIQUETREE_MODEL_HPP
