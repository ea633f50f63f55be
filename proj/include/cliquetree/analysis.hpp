#ifndef CLIQUETREE_ANALYSIS_HPP
#define CLIQUETREE_ANALYSIS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cliquetree/model.hpp"

namespace cliquetree {

// Rows grouped by their value tuple on one clique's attributes. Each clique
// of the tree indexes the data this way; rows sharing a tuple form a cluster.
struct CliqueCluster {
    std::vector<int32_t> codes;    // tuple, in attrs order
    std::vector<int64_t> rows;     // ascending
};

struct CliqueIndex {
    int clique_id = -1;            // -1 for ad-hoc attribute subsets
    std::vector<int> attrs;
    std::vector<CliqueCluster> clusters;  // descending size, ties by tuple
    int64_t row_count = 0;
};

CliqueIndex cluster_by_attrs(const CategoricalTable& table, const std::vector<int>& attrs);
CliqueIndex cluster_by_clique(const CliqueTreeModel& model, const CategoricalTable& table,
                              int clique_id);

// Fraction of vertex cliques on which the two rows carry identical tuples.
// Symmetric and reflexive; not a metric.
double similarity(const CliqueTreeModel& model, const CategoricalTable& table,
                  int64_t row_u, int64_t row_v);

// All rows whose restriction to the clique equals the tuple.
std::vector<int64_t> query_cluster(const CliqueTreeModel& model, const CategoricalTable& table,
                                   int clique_id, const std::vector<int32_t>& tuple);

// Empirical CDFs of clique-factor probabilities and of the joint, over a
// reference row set. percentile(p) = 100 * fraction of reference values
// strictly below p, so ties take the lower rank and the most common
// configuration never reports 100.
class PercentileTables {
  public:
    PercentileTables() = default;
    double clique_percentile(int clique_id, double probability) const;
    double overall_percentile(double probability) const;
    int n_cliques() const { return static_cast<int>(per_clique_.size()); }

  private:
    friend PercentileTables build_percentiles(const CliqueTreeModel&, const CategoricalTable&,
                                              std::span<const int64_t>, double);
    std::vector<std::vector<double>> per_clique_;  // sorted ascending
    std::vector<double> overall_;                  // sorted ascending
};

// alpha must match the smoothing used for the queries so reference and query
// probabilities live on the same scale.
PercentileTables build_percentiles(const CliqueTreeModel& model, const CategoricalTable& table,
                                   std::span<const int64_t> reference_rows, double alpha = 0.0);

struct CliqueScore {
    int clique_id = 0;
    double probability = 0.0;
    double percentile = 0.0;
};

struct AnomalyReport {
    int64_t row_index = 0;
    double probability = 0.0;
    double log_probability = kNegInf;
    double overall_percentile = 0.0;
    std::vector<CliqueScore> per_clique;
    int explanation_clique = -1;        // minimum clique percentile, lowest id on ties
    double explanation_percentile = 0.0;
    std::string error;                  // non-empty: row could not be encoded
};

// Score rows against the model; reports come back in row order (use
// sort_reports / write_anomaly_tsv for the anomalies-first ordering).
std::vector<AnomalyReport> score_rows(const CliqueTreeModel& model,
                                      const CategoricalTable& table,
                                      std::span<const int64_t> rows,
                                      const PercentileTables& percentiles,
                                      double alpha = 0.0);

// Ascending by probability; zero-probability rows first, ordered among
// themselves by explanation percentile then row index. Unencodable rows sort
// before everything (maximal anomaly).
void sort_reports(std::vector<AnomalyReport>& reports);

void write_anomaly_tsv(std::ostream& out, std::vector<AnomalyReport> reports,
                       const CliqueTreeModel& model,
                       const std::string& provenance_comment = "");
void write_anomaly_jsonl(std::ostream& out, std::vector<AnomalyReport> reports,
                         const CliqueTreeModel& model);

}  // namespace cliquetree

#endif  // CLIQUETREE_ANALYSIS_HPP
