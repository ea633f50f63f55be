#ifndef CLIQUETREE_LEARN_HPP
#define CLIQUETREE_LEARN_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cliquetree/model.hpp"

namespace cliquetree {

struct SweepRecord {
    double threshold = 0.0;
    double log_p_train = kNegInf;
    double log_p_test = kNegInf;
    double log_p_total = kNegInf;
    double model_entropy = 0.0;
    double avg_prob_train = 0.0;
    double avg_prob_test = 0.0;
    int n_cliques = 0;
    int max_clique_size = 0;
};

struct ThresholdSweep {
    std::vector<double> candidates;     // ascending
    std::vector<SweepRecord> records;   // aligned with candidates
    // Smallest candidate with finite log_p_total, if any.
    std::optional<double> feasibility_threshold;
    // True when every candidate at or above the boundary is finite. The
    // theory suggests this but triangulations are not nested across
    // thresholds, so it is checked per sweep rather than assumed.
    bool feasibility_contiguous = true;
};

struct LearnOptions {
    bool refit_on_all = true;   // refit the selected model on train+test
    int jobs = 1;               // candidate evaluations run in parallel
    ModelInfo info;             // provenance template copied into models
    std::function<void(const SweepRecord&)> progress;  // streamed sweep records
};

// One candidate per distinct reachable graph: 0, the midpoints between
// consecutive distinct NMI values, and max+epsilon (the empty graph).
std::vector<double> candidate_thresholds(const NmiMatrix& matrix);

// prune -> triangulate -> cliques -> tree -> fit on train -> likelihoods.
SweepRecord evaluate_threshold(double threshold, const NmiMatrix& matrix,
                               const CategoricalTable& table, const DataSplit& split);

// on_record, when set, receives each record in ascending candidate order as
// soon as it and all records below it are done, so the curve streams while
// the pool is still working.
using SweepProgress = std::function<void(const SweepRecord&)>;

ThresholdSweep sweep_thresholds(const NmiMatrix& matrix, const CategoricalTable& table,
                                const DataSplit& split, int jobs = 1,
                                const SweepProgress& on_record = {});

struct SelectionResult {
    double optimal_threshold = 0.0;                 // argmax of log_p_total
    std::optional<double> feasibility_threshold;    // smallest finite candidate
    CliqueTreeModel model;
    ThresholdSweep sweep;
    DataSplit split;
};

// Posterior maximization with a uniform prior over candidate models: pick the
// candidate maximizing log P(train|M) + log P(test|M); ties go to the
// smallest threshold. Throws InfeasibleError naming the offending
// attribute/value when no candidate is feasible.
SelectionResult select(const NmiMatrix& matrix, const CategoricalTable& table,
                       const DataSplit& split, const LearnOptions& options = {});

struct SplitOutcome {
    uint64_t seed = 0;
    bool ok = false;
    double optimal_threshold = 0.0;
    std::optional<double> feasibility_threshold;
    double log_p_total = kNegInf;
    std::string error;
    ThresholdSweep sweep;
};

struct MultiSplitResult {
    std::vector<SplitOutcome> splits;
    double median_threshold = 0.0;   // over successful splits
    double spread = 0.0;             // max - min of successful optima
    CliqueTreeModel final_model;     // fit on all rows at the median threshold
};

// Repeats selection across seeds for robustness; the final model is fit on
// all rows at the median optimal threshold. Failed splits are reported and
// excluded from the median; all-failed is an error.
MultiSplitResult multi_split_select(const NmiMatrix& matrix, const CategoricalTable& table,
                                    double train_fraction, const std::vector<uint64_t>& seeds,
                                    const LearnOptions& options = {});

// TSV, one row per candidate. Lines starting with '#' carry provenance.
void write_sweep_tsv(std::ostream& out, const ThresholdSweep& sweep,
                     const std::string& provenance_comment = "");

}  // namespace cliquetree

#endif  // CLIQUETREE_LEARN_HPP
