#include "cliquetree/learn.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <set>

#include "cliquetree/errors.hpp"
#include "cliquetree/util.hpp"

namespace cliquetree {

namespace {

// Epsilon pushing the top candidate past the maximum NMI so it realizes the
// empty graph (the fully independent model).
constexpr double kAboveMaxEpsilon = 1e-9;

struct PipelineOutput {
    DependencyGraph triangulated;
    CliqueTree tree;
};

PipelineOutput run_structure_pipeline(const NmiMatrix& matrix, double threshold) {
    PipelineOutput out;
    out.triangulated = triangulate(prune(matrix, threshold));
    out.tree = spanning_tree(build_clique_graph(maximal_cliques(out.triangulated)));
    return out;
}

std::vector<ModelInfo::GraphEdge> graph_edges_of(const DependencyGraph& g) {
    std::vector<ModelInfo::GraphEdge> edges;
    for (auto [i, j] : g.edge_list()) {
        ModelInfo::GraphEdge e;
        e.a = i;
        e.b = j;
        e.fill = g.fill_ins.count({i, j}) > 0;
        if (!e.fill) e.weight = g.weights.at({i, j});
        edges.push_back(e);
    }
    return edges;
}

struct LikelihoodStats {
    double log_p = 0.0;      // -inf when any row has probability 0
    double avg_prob = 0.0;   // zero-probability rows contribute 0
};

LikelihoodStats likelihood_stats(const CliqueTreeModel& model, const CategoricalTable& table,
                                 std::span<const int64_t> rows) {
    LikelihoodStats stats;
    auto lps = model.row_log_probabilities(table, rows);
    double sum_prob = 0.0;
    for (double lp : lps) {
        if (lp == kNegInf) {
            stats.log_p = kNegInf;
        } else {
            if (stats.log_p != kNegInf) stats.log_p += lp;
            sum_prob += std::exp(lp);
        }
    }
    stats.avg_prob = rows.empty() ? 0.0 : sum_prob / static_cast<double>(rows.size());
    return stats;
}

}  // namespace

std::vector<double> candidate_thresholds(const NmiMatrix& matrix) {
    auto values = matrix.pair_values();
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<double> candidates;
    candidates.push_back(0.0);
    for (size_t i = 0; i + 1 < values.size(); ++i)
        candidates.push_back((values[i] + values[i + 1]) / 2.0);
    if (!values.empty()) candidates.push_back(values.back() + kAboveMaxEpsilon);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    return candidates;
}

SweepRecord evaluate_threshold(double threshold, const NmiMatrix& matrix,
                               const CategoricalTable& table, const DataSplit& split) {
    auto pipeline = run_structure_pipeline(matrix, threshold);
    CliqueTreeModel model =
        CliqueTreeModel::fit(pipeline.tree, table, split.train_indices, threshold);

    SweepRecord record;
    record.threshold = threshold;
    auto train = likelihood_stats(model, table, split.train_indices);
    auto test = likelihood_stats(model, table, split.test_indices);
    record.log_p_train = train.log_p;
    record.log_p_test = test.log_p;
    record.log_p_total =
        (train.log_p == kNegInf || test.log_p == kNegInf) ? kNegInf : train.log_p + test.log_p;
    record.model_entropy = model.entropy();
    record.avg_prob_train = train.avg_prob;
    record.avg_prob_test = test.avg_prob;
    record.n_cliques = static_cast<int>(pipeline.tree.nodes.size());
    record.max_clique_size = pipeline.tree.max_clique_size();
    return record;
}

ThresholdSweep sweep_thresholds(const NmiMatrix& matrix, const CategoricalTable& table,
                                const DataSplit& split, int jobs,
                                const SweepProgress& on_record) {
    ThresholdSweep sweep;
    sweep.candidates = candidate_thresholds(matrix);
    sweep.records.resize(sweep.candidates.size());
    // Candidates are independent; records land in candidate order no matter
    // how the pool schedules them. The progress frontier emits records in
    // ascending order as soon as everything below them is complete.
    std::mutex progress_mutex;
    std::vector<char> done(sweep.candidates.size(), 0);
    size_t frontier = 0;
    parallel_for(sweep.candidates.size(), jobs, [&](size_t i) {
        sweep.records[i] = evaluate_threshold(sweep.candidates[i], matrix, table, split);
        if (!on_record) return;
        std::lock_guard<std::mutex> lock(progress_mutex);
        done[i] = 1;
        while (frontier < done.size() && done[frontier]) {
            on_record(sweep.records[frontier]);
            ++frontier;
        }
    });

    bool seen_finite = false;
    for (const auto& r : sweep.records) {
        bool finite = r.log_p_total != kNegInf;
        if (finite && !seen_finite) {
            sweep.feasibility_threshold = r.threshold;
            seen_finite = true;
        } else if (!finite && seen_finite) {
            sweep.feasibility_contiguous = false;
        }
    }
    return sweep;
}

namespace {

// When even the fully independent model assigns zero probability, some test
// value never occurs in train; find one to name in the error.
std::string diagnose_infeasibility(const CategoricalTable& table, const DataSplit& split) {
    for (int a = 0; a < table.n_attrs(); ++a) {
        std::set<int32_t> train_values;
        const auto& col = table.column(a);
        for (int64_t r : split.train_indices) train_values.insert(col[r]);
        for (int64_t r : split.test_indices) {
            if (!train_values.count(col[r]))
                return "attribute '" + table.domain(a).name + "' value '" +
                       table.domain(a).value_name(col[r]) + "' (row " + std::to_string(r) +
                       ") never occurs in the training partition";
        }
    }
    return "no candidate threshold gives the data positive probability";
}

}  // namespace

SelectionResult select(const NmiMatrix& matrix, const CategoricalTable& table,
                       const DataSplit& split, const LearnOptions& options) {
    SelectionResult result;
    result.split = split;
    result.sweep = sweep_thresholds(matrix, table, split, options.jobs, options.progress);
    result.feasibility_threshold = result.sweep.feasibility_threshold;

    const SweepRecord* best = nullptr;
    for (const auto& r : result.sweep.records) {
        if (r.log_p_total == kNegInf) continue;
        if (!best || r.log_p_total > best->log_p_total) best = &r;  // ties keep the smaller threshold
    }
    if (!best)
        throw InfeasibleError("threshold selection failed: " +
                              diagnose_infeasibility(table, split));
    result.optimal_threshold = best->threshold;

    auto pipeline = run_structure_pipeline(matrix, result.optimal_threshold);
    ModelInfo info = options.info;
    info.seed = split.seed;
    info.train_fraction = split.train_fraction;
    info.refit_on_all = options.refit_on_all;
    info.graph_edges = graph_edges_of(pipeline.triangulated);
    if (options.refit_on_all) {
        auto rows = all_rows(table);
        result.model = CliqueTreeModel::fit(pipeline.tree, table, rows,
                                            result.optimal_threshold, std::move(info));
    } else {
        result.model = CliqueTreeModel::fit(pipeline.tree, table, split.train_indices,
                                            result.optimal_threshold, std::move(info));
    }
    return result;
}

MultiSplitResult multi_split_select(const NmiMatrix& matrix, const CategoricalTable& table,
                                    double train_fraction, const std::vector<uint64_t>& seeds,
                                    const LearnOptions& options) {
    if (seeds.empty()) throw UserError("multi-split selection needs at least one seed");
    MultiSplitResult result;
    std::vector<double> optima;
    for (uint64_t seed : seeds) {
        SplitOutcome outcome;
        outcome.seed = seed;
        try {
            DataSplit split = split_rows(table, train_fraction, seed);
            SelectionResult sel = select(matrix, table, split, options);
            outcome.ok = true;
            outcome.optimal_threshold = sel.optimal_threshold;
            outcome.feasibility_threshold = sel.feasibility_threshold;
            for (const auto& r : sel.sweep.records)
                if (r.threshold == sel.optimal_threshold) outcome.log_p_total = r.log_p_total;
            outcome.sweep = std::move(sel.sweep);
            optima.push_back(outcome.optimal_threshold);
        } catch (const InfeasibleError& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
        result.splits.push_back(std::move(outcome));
    }
    if (optima.empty())
        throw InfeasibleError("all " + std::to_string(seeds.size()) +
                              " splits were infeasible; last error: " +
                              result.splits.back().error);

    std::sort(optima.begin(), optima.end());
    size_t m = optima.size();
    result.median_threshold =
        (m % 2 == 1) ? optima[m / 2] : (optima[m / 2 - 1] + optima[m / 2]) / 2.0;
    result.spread = optima.back() - optima.front();

    auto pipeline = run_structure_pipeline(matrix, result.median_threshold);
    ModelInfo info = options.info;
    info.seed = seeds.front();
    info.train_fraction = train_fraction;
    info.refit_on_all = true;  // the final model always uses all observed data
    info.graph_edges = graph_edges_of(pipeline.triangulated);
    auto rows = all_rows(table);
    result.final_model =
        CliqueTreeModel::fit(pipeline.tree, table, rows, result.median_threshold, std::move(info));
    return result;
}

void write_sweep_tsv(std::ostream& out, const ThresholdSweep& sweep,
                     const std::string& provenance_comment) {
    if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
    out << "threshold\tlog_p_train\tlog_p_test\tlog_p_total\tentropy\t"
        << "avg_prob_train\tavg_prob_test\tn_cliques\tmax_clique_size\n";
    for (const auto& r : sweep.records) {
        out << format_double(r.threshold) << '\t' << format_double(r.log_p_train) << '\t'
            << format_double(r.log_p_test) << '\t' << format_double(r.log_p_total) << '\t'
            << format_double(r.model_entropy) << '\t' << format_double(r.avg_prob_train) << '\t'
            << format_double(r.avg_prob_test) << '\t' << r.n_cliques << '\t'
            << r.max_clique_size << '\n';
    }
}

}  // namespace cliquetree
