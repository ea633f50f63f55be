// Command-line driver: learns a clique-tree density over a categorical CSV,
// sweeps the NMI threshold with train/test posterior selection, and uses the
// fitted model for anomaly scoring, clique clustering and graph export.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cliquetree/analysis.hpp"
#include "cliquetree/errors.hpp"
#include "cliquetree/learn.hpp"
#include "cliquetree/util.hpp"
#include "cliquetree/version.hpp"

namespace fs = std::filesystem;
using namespace cliquetree;

namespace {

struct InputOptions {
    std::string path;
    std::string delimiter = ",";
    bool header = false;
    std::string missing_token = "?";
    int class_column = 0;          // dropped from the modeled attributes; -1 keeps all
    std::vector<int> columns;      // explicit 0-based selection, overrides class_column
};

void add_input_flags(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("--input", in.path, "input CSV file")->required();
    cmd->add_option("--delimiter", in.delimiter, "field delimiter (default ,)");
    cmd->add_flag("--header", in.header, "first row is a header");
    cmd->add_option("--missing-token", in.missing_token,
                    "marker recorded for missing values; encoded like any category");
    cmd->add_option("--class-column", in.class_column,
                    "0-based column excluded from modeling (default 0; -1 keeps all columns)");
    cmd->add_option("--columns", in.columns,
                    "explicit 0-based columns to model (overrides --class-column)")
        ->delimiter(',');
}

CsvOptions csv_options(const InputOptions& in) {
    if (in.delimiter.size() != 1) throw UserError("--delimiter must be a single character");
    CsvOptions opts;
    opts.delimiter = in.delimiter[0];
    opts.header_row = in.header;
    opts.missing_token = in.missing_token;
    return opts;
}

std::string hash_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UserError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return to_hex(fnv1a64(buf.str()));
}

struct LoadedInput {
    RawTable raw;
    CategoricalTable table;       // after column selection
    std::vector<int> selected;    // raw column indices modeled
    std::string input_hash;
};

LoadedInput load_input(const InputOptions& in) {
    LoadedInput loaded;
    loaded.input_hash = hash_file(in.path);
    loaded.raw = read_csv_file(in.path, csv_options(in));
    auto full = encode_table(loaded.raw);
    if (!in.columns.empty()) {
        loaded.selected = in.columns;
    } else {
        for (int c = 0; c < full.n_attrs(); ++c)
            if (c != in.class_column) loaded.selected.push_back(c);
        if (loaded.selected.empty()) throw UserError("no columns left to model");
    }
    loaded.table = select_columns(full, loaded.selected);
    if (loaded.table.n_attrs() < 1) throw UserError("no columns left to model");
    return loaded;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_seeds(const std::vector<uint64_t>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write file: " + path.string());
    out << text;
    if (!out) throw UserError("failed writing file: " + path.string());
}

// ---------------------------------------------------------------------------
// sweep / fit

struct SweepArgs {
    InputOptions input;
    double train_fraction = 0.8;
    uint64_t seed = 17;
    int n_splits = 1;
    std::vector<uint64_t> seeds;   // explicit list overrides seed/n_splits
    std::string nmi_rows = "full";
    double threshold = -1.0;       // >= 0 skips selection and fits directly
    bool no_refit = false;
    double laplace = 0.0;
    double hist_width = 0.05;
    int jobs = 0;
    std::string out_dir;
};

// Canonical config echo; excludes --jobs and --out since neither affects
// any computed value.
std::string sweep_config_echo(const SweepArgs& args, const std::vector<uint64_t>& seeds) {
    std::ostringstream s;
    s << "cmd=sweep input=" << fs::path(args.input.path).filename().string()
      << " delimiter=" << args.input.delimiter << " header=" << (args.input.header ? 1 : 0)
      << " missing_token=" << args.input.missing_token;
    if (!args.input.columns.empty())
        s << " columns=" << join_ints(args.input.columns);
    else
        s << " class_column=" << args.input.class_column;
    s << " train_fraction=" << format_double(args.train_fraction)
      << " seeds=" << join_seeds(seeds) << " nmi_rows=" << args.nmi_rows;
    if (args.threshold >= 0.0) s << " threshold=" << format_double(args.threshold);
    s << " refit_on_all=" << (args.no_refit ? 0 : 1)
      << " laplace=" << format_double(args.laplace)
      << " hist_width=" << format_double(args.hist_width);
    return s.str();
}

std::string provenance(const std::string& config, const std::string& input_hash) {
    return "tool_version=" + std::string(kToolVersion) + " input_hash=" + input_hash +
           " config{" + config + "}";
}

nlohmann::ordered_json provenance_json(const std::string& config, const std::string& hash) {
    nlohmann::ordered_json doc;
    doc["tool_version"] = kToolVersion;
    doc["config"] = config;
    doc["input_hash"] = hash;
    return doc;
}

int run_sweep(const SweepArgs& args) {
    fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    auto loaded = load_input(args.input);
    const auto& table = loaded.table;
    int jobs = args.jobs > 0 ? args.jobs : default_jobs();

    std::vector<uint64_t> seeds = args.seeds;
    if (seeds.empty())
        for (int i = 0; i < args.n_splits; ++i) seeds.push_back(args.seed + static_cast<uint64_t>(i));
    std::string config = sweep_config_echo(args, seeds);
    std::string stamp = provenance(config, loaded.input_hash);

    ModelInfo info;
    info.tool_version = kToolVersion;
    info.laplace_alpha = args.laplace;
    info.input_hash = loaded.input_hash;
    info.config = config;
    info.selected_columns = loaded.selected;
    info.input_column_count = static_cast<int>(loaded.raw.column_names.size());

    // Direct fit at a fixed threshold: no split, no selection.
    if (args.threshold >= 0.0) {
        auto rows = all_rows(table);
        auto matrix = nmi_matrix(table, rows, jobs);
        auto triangulated = triangulate(prune(matrix, args.threshold));
        auto tree = spanning_tree(build_clique_graph(maximal_cliques(triangulated)));
        info.refit_on_all = true;
        for (auto [i, j] : triangulated.edge_list()) {
            ModelInfo::GraphEdge e;
            e.a = i;
            e.b = j;
            e.fill = triangulated.fill_ins.count({i, j}) > 0;
            if (!e.fill) e.weight = triangulated.weights.at({i, j});
            info.graph_edges.push_back(e);
        }
        auto model = CliqueTreeModel::fit(tree, table, rows, args.threshold, info);
        model.save(out_dir / "model.json");
        std::cout << "fit: threshold=" << format_double(args.threshold)
                  << " cliques=" << model.tree().nodes.size()
                  << " max_clique=" << model.tree().max_clique_size()
                  << " entropy=" << format_double(model.entropy()) << "\n";
        std::cout << "wrote " << (out_dir / "model.json").string() << "\n";
        return 0;
    }

    // NMI matrix over the full data by default; train-only needs one split.
    if (args.nmi_rows != "full" && args.nmi_rows != "train")
        throw UserError("--nmi-rows must be 'full' or 'train'");
    if (args.nmi_rows == "train" && seeds.size() != 1)
        throw UserError("--nmi-rows train requires a single split");

    NmiMatrix matrix;
    if (args.nmi_rows == "train") {
        auto split = split_rows(table, args.train_fraction, seeds[0]);
        matrix = nmi_matrix(table, split.train_indices, jobs);
    } else {
        auto rows = all_rows(table);
        matrix = nmi_matrix(table, rows, jobs);
    }

    {  // NMI pair histogram, plot data
        std::ostringstream hist;
        hist << "# " << stamp << "\n" << "bin_lower\tcount\n";
        for (auto [lower, count] : nmi_histogram(matrix, args.hist_width))
            hist << format_double(lower) << '\t' << count << '\n';
        write_text_file(out_dir / "nmi_hist.tsv", hist.str());
    }

    LearnOptions options;
    options.refit_on_all = !args.no_refit;
    options.jobs = jobs;
    options.info = info;
    // Sweep records stream to stderr in ascending threshold order while the
    // pool works, so the selection curve is visible as it is computed.
    options.progress = [](const SweepRecord& r) {
        std::cerr << "threshold=" << format_double(r.threshold)
                  << "\tlog_p_total=" << format_double(r.log_p_total)
                  << "\tentropy=" << format_double(r.model_entropy)
                  << "\tcliques=" << r.n_cliques << "\n";
    };

    // One seed: plain selection (honors --no-refit). Several seeds: repeat
    // selection per split and fit the final model at the median threshold.
    MultiSplitResult result;
    if (seeds.size() == 1) {
        auto split = split_rows(table, args.train_fraction, seeds[0]);
        auto selection = select(matrix, table, split, options);
        SplitOutcome outcome;
        outcome.seed = seeds[0];
        outcome.ok = true;
        outcome.optimal_threshold = selection.optimal_threshold;
        outcome.feasibility_threshold = selection.feasibility_threshold;
        for (const auto& r : selection.sweep.records)
            if (r.threshold == selection.optimal_threshold) outcome.log_p_total = r.log_p_total;
        outcome.sweep = std::move(selection.sweep);
        result.splits.push_back(std::move(outcome));
        result.median_threshold = selection.optimal_threshold;
        result.spread = 0.0;
        result.final_model = std::move(selection.model);
    } else {
        result = multi_split_select(matrix, table, args.train_fraction, seeds, options);
    }

    // Per-split sweep curves; the single-split run keeps the plain name.
    for (const auto& split : result.splits) {
        if (split.sweep.records.empty()) continue;
        std::ostringstream tsv;
        write_sweep_tsv(tsv, split.sweep, stamp + " seed=" + std::to_string(split.seed));
        fs::path name = seeds.size() == 1
                            ? out_dir / "sweep.tsv"
                            : out_dir / ("sweep.seed" + std::to_string(split.seed) + ".tsv");
        write_text_file(name, tsv.str());
    }

    const CliqueTreeModel& final_model = result.final_model;
    final_model.save(out_dir / "model.json");

    nlohmann::ordered_json selection = provenance_json(config, loaded.input_hash);
    selection["schema_version"] = 1;
    selection["train_fraction"] = args.train_fraction;
    selection["nmi_rows"] = args.nmi_rows;
    selection["n_candidates"] = candidate_thresholds(matrix).size();
    nlohmann::ordered_json splits = nlohmann::ordered_json::array();
    for (const auto& s : result.splits) {
        nlohmann::ordered_json item;
        item["seed"] = s.seed;
        item["ok"] = s.ok;
        if (s.ok) {
            item["optimal_threshold"] = s.optimal_threshold;
            if (s.feasibility_threshold)
                item["feasibility_threshold"] = *s.feasibility_threshold;
            item["log_p_total"] = s.log_p_total;
            item["feasibility_contiguous"] = s.sweep.feasibility_contiguous;
        } else {
            item["error"] = s.error;
        }
        splits.push_back(std::move(item));
    }
    selection["splits"] = std::move(splits);
    selection["median_threshold"] = result.median_threshold;
    selection["spread"] = result.spread;
    selection["model_entropy"] = final_model.entropy();
    selection["n_cliques"] = final_model.tree().nodes.size();
    selection["max_clique_size"] = final_model.tree().max_clique_size();
    selection["model_file"] = "model.json";
    write_text_file(out_dir / "selection.json", selection.dump(1, '\t') + "\n");

    std::cout << "selected threshold=" << format_double(result.median_threshold)
              << " (spread " << format_double(result.spread) << " over " << seeds.size()
              << " split" << (seeds.size() == 1 ? "" : "s") << ")"
              << " cliques=" << final_model.tree().nodes.size()
              << " max_clique=" << final_model.tree().max_clique_size()
              << " entropy=" << format_double(final_model.entropy()) << "\n";
    std::cout << "wrote " << (out_dir / "model.json").string() << ", selection.json, sweep tsv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
    std::string model_path;
    InputOptions input;
    std::string reference_path;   // percentile reference; default: the scored file
    double laplace = -1.0;        // < 0: use the model's recorded alpha
    std::string out_dir;
};

// Encode a raw file against the model, re-applying the fit-time column
// selection when the file still carries the unmodeled columns.
EncodeResult encode_for_model(const CliqueTreeModel& model, RawTable raw) {
    int width = static_cast<int>(raw.column_names.size());
    int model_width = static_cast<int>(model.domains().size());
    if (width != model_width) {
        const auto& info = model.info();
        if (width == info.input_column_count && !info.selected_columns.empty()) {
            RawTable projected;
            for (int c : info.selected_columns) {
                if (c < 0 || c >= width) throw UserError("model metadata: bad column selection");
                projected.column_names.push_back(raw.column_names[c]);
            }
            projected.rows.reserve(raw.rows.size());
            for (auto& row : raw.rows) {
                std::vector<std::string> out;
                out.reserve(info.selected_columns.size());
                for (int c : info.selected_columns) out.push_back(std::move(row[c]));
                projected.rows.push_back(std::move(out));
            }
            raw = std::move(projected);
        } else {
            throw UserError("input has " + std::to_string(width) + " columns; the model expects " +
                            std::to_string(model_width) + " (or " +
                            std::to_string(info.input_column_count) +
                            " before column selection)");
        }
    }
    return encode_with_domains(raw, model.domains());
}

int run_score(const ScoreArgs& args) {
    fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    auto model = CliqueTreeModel::load(args.model_path);
    double alpha = args.laplace >= 0.0 ? args.laplace : model.info().laplace_alpha;

    std::string input_hash = hash_file(args.input.path);
    auto encoded = encode_for_model(model, read_csv_file(args.input.path, csv_options(args.input)));

    // Percentile reference: an explicit file, or the scored data itself.
    PercentileTables percentiles;
    if (!args.reference_path.empty()) {
        auto ref =
            encode_for_model(model, read_csv_file(args.reference_path, csv_options(args.input)));
        for (size_t r = 0; r < ref.row_errors.size(); ++r)
            if (!ref.row_errors[r].empty())
                throw UserError("reference row " + std::to_string(r) + ": " + ref.row_errors[r]);
        auto ref_rows = all_rows(ref.table);
        percentiles = build_percentiles(model, ref.table, ref_rows, alpha);
    } else {
        std::vector<int64_t> ok_rows;
        for (int64_t r = 0; r < encoded.table.row_count(); ++r)
            if (encoded.row_errors[r].empty()) ok_rows.push_back(r);
        if (ok_rows.empty()) throw UserError("no encodable rows to build percentiles from");
        percentiles = build_percentiles(model, encoded.table, ok_rows, alpha);
    }

    std::vector<int64_t> scorable;
    for (int64_t r = 0; r < encoded.table.row_count(); ++r)
        if (encoded.row_errors[r].empty()) scorable.push_back(r);
    auto reports = score_rows(model, encoded.table, scorable, percentiles, alpha);
    for (int64_t r = 0; r < encoded.table.row_count(); ++r) {
        if (encoded.row_errors[r].empty()) continue;
        AnomalyReport rep;  // unencodable: maximal anomaly
        rep.row_index = r;
        rep.error = encoded.row_errors[r];
        reports.push_back(std::move(rep));
    }

    std::string config = "cmd=score model=" + fs::path(args.model_path).filename().string() +
                         " input=" + fs::path(args.input.path).filename().string() +
                         " reference=" +
                         (args.reference_path.empty()
                              ? std::string("input")
                              : fs::path(args.reference_path).filename().string()) +
                         " laplace=" + format_double(alpha);
    std::string stamp = provenance(config, input_hash);
    {
        std::ostringstream tsv;
        write_anomaly_tsv(tsv, reports, model, stamp);
        write_text_file(out_dir / "report.tsv", tsv.str());
    }
    {
        std::ostringstream jsonl;
        write_anomaly_jsonl(jsonl, reports, model);
        write_text_file(out_dir / "report.jsonl", jsonl.str());
    }
    int64_t zero_rows = 0;
    for (const auto& r : reports) zero_rows += (r.probability == 0.0 || !r.error.empty());
    std::cout << "scored " << reports.size() << " rows (" << zero_rows
              << " with zero probability or unencodable); wrote "
              << (out_dir / "report.tsv").string() << ", report.jsonl\n";
    return 0;
}

// ---------------------------------------------------------------------------
// clusters

struct ClustersArgs {
    std::string model_path;
    InputOptions input;
    int clique_id = -1;
    std::vector<std::string> attrs;  // 1-based positions or attribute names
    std::string out_path;            // empty: stdout
};

int run_clusters(const ClustersArgs& args) {
    auto model = CliqueTreeModel::load(args.model_path);
    auto encoded = encode_for_model(model, read_csv_file(args.input.path, csv_options(args.input)));
    for (size_t r = 0; r < encoded.row_errors.size(); ++r)
        if (!encoded.row_errors[r].empty())
            throw UserError("row " + std::to_string(r) + ": " + encoded.row_errors[r]);
    const auto& table = encoded.table;

    CliqueIndex index;
    if (!args.attrs.empty()) {
        std::vector<int> attrs;
        for (const auto& token : args.attrs) {
            bool numeric =
                !token.empty() && token.find_first_not_of("0123456789") == std::string::npos;
            if (numeric) {
                int pos = std::stoi(token);  // 1-based position among modeled attributes
                if (pos < 1 || pos > table.n_attrs())
                    throw UserError("attribute position " + token + " out of range 1.." +
                                    std::to_string(table.n_attrs()));
                attrs.push_back(pos - 1);
            } else {
                int found = -1;
                for (int a = 0; a < table.n_attrs(); ++a)
                    if (table.domain(a).name == token) found = a;
                if (found < 0) throw UserError("unknown attribute name '" + token + "'");
                attrs.push_back(found);
            }
        }
        index = cluster_by_attrs(table, attrs);
    } else if (args.clique_id >= 0) {
        index = cluster_by_clique(model, table, args.clique_id);
    } else {
        throw UserError("pass --clique ID or --attrs LIST");
    }

    std::string config = "cmd=clusters model=" + fs::path(args.model_path).filename().string() +
                         " input=" + fs::path(args.input.path).filename().string();
    double possible = 1.0;
    for (int a : index.attrs) possible *= table.domain(a).cardinality();
    std::ostringstream out;
    out << "# " << provenance(config, hash_file(args.input.path)) << "\n";
    out << "# clique="
        << (index.clique_id < 0 ? std::string("-") : std::to_string(index.clique_id)) << " attrs=";
    for (size_t k = 0; k < index.attrs.size(); ++k)
        out << (k ? "," : "") << table.domain(index.attrs[k]).name;
    out << " clusters_observed=" << index.clusters.size()
        << " combinations_possible=" << format_double(possible) << " rows=" << index.row_count
        << "\n";
    out << "rank\tsize\tshare\tvalues\n";
    for (size_t k = 0; k < index.clusters.size(); ++k) {
        const auto& cluster = index.clusters[k];
        out << (k + 1) << '\t' << cluster.rows.size() << '\t'
            << format_double(static_cast<double>(cluster.rows.size()) /
                             static_cast<double>(index.row_count))
            << '\t';
        for (size_t j = 0; j < index.attrs.size(); ++j)
            out << (j ? "," : "") << table.domain(index.attrs[j]).value_name(cluster.codes[j]);
        out << '\n';
    }
    if (args.out_path.empty() || args.out_path == "-")
        std::cout << out.str();
    else
        write_text_file(args.out_path, out.str());
    return 0;
}

// ---------------------------------------------------------------------------
// similarity / export

struct SimilarityArgs {
    std::string model_path;
    InputOptions input;
    int64_t row_a = 0;
    int64_t row_b = 0;
};

int run_similarity(const SimilarityArgs& args) {
    auto model = CliqueTreeModel::load(args.model_path);
    auto encoded = encode_for_model(model, read_csv_file(args.input.path, csv_options(args.input)));
    for (int64_t r : {args.row_a, args.row_b}) {
        if (r < 0 || r >= encoded.table.row_count())
            throw UserError("row index " + std::to_string(r) + " out of range");
        if (!encoded.row_errors[r].empty())
            throw UserError("row " + std::to_string(r) + ": " + encoded.row_errors[r]);
    }
    double s = similarity(model, encoded.table, args.row_a, args.row_b);
    std::cout << format_double(s) << "\n";
    return 0;
}

struct ExportArgs {
    std::string model_path;
    std::string out_dir;
};

int run_export(const ExportArgs& args) {
    fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    auto model = CliqueTreeModel::load(args.model_path);
    std::vector<std::string> names;
    for (const auto& d : model.domains()) names.push_back(d.name);

    std::string header =
        "// " +
        provenance("cmd=export model=" + fs::path(args.model_path).filename().string(),
                   model.info().input_hash) +
        "\n";
    write_text_file(out_dir / "cliquetree.dot", header + to_dot(model.tree(), names));

    auto graph = DependencyGraph::empty(static_cast<int>(names.size()));
    graph.threshold = model.threshold();
    for (const auto& e : model.info().graph_edges) {
        if (e.fill)
            graph.add_fill_edge(e.a, e.b);
        else
            graph.add_weighted_edge(e.a, e.b, e.weight);
    }
    write_text_file(out_dir / "depgraph.dot", header + to_dot(graph, names));
    std::cout << "wrote " << (out_dir / "cliquetree.dot").string() << ", depgraph.dot\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clique-tree density learning for categorical data"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "sweep NMI thresholds, select the best model, write model + curves");
    add_input_flags(sweep_cmd, sweep_args.input);
    sweep_cmd->add_option("--train-fraction", sweep_args.train_fraction,
                          "train share of the split (default 0.8)");
    sweep_cmd->add_option("--seed", sweep_args.seed, "base split seed (default 17)");
    sweep_cmd->add_option("--n-splits", sweep_args.n_splits,
                          "number of splits, seeds seed..seed+n-1 (default 1)");
    sweep_cmd->add_option("--seeds", sweep_args.seeds, "explicit seed list")->delimiter(',');
    sweep_cmd->add_option("--nmi-rows", sweep_args.nmi_rows,
                          "rows the NMI matrix is computed on: full|train (default full)");
    sweep_cmd->add_option("--threshold", sweep_args.threshold,
                          "skip selection; fit directly at this threshold on all rows");
    sweep_cmd->add_flag("--no-refit", sweep_args.no_refit,
                        "keep the train-only fit instead of refitting on all rows");
    sweep_cmd->add_option("--laplace", sweep_args.laplace,
                          "scoring-time Laplace alpha recorded in the model (default 0)");
    sweep_cmd->add_option("--hist-width", sweep_args.hist_width,
                          "NMI histogram bin width (default 0.05)");
    sweep_cmd->add_option("--jobs", sweep_args.jobs, "worker threads (default: cores)");
    sweep_cmd->add_option("--out", sweep_args.out_dir, "output directory")->required();

    SweepArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit at a fixed threshold, no selection");
    add_input_flags(fit_cmd, fit_args.input);
    fit_cmd->add_option("--threshold", fit_args.threshold, "NMI threshold in [0,1]")->required();
    fit_cmd->add_option("--laplace", fit_args.laplace, "scoring-time Laplace alpha");
    fit_cmd->add_option("--jobs", fit_args.jobs, "worker threads (default: cores)");
    fit_cmd->add_option("--out", fit_args.out_dir, "output directory")->required();

    ScoreArgs score_args;
    auto* score_cmd =
        app.add_subcommand("score", "score rows against a model, anomalies first");
    score_cmd->add_option("--model", score_args.model_path, "model.json path")->required();
    add_input_flags(score_cmd, score_args.input);
    score_cmd->add_option("--reference", score_args.reference_path,
                          "CSV used for percentile reference (default: the scored file)");
    score_cmd->add_option("--laplace", score_args.laplace,
                          "override the model's Laplace alpha for this scoring run");
    score_cmd->add_option("--out", score_args.out_dir, "output directory")->required();

    ClustersArgs clusters_args;
    auto* clusters_cmd =
        app.add_subcommand("clusters", "list the clusters a clique induces on the data");
    clusters_cmd->add_option("--model", clusters_args.model_path, "model.json path")->required();
    add_input_flags(clusters_cmd, clusters_args.input);
    clusters_cmd->add_option("--clique", clusters_args.clique_id, "clique id from the model");
    clusters_cmd->add_option("--attrs", clusters_args.attrs,
                             "attribute list: 1-based positions or names")
        ->delimiter(',');
    clusters_cmd->add_option("--out", clusters_args.out_path, "output file (default stdout)");

    SimilarityArgs sim_args;
    auto* sim_cmd =
        app.add_subcommand("similarity", "co-clustering similarity between two rows");
    sim_cmd->add_option("--model", sim_args.model_path, "model.json path")->required();
    add_input_flags(sim_cmd, sim_args.input);
    sim_cmd->add_option("--row-a", sim_args.row_a, "0-based row index")->required();
    sim_cmd->add_option("--row-b", sim_args.row_b, "0-based row index")->required();

    ExportArgs export_args;
    auto* export_cmd =
        app.add_subcommand("export", "write DOT files for the dependency graph and clique tree");
    export_cmd->add_option("--model", export_args.model_path, "model.json path")->required();
    export_cmd->add_option("--out", export_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
        if (*sweep_cmd) return run_sweep(sweep_args);
        if (*fit_cmd) {
            if (fit_args.threshold < 0.0 || fit_args.threshold > 1.0)
                throw UserError("--threshold must lie in [0,1]");
            return run_sweep(fit_args);
        }
        if (*score_cmd) return run_score(score_args);
        if (*clusters_cmd) return run_clusters(clusters_args);
        if (*sim_cmd) return run_similarity(sim_args);
        if (*export_cmd) return run_export(export_args);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
