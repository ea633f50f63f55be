#include "cliquetree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "cliquetree/errors.hpp"
#include "cliquetree/util.hpp"

namespace cliquetree {

CliqueIndex cluster_by_attrs(const CategoricalTable& table, const std::vector<int>& attrs) {
    for (int a : attrs)
        if (a < 0 || a >= table.n_attrs())
            throw UserError("attribute index " + std::to_string(a) + " out of range");
    CliqueIndex index;
    index.attrs = attrs;
    index.row_count = table.row_count();

    std::map<std::vector<int32_t>, std::vector<int64_t>> groups;
    std::vector<int32_t> tuple(attrs.size());
    for (int64_t r = 0; r < table.row_count(); ++r) {
        for (size_t k = 0; k < attrs.size(); ++k) tuple[k] = table.code(r, attrs[k]);
        groups[tuple].push_back(r);
    }
    index.clusters.reserve(groups.size());
    for (auto& [codes, rows] : groups)
        index.clusters.push_back(CliqueCluster{codes, std::move(rows)});
    std::sort(index.clusters.begin(), index.clusters.end(),
              [](const CliqueCluster& a, const CliqueCluster& b) {
                  if (a.rows.size() != b.rows.size()) return a.rows.size() > b.rows.size();
                  return a.codes < b.codes;
              });
    return index;
}

CliqueIndex cluster_by_clique(const CliqueTreeModel& model, const CategoricalTable& table,
                              int clique_id) {
    if (clique_id < 0 || clique_id >= static_cast<int>(model.tree().nodes.size()))
        throw UserError("clique id " + std::to_string(clique_id) + " out of range (model has " +
                        std::to_string(model.tree().nodes.size()) + " cliques)");
    CliqueIndex index = cluster_by_attrs(table, model.tree().nodes[clique_id].members);
    index.clique_id = clique_id;
    return index;
}

double similarity(const CliqueTreeModel& model, const CategoricalTable& table,
                  int64_t row_u, int64_t row_v) {
    if (row_u < 0 || row_u >= table.row_count() || row_v < 0 || row_v >= table.row_count())
        throw UserError("row index out of range");
    const auto& nodes = model.tree().nodes;
    if (nodes.empty()) throw UserError("model has no cliques");
    int matches = 0;
    for (const auto& node : nodes) {
        bool same = true;
        for (int a : node.members) {
            if (table.code(row_u, a) != table.code(row_v, a)) {
                same = false;
                break;
            }
        }
        matches += same;
    }
    return static_cast<double>(matches) / static_cast<double>(nodes.size());
}

std::vector<int64_t> query_cluster(const CliqueTreeModel& model, const CategoricalTable& table,
                                   int clique_id, const std::vector<int32_t>& tuple) {
    if (clique_id < 0 || clique_id >= static_cast<int>(model.tree().nodes.size()))
        throw UserError("clique id " + std::to_string(clique_id) + " out of range");
    const auto& attrs = model.tree().nodes[clique_id].members;
    if (tuple.size() != attrs.size())
        throw UserError("tuple arity " + std::to_string(tuple.size()) +
                        " does not match clique size " + std::to_string(attrs.size()));
    std::vector<int64_t> rows;
    for (int64_t r = 0; r < table.row_count(); ++r) {
        bool match = true;
        for (size_t k = 0; k < attrs.size(); ++k) {
            if (table.code(r, attrs[k]) != tuple[k]) {
                match = false;
                break;
            }
        }
        if (match) rows.push_back(r);
    }
    return rows;
}

namespace {

double percentile_in(const std::vector<double>& sorted, double value) {
    if (sorted.empty()) return 0.0;
    auto below = std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin();
    return 100.0 * static_cast<double>(below) / static_cast<double>(sorted.size());
}

}  // namespace

double PercentileTables::clique_percentile(int clique_id, double probability) const {
    return percentile_in(per_clique_.at(clique_id), probability);
}

double PercentileTables::overall_percentile(double probability) const {
    return percentile_in(overall_, probability);
}

PercentileTables build_percentiles(const CliqueTreeModel& model, const CategoricalTable& table,
                                   std::span<const int64_t> reference_rows, double alpha) {
    if (reference_rows.empty()) throw UserError("percentiles: empty reference row set");
    PercentileTables tables;
    const auto& cliques = model.clique_tables();
    tables.per_clique_.resize(cliques.size());
    std::vector<int32_t> row(model.domains().size());
    tables.overall_.reserve(reference_rows.size());
    for (size_t c = 0; c < cliques.size(); ++c)
        tables.per_clique_[c].reserve(reference_rows.size());
    for (int64_t r : reference_rows) {
        for (size_t a = 0; a < row.size(); ++a) row[a] = table.code(r, static_cast<int>(a));
        for (size_t c = 0; c < cliques.size(); ++c) {
            double count = static_cast<double>(cliques[c].count_of_row(row));
            double p = alpha > 0.0
                           ? (count + alpha) / (static_cast<double>(cliques[c].total()) +
                                                alpha * cliques[c].domain_size())
                           : count / static_cast<double>(cliques[c].total());
            tables.per_clique_[c].push_back(p);
        }
        tables.overall_.push_back(model.probability(row, alpha));
    }
    for (auto& v : tables.per_clique_) std::sort(v.begin(), v.end());
    std::sort(tables.overall_.begin(), tables.overall_.end());
    return tables;
}

std::vector<AnomalyReport> score_rows(const CliqueTreeModel& model,
                                      const CategoricalTable& table,
                                      std::span<const int64_t> rows,
                                      const PercentileTables& percentiles,
                                      double alpha) {
    const auto& cliques = model.clique_tables();
    std::vector<AnomalyReport> reports(rows.size());
    std::vector<int32_t> row(model.domains().size());
    for (size_t i = 0; i < rows.size(); ++i) {
        AnomalyReport& rep = reports[i];
        rep.row_index = rows[i];
        for (size_t a = 0; a < row.size(); ++a) row[a] = table.code(rows[i], static_cast<int>(a));
        rep.log_probability = model.log_probability(row, alpha);
        rep.probability = rep.log_probability == kNegInf ? 0.0 : std::exp(rep.log_probability);
        rep.overall_percentile = percentiles.overall_percentile(rep.probability);
        rep.per_clique.reserve(cliques.size());
        for (size_t c = 0; c < cliques.size(); ++c) {
            CliqueScore cs;
            cs.clique_id = static_cast<int>(c);
            int64_t count = cliques[c].count_of_row(row);
            if (alpha > 0.0) {
                cs.probability = (static_cast<double>(count) + alpha) /
                                 (static_cast<double>(cliques[c].total()) +
                                  alpha * cliques[c].domain_size());
            } else {
                cs.probability = static_cast<double>(count) /
                                 static_cast<double>(cliques[c].total());
            }
            cs.percentile = percentiles.clique_percentile(cs.clique_id, cs.probability);
            rep.per_clique.push_back(cs);
        }
        rep.explanation_clique = -1;
        for (const auto& cs : rep.per_clique) {
            if (rep.explanation_clique < 0 || cs.percentile < rep.explanation_percentile) {
                rep.explanation_clique = cs.clique_id;  // ties keep the lowest id
                rep.explanation_percentile = cs.percentile;
            }
        }
    }
    return reports;
}

void sort_reports(std::vector<AnomalyReport>& reports) {
    std::stable_sort(reports.begin(), reports.end(),
                     [](const AnomalyReport& a, const AnomalyReport& b) {
                         bool a_err = !a.error.empty(), b_err = !b.error.empty();
                         if (a_err != b_err) return a_err;  // unencodable first
                         if (a.probability != b.probability) return a.probability < b.probability;
                         if (a.explanation_percentile != b.explanation_percentile)
                             return a.explanation_percentile < b.explanation_percentile;
                         return a.row_index < b.row_index;
                     });
}

namespace {

std::string clique_attr_names(const CliqueTreeModel& model, int clique_id) {
    if (clique_id < 0) return "-";
    std::string out;
    for (int a : model.tree().nodes[clique_id].members) {
        if (!out.empty()) out += ",";
        out += model.domains()[a].name;
    }
    return out;
}

}  // namespace

void write_anomaly_tsv(std::ostream& out, std::vector<AnomalyReport> reports,
                       const CliqueTreeModel& model, const std::string& provenance_comment) {
    sort_reports(reports);
    if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
    out << "row_index\tprobability\tlog_probability\toverall_percentile\t"
        << "explanation_clique_attrs\texplanation_percentile\terror\n";
    for (const auto& r : reports) {
        out << r.row_index << '\t' << format_double(r.probability) << '\t'
            << format_double(r.log_probability) << '\t' << format_double(r.overall_percentile)
            << '\t' << clique_attr_names(model, r.explanation_clique) << '\t'
            << format_double(r.explanation_percentile) << '\t' << r.error << '\n';
    }
}

void write_anomaly_jsonl(std::ostream& out, std::vector<AnomalyReport> reports,
                         const CliqueTreeModel& model) {
    sort_reports(reports);
    {
        // Provenance header object; row records follow, one per line.
        nlohmann::ordered_json head;
        head["tool_version"] = model.info().tool_version;
        head["input_hash"] = model.info().input_hash;
        head["config"] = model.info().config;
        out << head.dump() << "\n";
    }
    for (const auto& r : reports) {
        nlohmann::ordered_json doc;
        doc["row_index"] = r.row_index;
        doc["probability"] = r.probability;
        if (r.log_probability == kNegInf)
            doc["log_probability"] = nullptr;
        else
            doc["log_probability"] = r.log_probability;
        doc["overall_percentile"] = r.overall_percentile;
        nlohmann::ordered_json per_clique = nlohmann::ordered_json::array();
        for (const auto& cs : r.per_clique) {
            nlohmann::ordered_json item;
            item["clique_id"] = cs.clique_id;
            item["attrs"] = clique_attr_names(model, cs.clique_id);
            item["probability"] = cs.probability;
            item["percentile"] = cs.percentile;
            per_clique.push_back(std::move(item));
        }
        doc["per_clique"] = std::move(per_clique);
        doc["explanation_clique"] = r.explanation_clique;
        doc["explanation_percentile"] = r.explanation_percentile;
        if (!r.error.empty()) doc["error"] = r.error;
        out << doc.dump() << "\n";
    }
}

}  // namespace cliquetree
