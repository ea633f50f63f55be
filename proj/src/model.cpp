#include "cliquetree/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "cliquetree/errors.hpp"
#include "cliquetree/util.hpp"
#include "cliquetree/version.hpp"

namespace cliquetree {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// MarginalTable

void MarginalTable::init_packing() {
    // Big-endian mixed radix: stride of attr k is the product of the
    // cardinalities after it, so numeric key order equals tuple order.
    packed_ = true;
    strides_.assign(cards_.size(), 1);
    uint64_t product = 1;
    for (size_t k = cards_.size(); k-- > 0;) {
        strides_[k] = product;
        uint64_t card = static_cast<uint64_t>(cards_[k]);
        if (card == 0 || product > (uint64_t{1} << 62) / card) {
            packed_ = false;
            strides_.clear();
            return;
        }
        product *= card;
    }
}

uint64_t MarginalTable::pack(std::span<const int32_t> tuple) const {
    uint64_t key = 0;
    for (size_t k = 0; k < strides_.size(); ++k)
        key += static_cast<uint64_t>(tuple[k]) * strides_[k];
    return key;
}

void MarginalTable::finalize() {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.codes < b.codes; });
    if (packed_) {
        lookup_.clear();
        lookup_.reserve(entries_.size() * 2);
        for (const auto& e : entries_) lookup_.emplace(pack(e.codes), e.count);
    }
}

MarginalTable MarginalTable::tally(const CategoricalTable& table, std::vector<int> attrs,
                                   std::span<const int64_t> rows) {
    if (rows.empty()) throw UserError("marginal tally: empty row subset");
    MarginalTable t;
    std::sort(attrs.begin(), attrs.end());
    t.attrs_ = std::move(attrs);
    t.cards_.reserve(t.attrs_.size());
    for (int a : t.attrs_) t.cards_.push_back(table.domain(a).cardinality());
    t.init_packing();
    t.total_ = static_cast<int64_t>(rows.size());

    size_t width = t.attrs_.size();
    std::vector<const int32_t*> cols(width);
    for (size_t k = 0; k < width; ++k) cols[k] = table.column(t.attrs_[k]).data();

    if (t.packed_) {
        std::unordered_map<uint64_t, int64_t> counts;
        counts.reserve(rows.size() * 2);
        for (int64_t r : rows) {
            uint64_t key = 0;
            for (size_t k = 0; k < width; ++k)
                key += static_cast<uint64_t>(cols[k][r]) * t.strides_[k];
            ++counts[key];
        }
        t.entries_.reserve(counts.size());
        for (auto [key, count] : counts) {
            Entry e;
            e.codes.resize(width);
            uint64_t rem = key;
            for (size_t k = 0; k < width; ++k) {
                e.codes[k] = static_cast<int32_t>(rem / t.strides_[k]);
                rem %= t.strides_[k];
            }
            e.count = count;
            t.entries_.push_back(std::move(e));
        }
    } else {
        std::map<std::vector<int32_t>, int64_t> counts;
        std::vector<int32_t> tuple(width);
        for (int64_t r : rows) {
            for (size_t k = 0; k < width; ++k) tuple[k] = cols[k][r];
            ++counts[tuple];
        }
        t.entries_.reserve(counts.size());
        for (auto& [codes, count] : counts) t.entries_.push_back(Entry{codes, count});
    }
    t.finalize();
    return t;
}

MarginalTable MarginalTable::from_entries(std::vector<int> attrs, std::vector<int64_t> cards,
                                          std::vector<Entry> entries, int64_t total) {
    MarginalTable t;
    if (!std::is_sorted(attrs.begin(), attrs.end()) ||
        std::adjacent_find(attrs.begin(), attrs.end()) != attrs.end())
        throw UserError("marginal table: attrs must be sorted and distinct");
    if (attrs.size() != cards.size())
        throw UserError("marginal table: attr/cardinality size mismatch");
    t.attrs_ = std::move(attrs);
    t.cards_ = std::move(cards);
    t.init_packing();
    t.entries_ = std::move(entries);
    t.total_ = total;

    int64_t sum = 0;
    for (const auto& e : t.entries_) {
        if (e.codes.size() != t.attrs_.size())
            throw UserError("marginal table: tuple arity mismatch");
        for (size_t k = 0; k < e.codes.size(); ++k)
            if (e.codes[k] < 0 || e.codes[k] >= t.cards_[k])
                throw UserError("marginal table: code out of range");
        if (e.count <= 0) throw UserError("marginal table: non-positive count");
        sum += e.count;
    }
    if (sum != total)
        throw UserError("marginal table: counts sum to " + std::to_string(sum) +
                        " but total is " + std::to_string(total));
    t.finalize();
    for (size_t i = 1; i < t.entries_.size(); ++i)
        if (t.entries_[i - 1].codes == t.entries_[i].codes)
            throw UserError("marginal table: duplicate tuple");
    return t;
}

int64_t MarginalTable::count_of_row(std::span<const int32_t> row) const {
    if (attrs_.empty()) return total_;
    if (packed_) {
        uint64_t key = 0;
        for (size_t k = 0; k < attrs_.size(); ++k)
            key += static_cast<uint64_t>(row[attrs_[k]]) * strides_[k];
        auto it = lookup_.find(key);
        return it == lookup_.end() ? 0 : it->second;
    }
    std::vector<int32_t> tuple(attrs_.size());
    for (size_t k = 0; k < attrs_.size(); ++k) tuple[k] = row[attrs_[k]];
    return count_of_tuple(tuple);
}

int64_t MarginalTable::count_of_tuple(std::span<const int32_t> tuple) const {
    if (tuple.size() != attrs_.size())
        throw UserError("tuple arity " + std::to_string(tuple.size()) + " does not match table arity " +
                        std::to_string(attrs_.size()));
    if (packed_) {
        auto it = lookup_.find(pack(tuple));
        return it == lookup_.end() ? 0 : it->second;
    }
    auto it = std::lower_bound(entries_.begin(), entries_.end(), tuple,
                               [](const Entry& e, std::span<const int32_t> t) {
                                   return std::lexicographical_compare(e.codes.begin(), e.codes.end(),
                                                                       t.begin(), t.end());
                               });
    if (it != entries_.end() && std::equal(it->codes.begin(), it->codes.end(), tuple.begin(), tuple.end()))
        return it->count;
    return 0;
}

double MarginalTable::entropy() const {
    if (total_ == 0) return 0.0;
    double sum_clnc = 0.0;
    for (const auto& e : entries_)
        sum_clnc += static_cast<double>(e.count) * std::log(static_cast<double>(e.count));
    double h = std::log(static_cast<double>(total_)) - sum_clnc / static_cast<double>(total_);
    return h < 0.0 ? 0.0 : h;
}

double MarginalTable::domain_size() const {
    double size = 1.0;
    for (int64_t c : cards_) size *= static_cast<double>(c);
    return size;
}

MarginalTable MarginalTable::marginalize(const std::vector<int>& onto_attrs) const {
    std::vector<size_t> positions;
    std::vector<int64_t> cards;
    for (int a : onto_attrs) {
        auto it = std::lower_bound(attrs_.begin(), attrs_.end(), a);
        if (it == attrs_.end() || *it != a)
            throw UserError("marginalize: attribute " + std::to_string(a) + " not in table");
        size_t pos = static_cast<size_t>(it - attrs_.begin());
        positions.push_back(pos);
        cards.push_back(cards_[pos]);
    }
    std::map<std::vector<int32_t>, int64_t> counts;
    std::vector<int32_t> tuple(positions.size());
    for (const auto& e : entries_) {
        for (size_t k = 0; k < positions.size(); ++k) tuple[k] = e.codes[positions[k]];
        counts[tuple] += e.count;
    }
    std::vector<Entry> entries;
    entries.reserve(counts.size());
    for (auto& [codes, count] : counts) entries.push_back(Entry{codes, count});
    return from_entries(onto_attrs, std::move(cards), std::move(entries), total_);
}

bool MarginalTable::operator==(const MarginalTable& other) const {
    if (attrs_ != other.attrs_ || total_ != other.total_ ||
        entries_.size() != other.entries_.size())
        return false;
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].codes != other.entries_[i].codes ||
            entries_[i].count != other.entries_[i].count)
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// CliqueTreeModel

CliqueTreeModel CliqueTreeModel::fit(const CliqueTree& tree, const CategoricalTable& table,
                                     std::span<const int64_t> rows, double threshold,
                                     ModelInfo info) {
    if (rows.empty()) throw UserError("fit: empty row subset");
    CliqueTreeModel model;
    model.tree_ = tree;
    model.domains_ = table.domains();
    model.threshold_ = threshold;
    model.fit_rows_ = static_cast<int64_t>(rows.size());
    model.info_ = std::move(info);
    if (model.info_.tool_version.empty()) model.info_.tool_version = kToolVersion;

    model.clique_tables_.reserve(tree.nodes.size());
    for (const auto& node : tree.nodes)
        model.clique_tables_.push_back(MarginalTable::tally(table, node.members, rows));
    model.separator_tables_.reserve(tree.edges.size());
    for (const auto& edge : tree.edges)
        model.separator_tables_.push_back(MarginalTable::tally(table, edge.separator, rows));

    model.compute_entropy();
    model.validate();
    return model;
}

void CliqueTreeModel::compute_entropy() {
    double h = 0.0;
    for (const auto& t : clique_tables_) h += t.entropy();
    for (const auto& t : separator_tables_) h -= t.entropy();  // one term per edge
    entropy_ = h;
}

void CliqueTreeModel::validate() const {
    std::vector<char> covered(domains_.size(), 0);
    for (const auto& node : tree_.nodes)
        for (int a : node.members) {
            if (a < 0 || a >= static_cast<int>(domains_.size()))
                throw InternalError("model: clique attribute out of range");
            covered[a] = 1;
        }
    for (size_t a = 0; a < covered.size(); ++a)
        if (!covered[a])
            throw InternalError("model: attribute " + std::to_string(a) + " not in any clique");
    if (clique_tables_.size() != tree_.nodes.size() ||
        separator_tables_.size() != tree_.edges.size())
        throw InternalError("model: table/tree shape mismatch");
}

double CliqueTreeModel::log_probability(std::span<const int32_t> row, double alpha) const {
    if (row.size() != domains_.size())
        throw UserError("row arity " + std::to_string(row.size()) + " does not match model arity " +
                        std::to_string(domains_.size()));
    double lp = 0.0;
    // Numerator first: any zero clique factor decides the result before a
    // separator is ever read, so the quotient below cannot divide by zero.
    for (const auto& t : clique_tables_) {
        int64_t c = t.count_of_row(row);
        if (alpha > 0.0) {
            lp += std::log((static_cast<double>(c) + alpha) /
                           (static_cast<double>(t.total()) + alpha * t.domain_size()));
        } else {
            if (c == 0) return kNegInf;
            lp += std::log(static_cast<double>(c)) - std::log(static_cast<double>(t.total()));
        }
    }
    for (const auto& t : separator_tables_) {
        int64_t c = t.count_of_row(row);
        if (alpha > 0.0) {
            lp -= std::log((static_cast<double>(c) + alpha) /
                           (static_cast<double>(t.total()) + alpha * t.domain_size()));
        } else {
            if (c == 0)
                throw InternalError(
                    "model: zero separator count with nonzero clique factors; "
                    "tables are inconsistent");
            lp -= std::log(static_cast<double>(c)) - std::log(static_cast<double>(t.total()));
        }
    }
    return lp;
}

double CliqueTreeModel::probability(std::span<const int32_t> row, double alpha) const {
    double lp = log_probability(row, alpha);
    return lp == kNegInf ? 0.0 : std::exp(lp);
}

std::vector<double> CliqueTreeModel::row_log_probabilities(const CategoricalTable& table,
                                                           std::span<const int64_t> rows,
                                                           double alpha) const {
    if (table.n_attrs() != static_cast<int>(domains_.size()))
        throw UserError("table arity does not match model");
    std::vector<double> out(rows.size());
    std::vector<int32_t> row(domains_.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t a = 0; a < domains_.size(); ++a) row[a] = table.code(rows[i], static_cast<int>(a));
        out[i] = log_probability(row, alpha);
    }
    return out;
}

double CliqueTreeModel::log_likelihood(const CategoricalTable& table,
                                       std::span<const int64_t> rows) const {
    double sum = 0.0;
    std::vector<int32_t> row(domains_.size());
    for (int64_t r : rows) {
        for (size_t a = 0; a < domains_.size(); ++a) row[a] = table.code(r, static_cast<int>(a));
        double lp = log_probability(row);
        if (lp == kNegInf) return kNegInf;
        sum += lp;
    }
    return sum;
}

void CliqueTreeModel::enumerate_distribution(
    uint64_t cap, const std::function<void(std::span<const int32_t>, double)>& visit) const {
    uint64_t combos = 1;
    for (const auto& d : domains_) {
        uint64_t card = static_cast<uint64_t>(d.cardinality());
        if (card == 0 || combos > cap / card)
            throw UserError("enumeration would exceed the cap of " + std::to_string(cap) +
                            " assignments");
        combos *= card;
    }
    std::vector<int32_t> row(domains_.size(), 0);
    for (uint64_t i = 0; i < combos; ++i) {
        visit(row, probability(row));
        // Odometer increment, last attribute fastest.
        for (size_t a = domains_.size(); a-- > 0;) {
            if (++row[a] < domains_[a].cardinality()) break;
            row[a] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kSchemaVersion = 1;

ordered_json table_to_json(const MarginalTable& t) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : t.entries()) {
        ordered_json item;
        item["codes"] = e.codes;
        item["count"] = e.count;
        entries.push_back(std::move(item));
    }
    ordered_json out;
    out["attrs"] = t.attrs();
    out["entries"] = std::move(entries);
    out["total"] = t.total();
    return out;
}

MarginalTable table_from_json(const json& doc, const std::vector<AttributeDomain>& domains) {
    std::vector<int> attrs = doc.at("attrs").get<std::vector<int>>();
    std::vector<int64_t> cards;
    for (int a : attrs) {
        if (a < 0 || a >= static_cast<int>(domains.size()))
            throw UserError("model file: attribute index out of range");
        cards.push_back(domains[a].cardinality());
    }
    std::vector<MarginalTable::Entry> entries;
    for (const auto& item : doc.at("entries")) {
        MarginalTable::Entry e;
        e.codes = item.at("codes").get<std::vector<int32_t>>();
        e.count = item.at("count").get<int64_t>();
        entries.push_back(std::move(e));
    }
    return MarginalTable::from_entries(std::move(attrs), std::move(cards), std::move(entries),
                                       doc.at("total").get<int64_t>());
}

}  // namespace

ordered_json CliqueTreeModel::to_json() const {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["threshold"] = threshold_;
    ordered_json domains = ordered_json::array();
    for (const auto& d : domains_) {
        ordered_json item;
        item["name"] = d.name;
        item["values"] = d.values;
        domains.push_back(std::move(item));
    }
    doc["domains"] = std::move(domains);
    ordered_json cliques = ordered_json::array();
    for (const auto& t : clique_tables_) cliques.push_back(table_to_json(t));
    doc["cliques"] = std::move(cliques);
    ordered_json edges = ordered_json::array();
    for (size_t e = 0; e < tree_.edges.size(); ++e) {
        ordered_json item;
        item["from"] = tree_.edges[e].a;
        item["to"] = tree_.edges[e].b;
        item["separator"] = tree_.edges[e].separator;
        auto table = table_to_json(separator_tables_[e]);
        item["entries"] = std::move(table["entries"]);
        item["total"] = separator_tables_[e].total();
        edges.push_back(std::move(item));
    }
    doc["edges"] = std::move(edges);

    ordered_json metadata;
    metadata["tool_version"] = info_.tool_version;
    metadata["seed"] = info_.seed;
    metadata["train_fraction"] = info_.train_fraction;
    metadata["laplace_alpha"] = info_.laplace_alpha;
    metadata["refit_on_all"] = info_.refit_on_all;
    metadata["input_hash"] = info_.input_hash;
    metadata["config"] = info_.config;
    metadata["selected_columns"] = info_.selected_columns;
    metadata["input_column_count"] = info_.input_column_count;
    ordered_json graph_edges = ordered_json::array();
    for (const auto& ge : info_.graph_edges) {
        ordered_json item;
        item["a"] = ge.a;
        item["b"] = ge.b;
        item["fill"] = ge.fill;
        if (!ge.fill) item["weight"] = ge.weight;
        graph_edges.push_back(std::move(item));
    }
    metadata["graph"] = ordered_json{{"edges", std::move(graph_edges)}};
    doc["metadata"] = std::move(metadata);
    return doc;
}

CliqueTreeModel CliqueTreeModel::from_json(const json& doc) {
    int version = doc.at("schema_version").get<int>();
    if (version != kSchemaVersion)
        throw UserError("model file has schema version " + std::to_string(version) +
                        "; this build reads version " + std::to_string(kSchemaVersion));
    CliqueTreeModel model;
    model.threshold_ = doc.at("threshold").get<double>();
    for (const auto& item : doc.at("domains")) {
        AttributeDomain d;
        d.index = static_cast<int>(model.domains_.size());
        d.name = item.at("name").get<std::string>();
        d.values = item.at("values").get<std::vector<std::string>>();
        if (d.values.empty()) throw UserError("model file: empty domain");
        d.rebuild_lookup();
        model.domains_.push_back(std::move(d));
    }
    for (const auto& item : doc.at("cliques")) {
        MarginalTable t = table_from_json(item, model.domains_);
        MaximalClique clique;
        clique.id = static_cast<int>(model.tree_.nodes.size());
        clique.members = t.attrs();
        model.tree_.nodes.push_back(std::move(clique));
        model.clique_tables_.push_back(std::move(t));
    }
    for (const auto& item : doc.at("edges")) {
        CliqueTreeEdge edge;
        edge.a = item.at("from").get<int>();
        edge.b = item.at("to").get<int>();
        edge.separator = item.at("separator").get<std::vector<int>>();
        if (edge.a < 0 || edge.b < 0 ||
            edge.a >= static_cast<int>(model.tree_.nodes.size()) ||
            edge.b >= static_cast<int>(model.tree_.nodes.size()))
            throw UserError("model file: edge endpoint out of range");
        json table_doc;
        table_doc["attrs"] = item.at("separator");
        table_doc["entries"] = item.at("entries");
        table_doc["total"] = item.at("total");
        model.separator_tables_.push_back(table_from_json(table_doc, model.domains_));
        model.tree_.edges.push_back(std::move(edge));
    }
    if (doc.contains("metadata")) {
        const auto& m = doc.at("metadata");
        model.info_.tool_version = m.value("tool_version", "");
        model.info_.seed = m.value("seed", uint64_t{0});
        model.info_.train_fraction = m.value("train_fraction", 0.0);
        model.info_.laplace_alpha = m.value("laplace_alpha", 0.0);
        model.info_.refit_on_all = m.value("refit_on_all", false);
        model.info_.input_hash = m.value("input_hash", "");
        model.info_.config = m.value("config", "");
        model.info_.selected_columns = m.value("selected_columns", std::vector<int>{});
        model.info_.input_column_count = m.value("input_column_count", 0);
        if (m.contains("graph")) {
            for (const auto& item : m.at("graph").at("edges")) {
                ModelInfo::GraphEdge ge;
                ge.a = item.at("a").get<int>();
                ge.b = item.at("b").get<int>();
                ge.fill = item.at("fill").get<bool>();
                ge.weight = item.value("weight", 0.0);
                model.info_.graph_edges.push_back(ge);
            }
        }
    }

    // Cross checks: totals agree, separators really are clique intersections
    // marginalized from either endpoint, the forest satisfies RIP.
    if (model.tree_.nodes.empty()) throw UserError("model file: no cliques");
    model.fit_rows_ = model.clique_tables_.front().total();
    for (const auto& t : model.clique_tables_)
        if (t.total() != model.fit_rows_) throw UserError("model file: clique totals differ");
    for (size_t e = 0; e < model.tree_.edges.size(); ++e) {
        const auto& edge = model.tree_.edges[e];
        const auto& sep = model.separator_tables_[e];
        if (sep.total() != model.fit_rows_) throw UserError("model file: separator totals differ");
        std::vector<int> expected;
        std::set_intersection(model.tree_.nodes[edge.a].members.begin(),
                              model.tree_.nodes[edge.a].members.end(),
                              model.tree_.nodes[edge.b].members.begin(),
                              model.tree_.nodes[edge.b].members.end(),
                              std::back_inserter(expected));
        if (expected != edge.separator)
            throw UserError("model file: separator is not the clique intersection");
        if (!(model.clique_tables_[edge.a].marginalize(edge.separator) == sep) ||
            !(model.clique_tables_[edge.b].marginalize(edge.separator) == sep))
            throw UserError("model file: separator table inconsistent with clique tables");
    }
    // Rebuild components.
    {
        std::vector<int> parent(model.tree_.nodes.size());
        for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
        std::function<int(int)> find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        size_t merges = 0;
        for (const auto& e : model.tree_.edges) {
            int ra = find(e.a), rb = find(e.b);
            if (ra == rb) throw UserError("model file: clique edges contain a cycle");
            parent[rb] = ra;
            ++merges;
        }
        (void)merges;
        model.tree_.component.assign(model.tree_.nodes.size(), -1);
        int next_component = 0;
        for (size_t v = 0; v < model.tree_.nodes.size(); ++v) {
            int root = find(static_cast<int>(v));
            if (model.tree_.component[root] < 0) model.tree_.component[root] = next_component++;
            model.tree_.component[v] = model.tree_.component[root];
        }
        model.tree_.n_components = next_component;
    }
    if (!verify_rip(model.tree_))
        throw UserError("model file: clique tree violates the running intersection property");
    model.compute_entropy();
    model.validate();
    return model;
}

void CliqueTreeModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write file: " + path.string());
    out << to_json().dump(1, '\t') << "\n";
    if (!out) throw UserError("failed writing file: " + path.string());
}

CliqueTreeModel CliqueTreeModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open model file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UserError("model file is not valid JSON: " + std::string(e.what()));
    }
    return from_json(doc);
}

}  // namespace cliquetree
