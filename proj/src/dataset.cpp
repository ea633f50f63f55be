#include "cliquetree/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cliquetree/errors.hpp"

namespace cliquetree {

int32_t AttributeDomain::encode(const std::string& raw) const {
    auto it = lookup_.find(raw);
    return it == lookup_.end() ? -1 : it->second;
}

void AttributeDomain::rebuild_lookup() {
    lookup_.clear();
    lookup_.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        auto [it, inserted] = lookup_.emplace(values[i], static_cast<int32_t>(i));
        if (!inserted)
            throw UserError("attribute '" + name + "': duplicate value '" + values[i] + "'");
    }
}

CategoricalTable::CategoricalTable(std::vector<AttributeDomain> domains,
                                   std::vector<std::vector<int32_t>> columns)
    : domains_(std::move(domains)), columns_(std::move(columns)) {
    if (domains_.size() != columns_.size())
        throw InternalError("table: domain/column count mismatch");
    row_count_ = columns_.empty() ? 0 : static_cast<int64_t>(columns_[0].size());
    for (size_t a = 0; a < columns_.size(); ++a) {
        if (static_cast<int64_t>(columns_[a].size()) != row_count_)
            throw InternalError("table: column length mismatch at attribute " +
                                std::to_string(a));
        int32_t card = domains_[a].cardinality();
        for (int32_t code : columns_[a]) {
            if (code < 0 || code >= card)
                throw InternalError("table: code out of range in attribute " +
                                    std::to_string(a));
        }
        domains_[a].index = static_cast<int>(a);
        domains_[a].rebuild_lookup();
    }
}

std::vector<int32_t> CategoricalTable::row_codes(int64_t row) const {
    std::vector<int32_t> out(domains_.size());
    for (size_t a = 0; a < domains_.size(); ++a) out[a] = columns_[a][row];
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

RawTable read_csv(std::istream& in, const CsvOptions& options) {
    RawTable raw;
    std::string line;
    size_t line_no = 0;
    size_t n_fields = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        auto fields = split_line(line, options.delimiter);
        if (first) {
            n_fields = fields.size();
            first = false;
            if (options.header_row) {
                raw.column_names = std::move(fields);
                continue;
            }
        }
        if (fields.size() != n_fields)
            throw UserError("row " + std::to_string(line_no) + ": expected " +
                            std::to_string(n_fields) + " fields, got " +
                            std::to_string(fields.size()));
        raw.rows.push_back(std::move(fields));
    }
    if (raw.rows.empty()) throw UserError("empty input: no data rows");
    if (raw.column_names.empty()) {
        raw.column_names.resize(n_fields);
        for (size_t i = 0; i < n_fields; ++i) raw.column_names[i] = "c" + std::to_string(i);
    }
    return raw;
}

RawTable read_csv_file(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open file: " + path.string());
    return read_csv(in, options);
}

CategoricalTable encode_table(const RawTable& raw) {
    size_t n_attrs = raw.column_names.size();
    std::vector<AttributeDomain> domains(n_attrs);
    std::vector<std::unordered_map<std::string, int32_t>> seen(n_attrs);
    std::vector<std::vector<int32_t>> columns(n_attrs);
    for (size_t a = 0; a < n_attrs; ++a) {
        domains[a].index = static_cast<int>(a);
        domains[a].name = raw.column_names[a];
        columns[a].reserve(raw.rows.size());
    }
    for (const auto& row : raw.rows) {
        for (size_t a = 0; a < n_attrs; ++a) {
            auto [it, inserted] = seen[a].emplace(row[a],
                                                  static_cast<int32_t>(domains[a].values.size()));
            if (inserted) domains[a].values.push_back(row[a]);
            columns[a].push_back(it->second);
        }
    }
    return CategoricalTable(std::move(domains), std::move(columns));
}

CategoricalTable load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    return encode_table(read_csv_file(path, options));
}

EncodeResult encode_with_domains(const RawTable& raw,
                                 const std::vector<AttributeDomain>& domains) {
    if (raw.column_names.size() != domains.size())
        throw UserError("input has " + std::to_string(raw.column_names.size()) +
                        " columns but the model expects " + std::to_string(domains.size()));
    size_t n_attrs = domains.size();
    std::vector<std::vector<int32_t>> columns(n_attrs);
    for (auto& col : columns) col.reserve(raw.rows.size());
    std::vector<std::string> row_errors(raw.rows.size());
    for (size_t r = 0; r < raw.rows.size(); ++r) {
        for (size_t a = 0; a < n_attrs; ++a) {
            int32_t code = domains[a].encode(raw.rows[r][a]);
            if (code < 0) {
                if (row_errors[r].empty())
                    row_errors[r] = "unknown value '" + raw.rows[r][a] + "' for attribute '" +
                                    domains[a].name + "'";
                code = 0;  // placeholder; callers must honor row_errors
            }
            columns[a].push_back(code);
        }
    }
    std::vector<AttributeDomain> copy = domains;
    return EncodeResult{CategoricalTable(std::move(copy), std::move(columns)),
                        std::move(row_errors)};
}

CategoricalTable select_columns(const CategoricalTable& table, const std::vector<int>& indices) {
    std::vector<bool> used(table.n_attrs(), false);
    for (int idx : indices) {
        if (idx < 0 || idx >= table.n_attrs())
            throw UserError("column index " + std::to_string(idx) + " out of range (table has " +
                            std::to_string(table.n_attrs()) + " columns)");
        if (used[idx]) throw UserError("duplicate column index " + std::to_string(idx));
        used[idx] = true;
    }
    std::vector<AttributeDomain> domains;
    std::vector<std::vector<int32_t>> columns;
    domains.reserve(indices.size());
    columns.reserve(indices.size());
    for (int idx : indices) {
        domains.push_back(table.domain(idx));  // values copied verbatim, codes stay stable
        columns.push_back(table.column(idx));
    }
    return CategoricalTable(std::move(domains), std::move(columns));
}

void seeded_shuffle(std::vector<int64_t>& values, uint64_t seed) {
    SplitMix64 rng(seed);
    for (size_t i = values.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.next() % i);
        std::swap(values[i - 1], values[j]);
    }
}

DataSplit split_rows(const CategoricalTable& table, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw UserError("train fraction must lie strictly between 0 and 1");
    int64_t n = table.row_count();
    if (n < 2) throw UserError("need at least 2 rows to split");
    int64_t n_train = std::llround(train_fraction * static_cast<double>(n));
    if (n_train <= 0 || n_train >= n)
        throw UserError("train fraction " + std::to_string(train_fraction) +
                        " yields an empty train or test set for " + std::to_string(n) + " rows");
    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), int64_t{0});
    seeded_shuffle(order, seed);
    DataSplit split;
    split.seed = seed;
    split.train_fraction = train_fraction;
    split.train_indices.assign(order.begin(), order.begin() + n_train);
    split.test_indices.assign(order.begin() + n_train, order.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());
    return split;
}

std::vector<int64_t> all_rows(const CategoricalTable& table) {
    std::vector<int64_t> rows(table.row_count());
    std::iota(rows.begin(), rows.end(), int64_t{0});
    return rows;
}

}  // namespace cliquetree
