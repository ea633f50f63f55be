#ifndef CLIQUETREE_DATASET_HPP
#define CLIQUETREE_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cliquetree {

// One categorical attribute: its name and the dictionary mapping raw value
// strings to dense codes 0..cardinality-1. Value order is first-appearance
// order in the source file, which keeps encoding deterministic and single-pass.
struct AttributeDomain {
    int index = 0;
    std::string name;
    std::vector<std::string> values;

    int32_t cardinality() const { return static_cast<int32_t>(values.size()); }
    const std::string& value_name(int32_t code) const { return values.at(code); }

    // -1 when raw is not a known value of this domain.
    int32_t encode(const std::string& raw) const;

    void rebuild_lookup();

  private:
    std::unordered_map<std::string, int32_t> lookup_;
};

// Immutable column-oriented table of encoded categorical values.
class CategoricalTable {
  public:
    CategoricalTable() = default;
    CategoricalTable(std::vector<AttributeDomain> domains,
                     std::vector<std::vector<int32_t>> columns);

    int n_attrs() const { return static_cast<int>(domains_.size()); }
    int64_t row_count() const { return row_count_; }
    const AttributeDomain& domain(int attr) const { return domains_.at(attr); }
    const std::vector<AttributeDomain>& domains() const { return domains_; }
    const std::vector<int32_t>& column(int attr) const { return columns_.at(attr); }
    int32_t code(int64_t row, int attr) const { return columns_[attr][row]; }
    const std::string& decode(int64_t row, int attr) const {
        return domains_[attr].value_name(columns_[attr][row]);
    }
    // Codes of one row across all attributes, in attribute order.
    std::vector<int32_t> row_codes(int64_t row) const;

  private:
    std::vector<AttributeDomain> domains_;
    std::vector<std::vector<int32_t>> columns_;
    int64_t row_count_ = 0;
};

struct CsvOptions {
    char delimiter = ',';
    bool header_row = false;
    // Recorded for provenance; a missing marker is encoded like any other
    // category value (missingness is itself informative for categorical data).
    std::string missing_token = "?";
};

// Raw string cells, before encoding.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_csv(std::istream& in, const CsvOptions& options = {});
RawTable read_csv_file(const std::filesystem::path& path, const CsvOptions& options = {});

// Encode with fresh first-appearance domains.
CategoricalTable encode_table(const RawTable& raw);

// Load + encode in one step.
CategoricalTable load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// Encode against a fixed set of domains (e.g. the domains a model was fit
// with). Rows containing values absent from the domains are kept in place so
// row indices stay aligned; row_errors[r] is non-empty for such rows and the
// offending cells hold code 0 as a placeholder.
struct EncodeResult {
    CategoricalTable table;
    std::vector<std::string> row_errors;
};
EncodeResult encode_with_domains(const RawTable& raw,
                                 const std::vector<AttributeDomain>& domains);

// Projection onto a subset of attributes. Domains are copied verbatim (codes
// stay stable); only the attribute indices are renumbered.
CategoricalTable select_columns(const CategoricalTable& table, const std::vector<int>& indices);

// Deterministic train/test partition.
struct DataSplit {
    std::vector<int64_t> train_indices;  // sorted
    std::vector<int64_t> test_indices;   // sorted
    uint64_t seed = 0;
    double train_fraction = 0.0;
};

// SplitMix64, exactly as published: the output is fully determined by the
// seed, so splits are byte-identical across platforms and runs.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}
    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    uint64_t state_;
};

// Fisher-Yates driven by SplitMix64: for i = n-1..1, j = next() % (i+1).
void seeded_shuffle(std::vector<int64_t>& values, uint64_t seed);

// |train| = llround(train_fraction * row_count); errors if either side
// would be empty.
DataSplit split_rows(const CategoricalTable& table, double train_fraction, uint64_t seed);

// 0..row_count-1, the "use everything" row subset.
std::vector<int64_t> all_rows(const CategoricalTable& table);

}  // namespace cliquetree

#endif  // CLIQUETREE_DATASET_HPP
