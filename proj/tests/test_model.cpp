#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "cliquetree/errors.hpp"
#include "cliquetree/learn.hpp"
#include "cliquetree/model.hpp"
#include "support/oracles.hpp"

using namespace cliquetree;

namespace {

CategoricalTable make_table(const std::vector<std::vector<int32_t>>& columns,
                            std::vector<int32_t> cards = {}) {
    std::vector<AttributeDomain> domains(columns.size());
    for (size_t a = 0; a < columns.size(); ++a) {
        int32_t card = cards.empty() ? 0 : cards[a];
        for (int32_t v : columns[a]) card = std::max(card, v + 1);
        domains[a].index = static_cast<int>(a);
        domains[a].name = "v" + std::to_string(a);
        for (int32_t c = 0; c < card; ++c) domains[a].values.push_back("x" + std::to_string(c));
    }
    return CategoricalTable(std::move(domains), columns);
}

CliqueTree tree_over(const std::vector<std::vector<int>>& cliques) {
    std::vector<MaximalClique> nodes;
    for (size_t i = 0; i < cliques.size(); ++i)
        nodes.push_back(MaximalClique{static_cast<int>(i), cliques[i]});
    return spanning_tree(build_clique_graph(nodes));
}

// Model built through the full structure pipeline at one threshold.
CliqueTreeModel pipeline_model(const CategoricalTable& table, double threshold) {
    auto rows = all_rows(table);
    auto m = nmi_matrix(table, rows);
    auto tree = spanning_tree(build_clique_graph(maximal_cliques(triangulate(prune(m, threshold)))));
    return CliqueTreeModel::fit(tree, table, rows, threshold);
}

double direct_entropy_of_model(const CliqueTreeModel& model) {
    double h = 0.0;
    model.enumerate_distribution(CliqueTreeModel::kDefaultEnumerationCap,
                                 [&](std::span<const int32_t>, double p) {
                                     if (p > 0.0) h -= p * std::log(p);
                                 });
    return h;
}

}  // namespace

TEST_CASE("fit + probability: worked six-attribute tree against hand tallies") {
    // Six attributes a..f, eight rows designed so every clique has mixed counts.
    std::vector<std::vector<int32_t>> cols = {
        {0, 0, 1, 1, 0, 1, 0, 1},  // a
        {0, 1, 0, 1, 1, 0, 0, 1},  // b
        {0, 0, 0, 1, 1, 1, 0, 0},  // c
        {0, 1, 1, 0, 1, 0, 1, 1},  // d
        {1, 0, 0, 0, 1, 1, 0, 0},  // e
        {0, 0, 1, 1, 0, 1, 1, 0},  // f
    };
    auto table = make_table(cols);
    auto rows = all_rows(table);
    auto tree = tree_over({{0, 1, 3}, {0, 2}, {1, 3, 5}, {3, 4}});
    auto model = CliqueTreeModel::fit(tree, table, rows, 0.5);
    CHECK(model.fit_row_count() == 8);

    // Independent tallies straight from dictionaries.
    auto count_in = [&](std::vector<int> attrs, const std::vector<int32_t>& want) {
        int64_t c = 0;
        for (int r = 0; r < 8; ++r) {
            bool match = true;
            for (size_t k = 0; k < attrs.size(); ++k)
                if (cols[attrs[k]][r] != want[k]) { match = false; break; }
            c += match;
        }
        return c;
    };

    for (int r = 0; r < 8; ++r) {
        std::vector<int32_t> row = table.row_codes(r);
        // quotient of clique counts over separator counts, all over n=8
        double expected = 1.0;
        expected *= static_cast<double>(count_in({0, 1, 3}, {row[0], row[1], row[3]})) / 8.0;
        expected *= static_cast<double>(count_in({0, 2}, {row[0], row[2]})) / 8.0;
        expected *= static_cast<double>(count_in({1, 3, 5}, {row[1], row[3], row[5]})) / 8.0;
        expected *= static_cast<double>(count_in({3, 4}, {row[3], row[4]})) / 8.0;
        double denom = 1.0;
        for (const auto& e : model.tree().edges) {
            std::vector<int32_t> sep_tuple;
            for (int a : e.separator) sep_tuple.push_back(row[a]);
            denom *= static_cast<double>(count_in(e.separator, sep_tuple)) / 8.0;
        }
        expected /= denom;
        CHECK(model.probability(row) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("full-joint single clique: probability equals observed frequency") {
    auto table = make_table({{0, 0, 0, 1}, {0, 0, 1, 1}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0, 1}}), table, rows, 0.0);

    CHECK(model.probability(std::vector<int32_t>{0, 0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.probability(std::vector<int32_t>{0, 1}) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(model.probability(std::vector<int32_t>{1, 0}) == 0.0);  // unseen tuple
    CHECK(model.log_probability(std::vector<int32_t>{1, 0}) == kNegInf);
}

TEST_CASE("all-singleton forest: product of per-attribute marginals") {
    auto table = make_table({{0, 0, 1, 1}, {0, 1, 0, 1}, {0, 0, 0, 1}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0}, {1}, {2}}), table, rows, 1.0);
    // p(0,1,1) = 1/2 * 1/2 * 1/4
    CHECK(model.probability(std::vector<int32_t>{0, 1, 1}) ==
          doctest::Approx(0.0625).epsilon(1e-12));
    // never zero as long as each individual value was seen
    CHECK(model.probability(std::vector<int32_t>{1, 0, 1}) > 0.0);
}

TEST_CASE("log_likelihood: fit rows, -inf rows, empty attribute set") {
    auto table = make_table({{0, 0, 1}, {0, 1, 1}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0, 1}}), table, rows, 0.0);
    // Sum log(freq): rows (0,0),(0,1),(1,1) each seen once among 3
    double expected = 3.0 * std::log(1.0 / 3.0);
    CHECK(model.log_likelihood(table, rows) == doctest::Approx(expected).epsilon(1e-12));

    // A table containing an unseen tuple goes to -inf.
    auto eval = make_table({{0, 1}, {1, 0}}, {2, 2});
    auto eval_rows = all_rows(eval);
    CHECK(model.log_likelihood(eval, eval_rows) == kNegInf);

    // Zero-attribute edge case: empty product, log likelihood 0.
    auto empty_table = select_columns(table, {});
    CliqueTree empty_tree;
    auto empty_model = CliqueTreeModel::fit(empty_tree, empty_table, rows, 0.0);
    CHECK(empty_model.log_likelihood(empty_table, rows) == 0.0);
    CHECK(empty_model.probability(std::span<const int32_t>{}) == 1.0);
}

TEST_CASE("fit: every fitting row has positive probability") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        auto table = oracle::random_table(rng, 4, 3, 40);
        auto model = pipeline_model(table, 0.3);
        auto rows = all_rows(table);
        for (double lp : model.row_log_probabilities(table, rows)) CHECK(lp > kNegInf);
    }
}

TEST_CASE("model entropy: all-singleton forest sums attribute entropies") {
    auto table = make_table({{0, 0, 1, 1}, {0, 1, 2, 2}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0}, {1}}), table, rows, 1.0);
    double expected = entropy(table, 0, rows) + entropy(table, 1, rows);
    CHECK(model.entropy() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("model entropy: single clique gives the empirical joint entropy") {
    auto table = make_table({{0, 0, 1, 1}, {0, 1, 0, 0}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0, 1}}), table, rows, 0.0);
    // joint counts: (0,0)=1 (0,1)=1 (1,0)=2
    double expected = -(0.25 * std::log(0.25) + 0.25 * std::log(0.25) + 0.5 * std::log(0.5));
    CHECK(model.entropy() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("model entropy equals direct entropy of the enumerated distribution") {
    std::vector<std::vector<int32_t>> cols = {
        {0, 0, 1, 1, 0, 1, 0, 1},
        {0, 1, 0, 1, 1, 0, 0, 1},
        {0, 0, 0, 1, 1, 1, 0, 0},
        {0, 1, 1, 0, 1, 0, 1, 1},
        {1, 0, 0, 0, 1, 1, 0, 0},
        {0, 0, 1, 1, 0, 1, 1, 0},
    };
    auto table = make_table(cols);
    auto rows = all_rows(table);
    auto model =
        CliqueTreeModel::fit(tree_over({{0, 1, 3}, {0, 2}, {1, 3, 5}, {3, 4}}), table, rows, 0.5);
    CHECK(model.entropy() == doctest::Approx(direct_entropy_of_model(model)).epsilon(1e-9));
}

TEST_CASE("enumerate_distribution: normalization and special shapes") {
    // three binary attributes, eight tuples, total mass 1
    auto table = make_table({{0, 1, 0, 1}, {0, 0, 1, 1}, {0, 1, 1, 0}});
    auto rows = all_rows(table);
    auto model = pipeline_model(table, 0.2);
    double sum = 0.0;
    int64_t tuples = 0;
    model.enumerate_distribution(1000, [&](std::span<const int32_t>, double p) {
        sum += p;
        ++tuples;
    });
    CHECK(tuples == 8);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // single-clique: nonzero mass exactly on observed distinct rows
    auto joint = CliqueTreeModel::fit(tree_over({{0, 1, 2}}), table, rows, 0.0);
    int64_t nonzero = 0;
    joint.enumerate_distribution(1000, [&](std::span<const int32_t>, double p) {
        nonzero += p > 0.0;
    });
    CHECK(nonzero == 4);

    // independent uniform binaries: every tuple at 2^-n
    auto uniform = make_table({{0, 1, 0, 1}, {0, 0, 1, 1}});
    auto uniform_rows = all_rows(uniform);
    auto nb = CliqueTreeModel::fit(tree_over({{0}, {1}}), uniform, uniform_rows, 1.0);
    nb.enumerate_distribution(1000, [&](std::span<const int32_t>, double p) {
        CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    });

    // cap enforcement
    CHECK_THROWS_AS(model.enumerate_distribution(4, [](std::span<const int32_t>, double) {}),
                    UserError);
}

TEST_CASE("property: pipeline models normalize and the entropy difference formula is exact") {
    std::mt19937_64 rng(90210);
    for (int trial = 0; trial < 50; ++trial) {
        int n_attrs = 2 + static_cast<int>(rng() % 5);  // up to 6
        int n_rows = 4 + static_cast<int>(rng() % 60);
        auto table = oracle::random_table(rng, n_attrs, 4, n_rows);
        auto rows = all_rows(table);
        auto matrix = nmi_matrix(table, rows);
        for (double threshold : candidate_thresholds(matrix)) {
            auto tree = spanning_tree(
                build_clique_graph(maximal_cliques(triangulate(prune(matrix, threshold)))));
            auto model = CliqueTreeModel::fit(tree, table, rows, threshold);
            double sum = 0.0;
            double h = 0.0;
            model.enumerate_distribution(CliqueTreeModel::kDefaultEnumerationCap,
                                         [&](std::span<const int32_t>, double p) {
                                             sum += p;
                                             if (p > 0.0) h -= p * std::log(p);
                                         });
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(model.entropy() == doctest::Approx(h).epsilon(1e-9));
        }
    }
}

TEST_CASE("property: marginalizing the model distribution reproduces clique tables") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        auto table = oracle::random_table(rng, 4, 3, 30);
        auto model = pipeline_model(table, 0.25);
        // Accumulate model marginals per clique from the enumerated joint.
        size_t n_cliques = model.clique_tables().size();
        std::vector<std::map<std::vector<int32_t>, double>> marginals(n_cliques);
        model.enumerate_distribution(
            CliqueTreeModel::kDefaultEnumerationCap,
            [&](std::span<const int32_t> row, double p) {
                if (p == 0.0) return;
                for (size_t c = 0; c < n_cliques; ++c) {
                    std::vector<int32_t> key;
                    for (int a : model.tree().nodes[c].members) key.push_back(row[a]);
                    marginals[c][key] += p;
                }
            });
        for (size_t c = 0; c < n_cliques; ++c) {
            const auto& t = model.clique_tables()[c];
            for (const auto& e : t.entries()) {
                double expected = static_cast<double>(e.count) / static_cast<double>(t.total());
                CHECK(marginals[c][e.codes] == doctest::Approx(expected).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("separator tables are exact marginals of their endpoint cliques") {
    std::mt19937_64 rng(60);
    auto table = oracle::random_table(rng, 6, 3, 50);
    auto model = pipeline_model(table, 0.15);
    for (size_t e = 0; e < model.tree().edges.size(); ++e) {
        const auto& edge = model.tree().edges[e];
        const auto& sep = model.separator_tables()[e];
        CHECK(model.clique_tables()[edge.a].marginalize(edge.separator) == sep);
        CHECK(model.clique_tables()[edge.b].marginalize(edge.separator) == sep);
    }
}

TEST_CASE("marginal tables fall back to ordered maps when the radix overflows") {
    // Nine attributes of cardinality 100000: the mixed-radix key space is
    // ~2^150, far past the packed-u64 limit, so tallies must take the
    // ordered-map path and still behave identically.
    int n_rows = 12;
    std::vector<std::vector<int32_t>> cols(9, std::vector<int32_t>(n_rows));
    std::mt19937_64 rng(3141);
    for (auto& col : cols)
        for (auto& v : col) v = static_cast<int32_t>(rng() % 100000);
    cols[1] = cols[0];  // one duplicated column so some tuples repeat
    auto table = make_table(cols, std::vector<int32_t>(9, 100000));
    auto rows = all_rows(table);

    std::vector<int> attrs{0, 1, 2, 3, 4, 5, 6, 7, 8};
    auto t = MarginalTable::tally(table, attrs, rows);
    CHECK(t.total() == n_rows);
    int64_t sum = 0;
    for (const auto& e : t.entries()) sum += e.count;
    CHECK(sum == n_rows);
    for (int64_t r : rows) {
        auto codes = table.row_codes(r);
        CHECK(t.count_of_row(codes) >= 1);
    }
    std::vector<int32_t> absent(9, 0);
    CHECK(t.count_of_tuple(absent) == 0);

    // The whole model path on the fallback tables, including serialization.
    auto model = CliqueTreeModel::fit(tree_over({attrs}), table, rows, 0.0);
    for (double lp : model.row_log_probabilities(table, rows)) CHECK(lp > kNegInf);
    auto dir = std::filesystem::temp_directory_path() / "cliquetree_wide";
    std::filesystem::create_directories(dir);
    model.save(dir / "wide.json");
    auto loaded = CliqueTreeModel::load(dir / "wide.json");
    CHECK(loaded.row_log_probabilities(table, rows) ==
          model.row_log_probabilities(table, rows));
    std::filesystem::remove_all(dir);

    // Marginalizing the wide table onto a narrow prefix stays consistent.
    auto narrow = t.marginalize({0, 1});
    CHECK(narrow.total() == n_rows);
    for (int64_t r : rows) {
        std::vector<int32_t> pair{table.code(r, 0), table.code(r, 1)};
        CHECK(narrow.count_of_tuple(pair) >= 1);
    }
}

TEST_CASE("laplace smoothing: no zero probabilities, recorded separately from fit") {
    auto table = make_table({{0, 0, 1}, {0, 1, 1}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0, 1}}), table, rows, 0.0);
    std::vector<int32_t> unseen{1, 0};
    CHECK(model.probability(unseen) == 0.0);
    CHECK(model.probability(unseen, 1.0) > 0.0);
    CHECK(model.log_probability(unseen, 1.0) > kNegInf);
}

TEST_CASE("save/load: byte-identical round trip") {
    std::mt19937_64 rng(404);
    auto table = oracle::random_table(rng, 5, 3, 40);
    auto model = pipeline_model(table, 0.2);

    auto dir = std::filesystem::temp_directory_path() / "cliquetree_model_test";
    std::filesystem::create_directories(dir);
    auto path1 = dir / "m1.json";
    auto path2 = dir / "m2.json";
    model.save(path1);
    auto loaded = CliqueTreeModel::load(path1);
    loaded.save(path2);

    std::ifstream f1(path1, std::ios::binary), f2(path2, std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().size() > 0);

    CHECK(loaded.threshold() == model.threshold());
    CHECK(loaded.entropy() == doctest::Approx(model.entropy()).epsilon(1e-12));
    CHECK(loaded.fit_row_count() == model.fit_row_count());

    // Scores agree after the round trip.
    auto rows = all_rows(table);
    auto lp1 = model.row_log_probabilities(table, rows);
    auto lp2 = loaded.row_log_probabilities(table, rows);
    CHECK(lp1 == lp2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("load: tampered totals and wrong schema versions are rejected") {
    std::mt19937_64 rng(405);
    auto table = oracle::random_table(rng, 3, 3, 20);
    auto model = pipeline_model(table, 0.2);
    auto doc = model.to_json();

    auto dir = std::filesystem::temp_directory_path() / "cliquetree_model_bad";
    std::filesystem::create_directories(dir);
    auto path = dir / "bad.json";

    {
        auto tampered = doc;
        tampered["cliques"][0]["total"] =
            tampered["cliques"][0]["total"].get<int64_t>() + 1;
        std::ofstream(path) << tampered.dump();
        CHECK_THROWS_WITH_AS(CliqueTreeModel::load(path), doctest::Contains("sum"), UserError);
    }
    {
        auto tampered = doc;
        tampered["schema_version"] = 999;
        std::ofstream(path) << tampered.dump();
        CHECK_THROWS_WITH_AS(CliqueTreeModel::load(path), doctest::Contains("schema"), UserError);
    }
    {
        std::ofstream(path) << "{not json";
        CHECK_THROWS_AS(CliqueTreeModel::load(path), UserError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("zero-numerator short circuit: no division error on any assignment") {
    // Detached pair of cliques sharing a separator; probe every assignment.
    auto table = make_table({{0, 0, 1}, {0, 1, 1}, {1, 0, 0}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0, 1}, {1, 2}}), table, rows, 0.4);
    model.enumerate_distribution(1000, [&](std::span<const int32_t>, double p) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    });
}

TEST_CASE("row arity mismatches are rejected") {
    auto table = make_table({{0, 1}, {1, 0}});
    auto rows = all_rows(table);
    auto model = CliqueTreeModel::fit(tree_over({{0, 1}}), table, rows, 0.0);
    CHECK_THROWS_AS(model.probability(std::vector<int32_t>{0}), UserError);
    auto wrong = make_table({{0, 1}});
    auto wrong_rows = all_rows(wrong);
    CHECK_THROWS_AS(model.row_log_probabilities(wrong, wrong_rows), UserError);
}
