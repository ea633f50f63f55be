#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cliquetree/errors.hpp"
#include "cliquetree/learn.hpp"
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

NmiMatrix matrix_from_pairs(int n, const std::map<std::pair<int, int>, double>& pairs) {
    NmiMatrix m;
    m.n_attrs = n;
    m.values.assign(static_cast<size_t>(n) * n, 0.0);
    m.entropies.assign(n, 1.0);
    for (auto& [ij, v] : pairs) {
        m.values[ij.first * n + ij.second] = v;
        m.values[ij.second * n + ij.first] = v;
    }
    return m;
}

// Independent likelihood oracle for 3-attribute tables. Every 3-vertex graph
// is chordal, so the whole pipeline reduces to four hand-enumerable cases on
// the retained edge set.
struct ThreeAttrOracle {
    const CategoricalTable& table;

    double count(const std::vector<int>& attrs, const std::vector<int32_t>& want,
                 std::span<const int64_t> rows) const {
        int64_t c = 0;
        for (int64_t r : rows) {
            bool ok = true;
            for (size_t k = 0; k < attrs.size(); ++k)
                if (table.code(r, attrs[k]) != want[k]) { ok = false; break; }
            c += ok;
        }
        return static_cast<double>(c);
    }

    double log_prob_row(int64_t r, const std::vector<std::pair<int, int>>& edges,
                        std::span<const int64_t> fit_rows) const {
        double n = static_cast<double>(fit_rows.size());
        auto code = [&](int a) { return table.code(r, a); };
        auto p = [&](std::vector<int> attrs) {
            std::vector<int32_t> want;
            for (int a : attrs) want.push_back(code(a));
            return count(attrs, want, fit_rows) / n;
        };
        double value = 0.0;
        if (edges.size() == 3) {
            value = p({0, 1, 2});
        } else if (edges.size() == 2) {
            int shared = -1;
            for (int v = 0; v < 3; ++v)
                if ((v == edges[0].first || v == edges[0].second) &&
                    (v == edges[1].first || v == edges[1].second))
                    shared = v;
            double pa = p({edges[0].first, edges[0].second});
            double pb = p({edges[1].first, edges[1].second});
            double ps = p({shared});
            value = (pa == 0.0 || pb == 0.0) ? 0.0 : pa * pb / ps;
        } else if (edges.size() == 1) {
            int lone = 3 - edges[0].first - edges[0].second;
            value = p({edges[0].first, edges[0].second}) * p({lone});
        } else {
            value = p({0}) * p({1}) * p({2});
        }
        return value == 0.0 ? kNegInf : std::log(value);
    }
};

}  // namespace

TEST_CASE("candidate_thresholds: distinct values {0.2, 0.6}") {
    auto m = matrix_from_pairs(3, {{{0, 1}, 0.2}, {{0, 2}, 0.2}, {{1, 2}, 0.6}});
    auto c = candidate_thresholds(m);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(c[2] > 0.6);
    CHECK(c[2] == doctest::Approx(0.6).epsilon(1e-7));

    // Each candidate realizes a distinct graph: 3, 1, 0 edges.
    CHECK(prune(m, c[0]).edge_count() == 3);
    CHECK(prune(m, c[1]).edge_count() == 1);
    CHECK(prune(m, c[2]).edge_count() == 0);
}

TEST_CASE("candidate_thresholds: all pairs equal") {
    auto m = matrix_from_pairs(3, {{{0, 1}, 0.5}, {{0, 2}, 0.5}, {{1, 2}, 0.5}});
    auto c = candidate_thresholds(m);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == 0.0);
    CHECK(c[1] > 0.5);
    CHECK(prune(m, c[0]).edge_count() == 3);   // complete
    CHECK(prune(m, c[1]).edge_count() == 0);   // empty
}

TEST_CASE("candidate_thresholds: 22 attributes give at most 232 candidates") {
    std::mt19937_64 rng(77);
    auto table = oracle::random_table(rng, 22, 4, 60);
    auto rows = all_rows(table);
    auto m = nmi_matrix(table, rows);
    auto c = candidate_thresholds(m);
    CHECK(c.size() <= 232);
    CHECK(c.size() >= 2);
    CHECK(std::is_sorted(c.begin(), c.end()));
}

TEST_CASE("evaluate_threshold: novel test tuple kills the full joint, not the product") {
    // Rows: train has tuples (0,0),(1,1); test has (0,1) - every value seen,
    // the combination unseen.
    auto table = make_table({{0, 1, 0, 1, 0}, {0, 1, 0, 1, 1}});
    DataSplit split;
    split.train_indices = {0, 1, 2, 3};
    split.test_indices = {4};
    split.seed = 0;
    split.train_fraction = 0.8;
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);

    auto at_zero = evaluate_threshold(0.0, matrix, table, split);
    CHECK(at_zero.log_p_train > kNegInf);
    CHECK(at_zero.log_p_test == kNegInf);
    CHECK(at_zero.log_p_total == kNegInf);

    auto candidates = candidate_thresholds(matrix);
    auto past_max = evaluate_threshold(candidates.back(), matrix, table, split);
    CHECK(past_max.log_p_total > kNegInf);
    CHECK(past_max.n_cliques == 2);
    CHECK(past_max.max_clique_size == 1);
}

TEST_CASE("evaluate_threshold: matches the independent 3-attribute oracle") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 25; ++trial) {
        // Planted dependence: a1 follows a0 most of the time, a2 independent.
        int n = 60;
        std::vector<std::vector<int32_t>> cols(3, std::vector<int32_t>(n));
        for (int r = 0; r < n; ++r) {
            cols[0][r] = static_cast<int32_t>(rng() % 3);
            cols[1][r] = (rng() % 10 < 8) ? cols[0][r] : static_cast<int32_t>(rng() % 3);
            cols[2][r] = static_cast<int32_t>(rng() % 2);
        }
        auto table = make_table(cols);
        auto rows = all_rows(table);
        auto matrix = nmi_matrix(table, rows);
        auto split = split_rows(table, 0.8, 99 + trial);
        ThreeAttrOracle oracle_pipeline{table};

        for (double x : candidate_thresholds(matrix)) {
            std::vector<std::pair<int, int>> edges;
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j)
                    if (matrix.at(i, j) >= x) edges.emplace_back(i, j);

            auto record = evaluate_threshold(x, matrix, table, split);
            double expect_train = 0.0, expect_test = 0.0;
            for (int64_t r : split.train_indices) {
                double lp = oracle_pipeline.log_prob_row(r, edges, split.train_indices);
                expect_train = (lp == kNegInf || expect_train == kNegInf) ? kNegInf
                                                                          : expect_train + lp;
            }
            for (int64_t r : split.test_indices) {
                double lp = oracle_pipeline.log_prob_row(r, edges, split.train_indices);
                expect_test =
                    (lp == kNegInf || expect_test == kNegInf) ? kNegInf : expect_test + lp;
            }
            if (expect_train == kNegInf) {
                CHECK(record.log_p_train == kNegInf);
            } else {
                CHECK(record.log_p_train == doctest::Approx(expect_train).epsilon(1e-9));
            }
            if (expect_test == kNegInf) {
                CHECK(record.log_p_test == kNegInf);
            } else {
                CHECK(record.log_p_test == doctest::Approx(expect_test).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("sweep: progress records stream in ascending threshold order") {
    std::mt19937_64 rng(606);
    auto table = oracle::random_table(rng, 5, 3, 80);
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    auto split = split_rows(table, 0.8, 2);
    for (int jobs : {1, 4}) {
        std::vector<double> streamed;
        auto sweep = sweep_thresholds(matrix, table, split, jobs,
                                      [&](const SweepRecord& r) {
                                          streamed.push_back(r.threshold);
                                      });
        CHECK(streamed == sweep.candidates);
    }
}

TEST_CASE("sweep: records align with candidates; parallel equals sequential") {
    std::mt19937_64 rng(555);
    auto table = oracle::random_table(rng, 5, 3, 80);
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    auto split = split_rows(table, 0.8, 3);
    auto s1 = sweep_thresholds(matrix, table, split, 1);
    auto s2 = sweep_thresholds(matrix, table, split, 4);
    REQUIRE(s1.records.size() == s1.candidates.size());
    REQUIRE(s2.records.size() == s1.records.size());
    for (size_t i = 0; i < s1.records.size(); ++i) {
        CHECK(s1.records[i].threshold == s1.candidates[i]);
        CHECK(s1.records[i].log_p_total == s2.records[i].log_p_total);
        CHECK(s1.records[i].model_entropy == s2.records[i].model_entropy);
    }
}

TEST_CASE("select: picks the argmax and reports the feasibility boundary") {
    std::mt19937_64 rng(808);
    int n = 400;
    std::vector<std::vector<int32_t>> cols(4, std::vector<int32_t>(n));
    for (int r = 0; r < n; ++r) {
        cols[0][r] = static_cast<int32_t>(rng() % 4);
        cols[1][r] = cols[0][r];                                   // deterministic couple
        cols[2][r] = (rng() % 10 < 9) ? (cols[0][r] % 2) : static_cast<int32_t>(rng() % 2);
        cols[3][r] = static_cast<int32_t>(rng() % 3);              // independent
    }
    auto table = make_table(cols);
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    auto split = split_rows(table, 0.8, 11);
    auto result = select(matrix, table, split);

    REQUIRE(result.feasibility_threshold.has_value());
    CHECK(result.optimal_threshold >= 0.0);
    // The chosen record is the maximum over finite candidates.
    double best = kNegInf;
    for (const auto& r : result.sweep.records)
        if (r.log_p_total != kNegInf) best = std::max(best, r.log_p_total);
    for (const auto& r : result.sweep.records)
        if (r.threshold == result.optimal_threshold) CHECK(r.log_p_total == best);

    // The selected model gives positive probability to every observed row.
    for (double lp : result.model.row_log_probabilities(table, rows)) CHECK(lp > kNegInf);
    // Refit on all rows by default.
    CHECK(result.model.fit_row_count() == n);
}

TEST_CASE("select: --no-refit keeps the train-only fit") {
    std::mt19937_64 rng(809);
    auto table = oracle::random_table(rng, 4, 3, 100);
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    auto split = split_rows(table, 0.8, 12);
    LearnOptions options;
    options.refit_on_all = false;
    auto result = select(matrix, table, split, options);
    CHECK(result.model.fit_row_count() == static_cast<int64_t>(split.train_indices.size()));
}

TEST_CASE("select: equal likelihoods tie toward the smaller threshold") {
    // Perfect 2x2 factorial, three copies: joint = product exactly, so every
    // candidate has the same posterior and the tie rule decides.
    std::vector<std::vector<int32_t>> cols = {
        {0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1},
        {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1},
    };
    auto table = make_table(cols);
    DataSplit split;
    split.train_indices = {0, 1, 2, 3, 4, 5, 6, 7};
    split.test_indices = {8, 9, 10, 11};
    split.seed = 1;
    split.train_fraction = 2.0 / 3.0;
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    auto result = select(matrix, table, split);
    auto candidates = candidate_thresholds(matrix);
    CHECK(result.optimal_threshold == candidates.front());

    double first_total = kNegInf, last_total = kNegInf;
    for (const auto& r : result.sweep.records) {
        if (r.threshold == candidates.front()) first_total = r.log_p_total;
        if (r.threshold == candidates.back()) last_total = r.log_p_total;
    }
    CHECK(first_total == doctest::Approx(last_total).epsilon(1e-12));
}

TEST_CASE("select: infeasible data names the offending attribute and value") {
    // 'q' appears only in the test partition.
    auto table = make_table({{0, 0, 0, 0, 1}, {0, 1, 0, 1, 0}});
    std::vector<AttributeDomain> domains(2);
    domains[0] = table.domain(0);
    DataSplit split;
    split.train_indices = {0, 1, 2, 3};
    split.test_indices = {4};
    split.seed = 0;
    split.train_fraction = 0.8;
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    CHECK_THROWS_WITH_AS(select(matrix, table, split),
                         doctest::Contains("'v0' value 'x1'"), InfeasibleError);
}

TEST_CASE("multi_split_select: one seed equals plain select; repeats are identical") {
    std::mt19937_64 rng(222);
    auto table = oracle::random_table(rng, 4, 3, 150);
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);

    auto single = select(matrix, table, split_rows(table, 0.8, 5));
    auto multi = multi_split_select(matrix, table, 0.8, {5});
    REQUIRE(multi.splits.size() == 1);
    CHECK(multi.splits[0].ok);
    CHECK(multi.splits[0].optimal_threshold == single.optimal_threshold);
    CHECK(multi.median_threshold == single.optimal_threshold);
    CHECK(multi.spread == 0.0);

    auto again = multi_split_select(matrix, table, 0.8, {5});
    CHECK(again.median_threshold == multi.median_threshold);

    auto five = multi_split_select(matrix, table, 0.8, {1, 2, 3, 4, 5});
    CHECK(five.splits.size() == 5);
    CHECK(five.final_model.fit_row_count() == table.row_count());
}

TEST_CASE("multi_split_select: failed splits are excluded, all-failed errors") {
    // A value that appears exactly once can land in test; with these rows it
    // always does for fraction 0.75 regardless of seed only if... instead,
    // force failure deterministically by using a single-appearance value and
    // scanning for seeds that put it in test vs train.
    auto table = make_table({{0, 0, 0, 1}, {0, 1, 0, 1}});
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    uint64_t bad_seed = 0, good_seed = 0;
    bool found_bad = false, found_good = false;
    for (uint64_t s = 0; s < 200 && !(found_bad && found_good); ++s) {
        auto sp = split_rows(table, 0.75, s);
        bool row3_in_test =
            std::find(sp.test_indices.begin(), sp.test_indices.end(), 3) != sp.test_indices.end();
        if (row3_in_test && !found_bad) {
            bad_seed = s;
            found_bad = true;
        }
        if (!row3_in_test && !found_good) {
            good_seed = s;
            found_good = true;
        }
    }
    REQUIRE(found_bad);
    REQUIRE(found_good);

    auto mixed = multi_split_select(matrix, table, 0.75, {bad_seed, good_seed});
    CHECK_FALSE(mixed.splits[0].ok);
    CHECK(mixed.splits[1].ok);
    CHECK(mixed.median_threshold == mixed.splits[1].optimal_threshold);

    CHECK_THROWS_AS(multi_split_select(matrix, table, 0.75, {bad_seed}), InfeasibleError);
}

TEST_CASE("sweep tsv: header, one line per candidate, stable bytes") {
    std::mt19937_64 rng(4);
    auto table = oracle::random_table(rng, 3, 3, 50);
    auto rows = all_rows(table);
    auto matrix = nmi_matrix(table, rows);
    auto sweep = sweep_thresholds(matrix, table, split_rows(table, 0.8, 9), 1);
    std::ostringstream out1, out2;
    write_sweep_tsv(out1, sweep, "config=test");
    write_sweep_tsv(out2, sweep, "config=test");
    std::string text = out1.str();
    CHECK(text == out2.str());
    CHECK(text.find("# config=test\n") == 0);
    CHECK(text.find("threshold\tlog_p_train") != std::string::npos);
    size_t lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == sweep.candidates.size() + 2);  // comment + header + rows
}

TEST_CASE("spearman oracle sanity") {
    CHECK(oracle::spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(oracle::spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
}
