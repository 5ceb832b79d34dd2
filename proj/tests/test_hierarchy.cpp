#include <doctest.h>

#include <random>

#include "hiforead/errors.hpp"
#include "hiforead/hierarchy.hpp"
#include "support/synthetic.hpp"

using namespace hiforead;

TEST_SUITE_BEGIN("hierarchy");

TEST_CASE("fig5 tree has 3 levels with sizes 1/2/5") {
    const Hierarchy h = build_hierarchy(testsup::fig5_edges());
    CHECK(h.levels() == 3);
    CHECK(h.level_nodes(1).size() == 1);
    CHECK(h.level_nodes(2).size() == 2);
    CHECK(h.level_nodes(3).size() == 5);
    CHECK(h.node_count() == 8);
    CHECK(h.leaf_count() == 5);

    // Level-major, input-order-stable indexing.
    const std::vector<NodeId> expected{"Total", "X", "Y", "XA",
                                       "XB",    "XC", "YA", "YB"};
    CHECK(h.node_ids() == expected);
    CHECK(h.id_of(h.parent_of(h.index_of("XC"))) == "X");
}

TEST_CASE("minimal two-node chain") {
    const Hierarchy h = build_hierarchy({{"R", "A"}});
    CHECK(h.levels() == 2);
    CHECK(h.level_nodes(1).size() == 1);
    CHECK(h.level_nodes(2).size() == 1);
}

TEST_CASE("degenerate edge lists are rejected") {
    CHECK_THROWS_WITH_AS(build_hierarchy({{"A", "B"}, {"B", "A"}}),
                         doctest::Contains("cycle"), Error);
    CHECK_THROWS_WITH_AS(build_hierarchy({{"A", "B"}, {"C", "D"}}),
                         doctest::Contains("multiple roots"), Error);
    CHECK_THROWS_WITH_AS(build_hierarchy({{"A", "B"}, {"C", "B"}, {"A", "C"}}),
                         doctest::Contains("duplicate parent"), Error);
    CHECK_THROWS_WITH_AS(build_hierarchy({{"A", "B"}, {"A", "B"}}),
                         doctest::Contains("duplicate edge"), Error);
    CHECK_THROWS_AS(build_hierarchy({}), Error);
    // Unreachable subtree cycles.
    CHECK_THROWS_WITH_AS(build_hierarchy({{"R", "A"}, {"X", "Y"}, {"Y", "X"}}),
                         doctest::Contains("cycle"), Error);
    // Leaves must all sit at the bottom level.
    CHECK_THROWS_WITH_AS(build_hierarchy({{"R", "A"}, {"R", "B"}, {"A", "C"}}),
                         doctest::Contains("level"), Error);
}

TEST_CASE("fig5 summing matrix") {
    const Hierarchy h = build_hierarchy(testsup::fig5_edges());
    const SummingMatrix s = summing_matrix(h);
    REQUIRE(s.rows == 8);
    REQUIRE(s.cols == 5);

    const std::vector<std::uint8_t> root_row{1, 1, 1, 1, 1};
    const std::vector<std::uint8_t> x_row{1, 1, 1, 0, 0};
    for (std::size_t c = 0; c < 5; ++c) {
        CHECK(s.at(h.index_of("Total"), c) == root_row[c]);
        CHECK(s.at(h.index_of("X"), c) == x_row[c]);
    }
    // Leaf rows are one-hot unit rows.
    for (std::size_t j = 0; j < h.leaf_count(); ++j) {
        for (std::size_t c = 0; c < s.cols; ++c) {
            CHECK(s.at(h.leaves()[j], c) == (j == c ? 1 : 0));
        }
    }
}

TEST_CASE("summing matrix trivial shapes") {
    const Hierarchy chain = build_hierarchy({{"R", "A"}});
    const SummingMatrix sc = summing_matrix(chain);
    CHECK(sc.rows == 2);
    CHECK(sc.cols == 1);
    CHECK(sc.at(0, 0) == 1);
    CHECK(sc.at(1, 0) == 1);

    const Hierarchy fan = build_hierarchy({{"R", "A"}, {"R", "B"}, {"R", "C"}});
    const SummingMatrix sf = summing_matrix(fan);
    CHECK(sf.rows == 4);
    CHECK(sf.cols == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(sf.at(0, c) == 1);
    for (std::size_t r = 1; r < 4; ++r) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(sf.at(r, c) == (r - 1 == c));
    }
}

TEST_CASE("internal rows equal the sum of their children's rows") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Hierarchy h = build_hierarchy(
            testsup::random_tree_edges(rng, {1, 2 + static_cast<int>(rng() % 3),
                                             5 + static_cast<int>(rng() % 6)}));
        const SummingMatrix s = summing_matrix(h);
        for (std::size_t node = 0; node < h.node_count(); ++node) {
            if (h.is_leaf(node)) continue;
            for (std::size_t c = 0; c < s.cols; ++c) {
                int child_sum = 0;
                for (std::size_t child : h.children_of(node)) {
                    child_sum += s.at(child, c);
                }
                CHECK(static_cast<int>(s.at(node, c)) == child_sum);
            }
        }
        // Level sizes sum to the node count; leaves are the bottom level.
        std::size_t total = 0;
        for (int k = 1; k <= h.levels(); ++k) total += h.level_nodes(k).size();
        CHECK(total == h.node_count());
        CHECK(h.leaf_count() == h.level_nodes(h.levels()).size());
    }
}

TEST_CASE("bottom-up aggregation") {
    const Hierarchy h = build_hierarchy(testsup::fig5_edges());

    SUBCASE("constant-1 leaves make a constant-5 root") {
        const std::vector<std::vector<double>> leaves(5,
                                                      std::vector<double>(4, 1.0));
        const auto values = aggregate_bottom_up(h, leaves);
        for (double v : values[h.index_of("Total")]) CHECK(v == 5.0);
        for (double v : values[h.index_of("X")]) CHECK(v == 3.0);
    }

    SUBCASE("single-leaf chain passes through") {
        const Hierarchy chain = build_hierarchy({{"R", "A"}});
        const std::vector<std::vector<double>> leaves{{1.5, -2.0, 7.0}};
        const auto values = aggregate_bottom_up(chain, leaves);
        CHECK(values[0] == leaves[0]);
        CHECK(values[1] == leaves[0]);
    }

    SUBCASE("matches brute-force descendant enumeration") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> value(-10.0, 10.0);
        const auto edges = testsup::random_tree_edges(rng, {1, 3, 6, 14});
        const Hierarchy tree = build_hierarchy(edges);
        std::vector<std::vector<double>> leaves(tree.leaf_count(),
                                                std::vector<double>(6));
        for (auto& leaf : leaves) {
            for (double& v : leaf) v = value(rng);
        }
        const auto values = aggregate_bottom_up(tree, leaves);

        // Oracle: walk the raw edge list to enumerate descendant leaves.
        for (std::size_t node = 0; node < tree.node_count(); ++node) {
            std::vector<NodeId> frontier{tree.id_of(node)};
            std::vector<NodeId> descendants;
            while (!frontier.empty()) {
                const NodeId current = frontier.back();
                frontier.pop_back();
                bool has_child = false;
                for (const auto& [p, c] : edges) {
                    if (p == current) {
                        frontier.push_back(c);
                        has_child = true;
                    }
                }
                if (!has_child) descendants.push_back(current);
            }
            for (std::size_t t = 0; t < 6; ++t) {
                double expected = 0.0;
                for (const auto& id : descendants) {
                    const std::size_t leaf = tree.index_of(id);
                    for (std::size_t j = 0; j < tree.leaf_count(); ++j) {
                        if (tree.leaves()[j] == leaf) expected += leaves[j][t];
                    }
                }
                CHECK(values[node][t] == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }

    SUBCASE("length mismatch and missing leaf are rejected") {
        std::vector<std::vector<double>> leaves(5, std::vector<double>(4, 1.0));
        leaves[2].resize(3);
        CHECK_THROWS_AS(aggregate_bottom_up(h, leaves), Error);
        leaves.pop_back();
        CHECK_THROWS_AS(aggregate_bottom_up(h, leaves), Error);
    }
}

TEST_CASE("coherence checking") {
    const Hierarchy h = build_hierarchy(testsup::fig5_edges());
    const std::vector<std::vector<double>> leaves{
        {10, 11, 12}, {5, 6, 7}, {3, 3, 3}, {8, 9, 10}, {2, 2, 2}};
    ForecastSet f;
    f.values = aggregate_bottom_up(h, leaves);

    SUBCASE("aggregated values are exactly coherent") {
        const CoherenceReport report = check_coherence(h, f, 0.0);
        CHECK(report.coherent);
        CHECK(report.max_abs_violation == 0.0);
    }

    SUBCASE("perturbing one child is localized and quantified") {
        f.values[h.index_of("XB")][1] += 1.0;
        const CoherenceReport report = check_coherence(h, f, 1e-8);
        CHECK(!report.coherent);
        CHECK(report.max_abs_violation == doctest::Approx(1.0));
        REQUIRE(!report.violations.empty());
        // Only X (and Total, whose sum shifted through X's unchanged value)
        // can violate; X at step 1 must be reported.
        bool found = false;
        for (const auto& v : report.violations) {
            if (v.parent == h.index_of("X") && v.step == 1) found = true;
        }
        CHECK(found);
    }

    SUBCASE("independent per-node forecasts are typically incoherent") {
        ForecastSet indep;
        indep.values.assign(8, std::vector<double>(3, 0.0));
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> value(1.0, 9.0);
        for (auto& v : indep.values) {
            for (double& x : v) x = value(rng);
        }
        const CoherenceReport report = check_coherence(h, indep, 1e-8);
        CHECK(!report.coherent);
        CHECK(report.max_abs_violation > 0.0);
    }

    SUBCASE("missing node forecast throws") {
        f.values[h.index_of("YB")].clear();
        CHECK_THROWS_WITH_AS(check_coherence(h, f, 1e-8),
                             doctest::Contains("YB"), Error);
    }
}

TEST_CASE("restrict_to_levels keeps order and reindexes leaves") {
    const Hierarchy h = build_hierarchy(testsup::fig5_edges());
    const Hierarchy upper = restrict_to_levels(h, 2);
    CHECK(upper.levels() == 2);
    CHECK(upper.node_count() == 3);
    CHECK(upper.node_ids() == std::vector<NodeId>{"Total", "X", "Y"});
    CHECK(upper.leaf_count() == 2);
    CHECK_THROWS_AS(restrict_to_levels(h, 1), Error);
    CHECK_THROWS_AS(restrict_to_levels(h, 4), Error);
}

TEST_SUITE_END();
