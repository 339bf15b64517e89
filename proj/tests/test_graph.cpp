#include <doctest.h>

#include <cmath>
#include <map>

#include "modlaw/graph.hpp"
#include "modlaw/pattern.hpp"
#include "oracles.hpp"

using namespace modlaw;

TEST_SUITE("graph-core")
{
    TEST_CASE("sample_gnp examples")
    {
        CHECK(sample_gnp(0, 0.5, 7).order() == 0);
        CHECK(sample_gnp(5, 0.5, 42) == sample_gnp(5, 0.5, 42));
        CHECK_FALSE(sample_gnp(30, 0.5, 1) == sample_gnp(30, 0.5, 2));
        CHECK_THROWS_AS(sample_gnp(5, 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_gnp(5, 1.0, 1), std::invalid_argument);
    }

    TEST_CASE("sample_gnp edge count concentrates")
    {
        const int n = 1000;
        const double mean = 0.5 * n * (n - 1) / 2;
        const double sd = std::sqrt(0.25 * n * (n - 1) / 2);
        int outside = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto g = sample_gnp(n, 0.5, seed);
            outside += std::abs(static_cast<double>(g.edge_count()) - mean) > 4 * sd;
        }
        CHECK(outside == 0);
    }

    TEST_CASE("sample_conditioned")
    {
        Anchor full;
        for (int v = 0; v < 5; ++v)
            full.vertices.push_back(v);
        full.edges = {{0, 1}, {1, 2}, {3, 4}};
        auto g = sample_conditioned(5, 0.5, full, 3);
        CHECK(g.edges() == full.edges);

        CHECK(sample_conditioned(20, 0.3, Anchor{}, 11) == sample_gnp(20, 0.3, 11));

        Anchor edge{{0, 1}, {{0, 1}}};
        Anchor none{{0, 1}, {}};
        for (std::uint64_t s = 0; s < 50; ++s) {
            CHECK(sample_conditioned(6, 0.5, edge, s).adjacent(0, 1));
            CHECK_FALSE(sample_conditioned(6, 0.5, none, s).adjacent(0, 1));
        }
        CHECK_THROWS(sample_conditioned(4, 0.5, Anchor{{0, 7}, {}}, 1));
    }

    TEST_CASE("sample_conditioned free-pair marginals")
    {
        const int n = 6;
        const double p = 0.3;
        const int seeds = 10000;
        Anchor a{{0, 1, 2}, {{0, 2}}};
        std::map<Edge, int> hits;
        for (int s = 0; s < seeds; ++s)
            for (auto e : sample_conditioned(n, p, a, static_cast<std::uint64_t>(s)).edges())
                ++hits[e];
        const double sd = std::sqrt(p * (1 - p) / seeds);
        for (auto e : oracle::all_pairs(n)) {
            const bool anchored = e.first <= 2 && e.second <= 2;
            if (anchored)
                continue;
            CHECK(std::abs(hits[e] / double(seeds) - p) <= 4 * sd);
        }
    }

    TEST_CASE("graph json roundtrip")
    {
        auto g = sample_gnp(9, 0.4, 5);
        CHECK(graph_from_json(graph_to_json(g)) == g);
    }

    TEST_CASE("canonical_form examples")
    {
        const std::vector<Edge> abc{{0, 1}, {1, 2}};
        const std::vector<Edge> cba{{2, 1}, {1, 0}};
        std::vector<Edge> cba_sorted;
        for (auto [u, v] : cba)
            cba_sorted.emplace_back(std::min(u, v), std::max(u, v));
        CHECK(canonical_form(Graph::from_edges(3, abc)) == canonical_form(Graph::from_edges(3, cba_sorted)));
        const std::vector<Edge> k3{{0, 1}, {0, 2}, {1, 2}};
        CHECK_FALSE(canonical_form(Graph::from_edges(3, k3)) == canonical_form(Graph::from_edges(3, abc)));

        CounterRng rng(17);
        auto g = oracle::random_graph(4, 0.5, rng);
        std::vector<int> perm{0, 1, 2, 3};
        const auto code = canonical_form(g);
        do {
            CHECK(canonical_form(g.permuted(perm)) == code);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    TEST_CASE("canonical_form agrees with brute-force isomorphism on <= 6 vertices")
    {
        for (int n = 1; n <= 6; ++n) {
            std::map<CanonicalCode, LabelledGraph> reps;
            bool ok = true;
            for (const auto& g : oracle::all_graphs(n)) {
                auto f = LabelledGraph::from_graph(g);
                auto [it, fresh] = reps.emplace(canonical_form(g), f);
                if (!fresh && !oracle::isomorphic(it->second, f))
                    ok = false;
            }
            CHECK(ok);
            // Distinct codes are non-isomorphic iff there are exactly as many
            // codes as isomorphism classes.
            CHECK(reps.size() == oracle::graph_classes(n).size());
        }
    }

    TEST_CASE("labelled canonical form agrees with label-preserving isomorphism")
    {
        for (int labels = 1; labels <= 2; ++labels)
            for (int order = labels; order <= labels + 3; ++order) {
                const auto classes = oracle::all_patterns(labels, order);
                std::set<CanonicalCode> codes;
                for (const auto& f : classes) {
                    codes.insert(canonical_form(f));
                    CHECK(oracle::isomorphic(from_canonical_code(canonical_form(f)), f));
                    CHECK(oracle::isomorphic(canonical_representative(f), f));
                }
                CHECK(codes.size() == classes.size());
            }
    }

    TEST_CASE("canonical code hex roundtrip")
    {
        auto f = LabelledGraph::from_edges(1, 4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});
        const auto code = canonical_form(f);
        CHECK(CanonicalCode::from_hex(code.hex()) == code);
    }

    TEST_CASE("enumerate_connected")
    {
        CHECK(enumerate_connected(1).size() == 1);
        CHECK(enumerate_connected(3).size() == 4);
        CHECK(enumerate_connected(4).size() == 10);
        const std::vector<std::size_t> cumulative{1, 2, 4, 10, 31, 143};
        std::size_t recount = 0;
        for (int a = 1; a <= 6; ++a) {
            for (const auto& g : oracle::graph_classes(a))
                recount += oracle::connected(g);
            CHECK(recount == cumulative[a - 1]);
            CHECK(enumerate_connected(a).size() == recount);
        }
        auto list = enumerate_connected(4);
        for (std::size_t i = 1; i < list.size(); ++i)
            CHECK(list[i - 1].order() <= list[i].order());
        for (const auto& f : list)
            CHECK(oracle::connected(f.as_graph()));
    }

    TEST_CASE("enumerate_label_connected")
    {
        auto one = enumerate_label_connected(1, 1);
        REQUIRE(one.size() == 2);
        CHECK(one[0] == LabelledGraph::k1(1));
        CHECK(one[1].edge_count() == 1);

        CHECK(enumerate_label_connected(0, 4).size() == enumerate_connected(4).size());

        for (auto [labels, t] : std::vector<std::pair<int, int>>{{1, 2}, {2, 2}, {1, 3}, {2, 1}, {3, 1}}) {
            std::size_t expected = 0;
            for (int u = 1; u <= t; ++u)
                for (const auto& f : oracle::all_patterns(labels, labels + u))
                    expected += f.is_label_connected();
            auto list = enumerate_label_connected(labels, t);
            CHECK(list.size() == expected);
            for (const auto& f : list) {
                CHECK(f.is_label_connected());
                CHECK(f.labels() == labels);
            }
        }
    }

    TEST_CASE("type_of examples")
    {
        const std::vector<Edge> k3e{{0, 1}, {0, 2}, {1, 2}};
        auto k3 = Graph::from_edges(3, k3e);
        auto empty = type_of(k3, std::vector<int>{});
        CHECK(empty.arity() == 0);
        CHECK(empty.block_count() == 0);

        auto same = type_of(k3, std::vector<int>{0, 0});
        CHECK(same.block_count() == 1);
        CHECK_FALSE(same.blocks_adjacent(0, 0));
        CHECK(same.equal(0, 1));

        auto pair = type_of(k3, std::vector<int>{0, 1});
        CHECK(pair.block_count() == 2);
        CHECK(pair.adjacent(0, 1));
        CHECK(pair.extends(type_of(k3, std::vector<int>{0})));
    }

    TEST_CASE("type extensions")
    {
        // A 1-type extends to 1 merged + 2 singleton (adjacent or not) 2-types.
        auto base = TypeTau::all(1).at(0);
        CHECK(TypeTau::extensions(base).size() == 3);
        for (const auto& t : TypeTau::extensions(base))
            CHECK(t.extends(base));
        // Bell(3) partitions with every edge subset of the blocks.
        CHECK(TypeTau::all(3).size() == 8 + 3 * 2 + 1);
    }

    TEST_CASE("quotient examples")
    {
        auto f = LabelledGraph::from_edges(2, 4, std::vector<Edge>{{0, 2}, {1, 2}, {2, 3}});
        CHECK(oracle::isomorphic(quotient(f, Partition::discrete(2)), f));

        auto shared = LabelledGraph::from_edges(2, 3, std::vector<Edge>{{0, 2}, {1, 2}});
        auto q = quotient(shared, Partition(std::vector<int>{0, 0}));
        CHECK(q.labels() == 1);
        CHECK(q.order() == 2);
        CHECK(q.edge_count() == 1);
        CHECK(q.adjacent(0, 1));

        CHECK(oracle::isomorphic(merge_labels(shared, 1, 0), q));
    }

    TEST_CASE("partitions")
    {
        CHECK(Partition::all(3).size() == 5);
        CHECK(Partition::all(4).size() == 15);
        auto p = Partition::of_tuple(std::vector<int>{4, 2, 4, 7});
        CHECK(p.block_ids() == std::vector<int>{0, 1, 0, 2});
        CHECK(p.representative(0) == 0);
        CHECK(p.representative(2) == 3);
    }
}
