#include <doctest.h>

#include "modlaw/count.hpp"
#include "oracles.hpp"

using namespace modlaw;

namespace {

const std::vector<Edge> k3_edges{{0, 1}, {0, 2}, {1, 2}};

LabelledGraph named(const char* name)
{
    const std::string s = name;
    if (s == "K1")
        return LabelledGraph(0, 1);
    if (s == "K2")
        return LabelledGraph::from_edges(0, 2, std::vector<Edge>{{0, 1}});
    if (s == "P3")
        return LabelledGraph::from_edges(0, 3, std::vector<Edge>{{0, 1}, {1, 2}});
    if (s == "K3")
        return LabelledGraph::from_edges(0, 3, k3_edges);
    throw std::invalid_argument(s);
}

} // namespace

TEST_SUITE("subgraph-count")
{
    TEST_CASE("count examples")
    {
        auto k3 = Graph::from_edges(3, k3_edges);
        auto k4 = Graph::from_edges(4, oracle::all_pairs(4));
        const std::vector<int> none;
        CHECK(count_inj(named("K2"), k3, none) == 6);
        CHECK(count_inj(named("K1"), sample_gnp(13, 0.5, 1), none) == 13);
        auto rooted = LabelledGraph::from_edges(1, 2, std::vector<Edge>{{0, 1}});
        CHECK(count_inj(rooted, k3, std::vector<int>{2}) == 2);
        CHECK(count_inj(named("P3"), k3, none) == 6);
        CHECK(count_copies(named("K3"), k4, none) == 4);
        CHECK(count_copies(named("K2"), k3, none) == 3);
        CHECK(count_copies(named("K3"), k3, none) == 1);
        CHECK(count_inj(named("K3"), k3, none) == 6);
        CHECK(count_aut(named("K3")) == 6);
        CHECK(count_aut(named("P3")) == 2);
        CHECK(count_aut(rooted) == 1);
    }

    TEST_CASE("backtracking agrees with the naive enumerator (5-vertex hosts)")
    {
        std::vector<LabelledGraph> patterns;
        for (int labels = 0; labels <= 2; ++labels)
            for (int order = std::max(labels, 1); order <= 4; ++order)
                for (auto& f : oracle::all_patterns(labels, order))
                    patterns.push_back(f);
        bool ok = true;
        for (int n = 1; n <= 5 && ok; ++n)
            for (const auto& g : oracle::graph_classes(n))
                for (const auto& f : patterns)
                    for (const auto& w : oracle::tuples(n, f.labels())) {
                        if (count_inj(f, g, w) != oracle::inj(f, g, w) ||
                            count_copies(f, g, w) != oracle::copies(f, g, w)) {
                            ok = false;
                            FAIL_CHECK(f.to_string() << " on " << graph_to_json(g).dump());
                        }
                    }
        CHECK(ok);
        for (const auto& f : patterns)
            CHECK(count_aut(f) == oracle::aut(f));
    }

    TEST_CASE("aut divisibility and factorization on random n=12 graphs")
    {
        CounterRng rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            auto g = oracle::random_graph(12, 0.5, rng);
            for (int labels = 0; labels <= 1; ++labels)
                for (int order = labels + 1; order <= 4; ++order)
                    for (const auto& f : oracle::all_patterns(labels, order)) {
                        if (!oracle::connected(f.as_graph()) || f.edge_count() == 0)
                            continue;
                        const std::vector<int> w(labels, 3);
                        const auto inj = count_inj(f, g, w);
                        CHECK(inj % count_aut(f) == 0);
                        CHECK(inj == count_aut(f) * count_copies(f, g, w));
                    }
        }
    }

    TEST_CASE("quotient identity for repeated roots")
    {
        auto f = LabelledGraph::from_edges(3, 5, std::vector<Edge>{{0, 3}, {1, 3}, {2, 4}, {3, 4}});
        CounterRng rng(9);
        for (int rep = 0; rep < 20; ++rep) {
            auto g = oracle::random_graph(6, 0.6, rng);
            for (const auto& w : oracle::tuples(6, 3)) {
                auto pi = Partition::of_tuple(w);
                std::vector<int> reps;
                for (int b = 0; b < pi.block_count(); ++b)
                    reps.push_back(w[pi.representative(b)]);
                auto fq = quotient(f, pi);
                CHECK(count_inj(f, g, w) == count_inj(fq, g, reps));
                CHECK(count_inj(f, g, w) == count_aut(fq) * count_copies(fq, g, reps));
            }
        }
    }

    TEST_CASE("freq_vector examples")
    {
        auto k3 = Graph::from_edges(3, k3_edges);
        const std::vector<int> none;
        auto f2 = freq_vector(k3, none, 3, 2);
        REQUIRE(f2.size() == 4);
        CHECK(f2.residues == std::vector<int>{1, 0, 0, 0});
        CHECK(f2.at(canonical_form(named("K3"))) == 0);
        auto f3 = freq_vector(k3, none, 3, 3);
        CHECK(f3.residues == std::vector<int>{0, 0, 0, 0});

        const auto k2 = canonical_form(named("K2"));
        for (std::uint64_t s = 0; s < 20; ++s)
            CHECK(freq_vector(sample_gnp(9, 0.5, s), none, 2, 2).at(k2) == 0);
    }

    TEST_CASE("freq_vector K1 coordinate and json roundtrip")
    {
        auto g = sample_gnp(11, 0.5, 4);
        const std::vector<int> w{3, 3, 5};
        auto f = freq_vector(g, w, 1, 3);
        CHECK(f.at(canonical_form(LabelledGraph::k1(3))) == (11 - 2) % 3);
        CHECK(FreqVector::from_json(nlohmann::ordered_json::parse(f.to_json().dump())) == f);
    }

    TEST_CASE("enumerate_feasible examples")
    {
        const TypeTau empty = type_of(Graph(0), std::vector<int>{});
        for (int r = 0; r < 2; ++r) {
            auto set = enumerate_feasible(empty, 3, 2, r);
            REQUIRE(set.size() == 1);
            CHECK(set.member(0).residues == std::vector<int>{r, 0, 0, 0});
        }
        auto set3 = enumerate_feasible(empty, 3, 3, 1);
        CHECK(set3.size() == 9);
        for (const auto& m : set3.members()) {
            CHECK(m[0] == 1);
            CHECK(m[3] == 0);
        }
        CHECK_THROWS_AS(enumerate_feasible(empty, 5, 3, 0).members(1000), std::length_error);
    }

    TEST_CASE("actual frequency vectors are feasible")
    {
        CounterRng rng(21);
        for (int rep = 0; rep < 30; ++rep) {
            const int n = 5 + static_cast<int>(rng.below(5));
            auto g = oracle::random_graph(n, 0.5, rng);
            for (int k = 0; k <= 2; ++k) {
                std::vector<int> w;
                for (int i = 0; i < k; ++i)
                    w.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
                for (int q : {2, 3}) {
                    auto f = freq_vector(g, w, PatternBasis::conn(k, 2), q);
                    FeasibleSet set(type_of(g, w), f.basis, q, n % q);
                    CHECK_MESSAGE(set.contains(f), set.violation(f));
                }
            }
        }
    }

    TEST_CASE("copy sets of non-isomorphic label-connected patterns are disjoint")
    {
        auto patterns = enumerate_label_connected(1, 3);
        CounterRng rng(2);
        for (int rep = 0; rep < 5; ++rep) {
            auto g = oracle::random_graph(6, 0.6, rng);
            const std::vector<int> w{0};
            std::map<std::set<std::pair<int, int>>, int> owner;
            bool disjoint = true;
            for (std::size_t i = 0; i < patterns.size(); ++i) {
                const auto edges = patterns[i].edges();
                oracle::for_each_injective(patterns[i], g, w, [&](const std::vector<int>& chi) {
                    std::set<std::pair<int, int>> im;
                    for (auto [a, b] : edges)
                        im.insert(std::minmax(chi[a], chi[b]));
                    auto [it, fresh] = owner.emplace(im, static_cast<int>(i));
                    if (!fresh && it->second != static_cast<int>(i))
                        disjoint = false;
                });
            }
            CHECK(disjoint);
        }
    }
}
