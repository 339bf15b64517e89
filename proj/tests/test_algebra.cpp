#include <doctest.h>

#include "modlaw/algebra.hpp"
#include "oracles.hpp"

using namespace modlaw;

namespace {

LabelledGraph k2() { return LabelledGraph::from_edges(0, 2, std::vector<Edge>{{0, 1}}); }
LabelledGraph p3() { return LabelledGraph::from_edges(0, 3, std::vector<Edge>{{0, 1}, {1, 2}}); }
LabelledGraph two_k2() { return LabelledGraph::from_edges(0, 4, std::vector<Edge>{{0, 1}, {2, 3}}); }

Graph k3() { return Graph::from_edges(3, std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}); }

/// Random pattern with `labels` labels and up to `extra` unlabelled vertices.
LabelledGraph random_pattern(int labels, int extra, CounterRng& rng)
{
    LabelledGraph f(labels, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(extra))));
    for (int u = 0; u < f.order(); ++u)
        for (int v = std::max(u + 1, labels); v < f.order(); ++v)
            if (rng.bernoulli(0.5))
                f.add_edge(u, v);
    return f;
}

std::vector<int> random_roots(int n, int k, CounterRng& rng)
{
    std::vector<int> w;
    for (int i = 0; i < k; ++i)
        w.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
    return w;
}

std::vector<int> append(std::vector<int> w, int v)
{
    w.push_back(v);
    return w;
}

} // namespace

TEST_SUITE("graph-algebra")
{
    TEST_CASE("partial matchings")
    {
        CHECK(partial_matchings(k2(), k2()).size() == 7);
        CHECK(partial_matchings(k2(), k2()).front().pairs.empty());
        CHECK(partial_matchings(LabelledGraph::labels_only(1), p3().with_isolated_label()).size() == 1);
        // sum_k C(2,k) C(3,k) k! = 1 + 6 + 6
        CHECK(partial_matchings(k2(), p3()).size() == 13);
        // sum_k C(3,k)^2 k! = 1 + 9 + 18 + 6
        CHECK(partial_matchings(p3(), p3()).size() == 34);
    }

    TEST_CASE("glue examples")
    {
        CHECK(oracle::isomorphic(glue(k2(), k2(), PartialMatching{}), two_k2()));
        CHECK(oracle::isomorphic(glue(k2(), k2(), PartialMatching{{{0, 0}}}), p3()));
        CHECK(oracle::isomorphic(glue(k2(), k2(), PartialMatching{{{0, 0}, {1, 1}}}), k2()));
        CHECK(oracle::isomorphic(glue(k2(), k2(), PartialMatching{{{0, 1}, {1, 0}}}), k2()));
    }

    TEST_CASE("product_expand worked identity on K3")
    {
        auto sum = product_expand(k2(), k2());
        const std::vector<int> none;
        CHECK(sum.evaluate(k3(), none) == 36);
        CHECK(sum.size() == 3);
        CHECK(sum.terms().at(canonical_form(two_k2())).coeff == 1);
        CHECK(sum.terms().at(canonical_form(p3())).coeff == 4);
        CHECK(sum.terms().at(canonical_form(k2())).coeff == 2);
        CHECK(count_inj(two_k2(), k3(), none) == 0);

        auto k1 = LabelledGraph(0, 1);
        auto ones = product_expand(k1, k1);
        auto g = sample_gnp(7, 0.5, 3);
        CHECK(ones.evaluate(g, none) == 49);
        CHECK(ones.terms().at(canonical_form(k1)).coeff == 1);
    }

    TEST_CASE("product_expand identity on random (G, w)")
    {
        CounterRng rng(1);
        for (int rep = 0; rep < 50; ++rep) {
            const int k = static_cast<int>(rng.below(3));
            const int n = 3 + static_cast<int>(rng.below(5));
            auto f1 = random_pattern(k, 3, rng);
            auto f2 = random_pattern(k, 3, rng);
            auto g = oracle::random_graph(n, 0.5, rng);
            auto w = random_roots(n, k, rng);
            const Integer expected = Integer(oracle::inj(f1, g, w)) * oracle::inj(f2, g, w);
            CHECK(product_expand(f1, f2).evaluate(g, w) == expected);
        }
    }

    TEST_CASE("PatternSum::times matches the product")
    {
        CounterRng rng(4);
        for (int rep = 0; rep < 20; ++rep) {
            auto f1 = random_pattern(1, 2, rng);
            auto f2 = random_pattern(1, 2, rng);
            auto f3 = random_pattern(1, 2, rng);
            auto g = oracle::random_graph(6, 0.5, rng);
            auto w = random_roots(6, 1, rng);
            const Integer expected =
                Integer(oracle::inj(f1, g, w)) * oracle::inj(f2, g, w) * oracle::inj(f3, g, w);
            CHECK(product_expand(f1, f2).times(f3).evaluate(g, w) == expected);
        }
    }

    TEST_CASE("delta_polynomial of 2K2")
    {
        auto expected = FreqPolynomial::variable(k2()) * FreqPolynomial::variable(k2());
        expected -= FreqPolynomial::variable(p3()).scaled(4);
        expected -= FreqPolynomial::variable(k2()).scaled(2);
        CHECK(delta_polynomial(two_k2()) == expected);
        CHECK(delta_polynomial(p3()) == FreqPolynomial::variable(p3()));
        CHECK_THROWS_AS(delta_polynomial(two_k2(), 3), std::length_error);
    }

    TEST_CASE("delta_polynomial evaluates to counts; split strategies agree")
    {
        CounterRng rng(8);
        int checked = 0;
        while (checked < 60) {
            const int k = static_cast<int>(rng.below(3));
            auto f = random_pattern(k, 4, rng);
            if (f.is_label_connected())
                continue;
            const int n = 4 + static_cast<int>(rng.below(4));
            auto g = oracle::random_graph(n, 0.5, rng);
            auto w = random_roots(n, k, rng);
            const Integer expected = oracle::inj(f, g, w);
            CHECK(delta_polynomial(f, SplitStrategy::First).evaluate(g, w) == expected);
            CHECK(delta_polynomial(f, SplitStrategy::Last).evaluate(g, w) == expected);
            ++checked;
        }
    }

    TEST_CASE("extends holds on actual data")
    {
        CounterRng rng(12);
        for (int rep = 0; rep < 25; ++rep) {
            auto g = oracle::random_graph(12, 0.5, rng);
            const int k = static_cast<int>(rng.below(3));
            auto w = random_roots(12, k, rng);
            const int v = static_cast<int>(rng.below(12));
            const int q = rng.bernoulli(0.5) ? 2 : 3;
            const int b = 1 + static_cast<int>(rng.below(2));
            auto wv = append(w, v);
            auto f = freq_vector(g, w, PatternBasis::conn(k, b), q);
            auto fp = freq_vector(g, wv, PatternBasis::conn(k + 1, b), q);
            CHECK(extends(type_of(g, wv), fp, type_of(g, w), f));
        }
        auto g = sample_gnp(8, 0.5, 1);
        const std::vector<int> w{0, 1};
        auto f = freq_vector(g, w, PatternBasis::conn(2, 1), 2);
        auto fp = freq_vector(g, std::vector<int>{2, 2, 3}, PatternBasis::conn(3, 1), 2);
        CHECK_FALSE(extends(type_of(g, std::vector<int>{2, 2, 3}), fp, type_of(g, w), f));
    }

    TEST_CASE("perturbing the rooted-edge coordinate breaks extends (k = 0, q = 3)")
    {
        // The rooted edge enters the K2 equation with coefficient 2, which
        // is invertible mod 3. Coordinates with coefficient 0 mod q cannot be
        // detected this way.
        const auto edge = canonical_form(LabelledGraph::from_edges(1, 2, std::vector<Edge>{{0, 1}}));
        const std::vector<int> none;
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto g = sample_gnp(12, 0.5, s);
            const std::vector<int> v{static_cast<int>(s % 12)};
            auto f = freq_vector(g, none, PatternBasis::conn(0, 2), 3);
            auto fp = freq_vector(g, v, PatternBasis::conn(1, 2), 3);
            REQUIRE(extends(type_of(g, v), fp, type_of(g, none), f));
            auto bad = fp;
            const auto i = fp.basis->index_of(edge);
            bad.residues[i] = (bad.residues[i] + 1) % 3;
            CHECK_FALSE(extends(type_of(g, v), bad, type_of(g, none), f));
        }
    }

    TEST_CASE("complete_extension roundtrip")
    {
        CounterRng rng(31);
        for (int rep = 0; rep < 50; ++rep) {
            auto g = oracle::random_graph(12, 0.5, rng);
            const int k = static_cast<int>(rng.below(3));
            auto w = random_roots(12, k, rng);
            const int u = static_cast<int>(rng.below(12));
            const int q = rng.bernoulli(0.5) ? 2 : 3;
            const int b = 1 + static_cast<int>(rng.below(2));
            auto wu = append(w, u);
            auto tau_prime = type_of(g, wu);
            auto f = freq_vector(g, w, PatternBasis::conn(k, b), q);
            auto actual = freq_vector(g, wu, PatternBasis::conn(k + 1, b), q);
            std::map<CanonicalCode, int> dependent;
            if (tau_prime.last_is_singleton())
                for (std::size_t i = 0; i < actual.size(); ++i)
                    if (actual.basis->pattern(i).depends_on_label(k))
                        dependent[actual.basis->code(i)] = actual[i];
            CHECK(complete_extension(tau_prime, type_of(g, w), f, dependent, b) == actual);
        }
    }

    TEST_CASE("complete_extension pins K1 at k = 0")
    {
        auto g = sample_gnp(10, 0.5, 6);
        const std::vector<int> none;
        const std::vector<int> v{4};
        for (int q : {2, 3}) {
            auto f = freq_vector(g, none, PatternBasis::conn(0, 1), q);
            auto edge = LabelledGraph::from_edges(1, 2, std::vector<Edge>{{0, 1}});
            std::map<CanonicalCode, int> dependent{{canonical_form(edge), g.degree(4) % q}};
            auto out = complete_extension(type_of(g, v), type_of(g, none), f, dependent, 1);
            CHECK(out.at(canonical_form(LabelledGraph::k1(1))) == (10 - 1) % q);
        }
        auto f = freq_vector(g, none, PatternBasis::conn(0, 1), 2);
        CHECK_THROWS_AS(complete_extension(type_of(g, v), type_of(g, none), f, {}, 1), std::invalid_argument);
    }

    TEST_CASE("lambda_count agrees with direct counting (k = 0, b = 1)")
    {
        const std::vector<int> none;
        const auto basis1 = PatternBasis::conn(1, 1);
        for (int q : {2, 3}) {
            const int a = lambda_size_bound(q, 1, basis1->size());
            for (int n = 1; n <= 5; ++n)
                for (const auto& g : oracle::graph_classes(n)) {
                    auto f = freq_vector(g, none, PatternBasis::conn(0, a), q);
                    std::map<std::vector<int>, int> tally;
                    for (int v = 0; v < n; ++v)
                        ++tally[freq_vector(g, std::vector<int>{v}, basis1, q).residues];
                    const auto tau_prime = TypeTau::all(1).at(0);
                    for (const auto& x : oracle::tuples(q, static_cast<int>(basis1->size()))) {
                        FreqVector fp{q, basis1, x};
                        CHECK(lambda_count(tau_prime, fp, type_of(g, none), f, a) == tally[x] % q);
                    }
                }
        }
    }

    TEST_CASE("lambda handshake example")
    {
        // k = 0, q = 2, f' = (K1 coordinate, rooted edge = 1): the number of
        // odd-degree vertices is even.
        const auto basis1 = PatternBasis::conn(1, 1);
        const std::vector<int> none;
        for (std::uint64_t s = 0; s < 10; ++s) {
            auto g = sample_gnp(7 + static_cast<int>(s % 2), 0.5, s);
            auto f = freq_vector(g, none, PatternBasis::conn(0, 3), 2);
            FreqVector fp{2, basis1, {(g.order() - 1) % 2, 1}};
            CHECK(lambda_count(TypeTau::all(1).at(0), fp, type_of(g, none), f, 3) == 0);
        }
        CHECK_THROWS_AS(lambda_count(TypeTau::all(1).at(0), FreqVector{2, basis1, {0, 1}},
                                     type_of(Graph(3), none), freq_vector(Graph(3), none, 2, 2), 2),
                        std::invalid_argument);
    }

    TEST_CASE("mod_q")
    {
        CHECK(mod_q(Integer(-7), 3) == 2);
        CHECK(mod_q(Integer(7), 3) == 1);
    }
}
