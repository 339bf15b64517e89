#include <doctest.h>

#include "modlaw/elimination.hpp"
#include "oracles.hpp"
#include "suite.hpp"

using namespace modlaw;

namespace {

std::vector<Graph> small_universe(int max_n)
{
    std::vector<Graph> out;
    for (int n = 1; n <= max_n; ++n)
        for (auto& g : oracle::graph_classes(n))
            out.push_back(g);
    return out;
}

std::uint64_t total_disagreements(const char* text, int q, int max_n)
{
    auto phi = parse(text);
    auto psi = build_psi(*phi, q);
    std::uint64_t bad = 0;
    for (const auto& g : small_universe(max_n))
        bad += count_disagreements(psi, *phi, g);
    return bad;
}

} // namespace

TEST_SUITE("elimination")
{
    TEST_CASE("atomic psi")
    {
        auto psi = build_psi(*parse("E(a1,a2)"), 2);
        CHECK(psi.arity() == 2);
        CHECK(psi.support()->size() == 0);
        CHECK(psi.c_used() == 0);
        for (const auto& tau : TypeTau::all(2)) {
            const bool expected = !tau.equal(0, 1) && tau.adjacent(0, 1);
            CHECK(psi.evaluate_aligned(tau, std::vector<int>{}) == expected);
        }
        CHECK(total_disagreements("E(a1,a2)", 2, 5) == 0);
        CHECK(total_disagreements("(a1 = a2 | !E(a1,a2))", 3, 5) == 0);
    }

    TEST_CASE("parity of the rooted edge")
    {
        auto psi = build_psi(*parse("parity y. E(a1,y)"), 2);
        const auto edge = canonical_form(LabelledGraph::from_edges(1, 2, std::vector<Edge>{{0, 1}}));
        REQUIRE(psi.support()->find(edge).has_value());
        CHECK(psi.c_used() == 1);
        auto tau = TypeTau::all(1).at(0);
        for (int r = 0; r < 2; ++r) {
            auto f = FreqVector{2, PatternBasis::conn(1, 1), {0, r}};
            CHECK(psi(tau, f) == (r == 1));
        }
        CHECK(total_disagreements("parity y. E(a1,y)", 2, 6) == 0);
        CHECK(total_disagreements("mod[3,2] y. E(a1,y)", 3, 6) == 0);
    }

    TEST_CASE("exists a neighbour")
    {
        // Every feasible extension is realized in the limit, so psi accepts
        // each singleton-type root; it is wrong exactly at isolated roots.
        auto phi = parse("exists y. E(a1,y)");
        auto psi = build_psi(*phi, 2);
        for (const auto& g : small_universe(6))
            for (int v = 0; v < g.order(); ++v) {
                const std::vector<int> w{v};
                const bool truth = evaluate(*phi, g, {{"a1", v}});
                CHECK(psi.evaluate_graph(g, w));
                CHECK(truth == (g.degree(v) > 0));
            }
    }

    TEST_CASE("suite profiles")
    {
        for (const auto& s : suite::formulas()) {
            auto profile = limit_probabilities(*parse(s.text), s.q);
            REQUIRE(profile.a.size() == s.profile.size());
            for (std::size_t i = 0; i < s.profile.size(); ++i)
                CHECK_MESSAGE(profile.a[i].to_string() == s.profile[i], s.text);
            // Denominators are powers of q.
            for (const auto& a : profile.a) {
                auto d = a.den;
                while (d % s.q == 0)
                    d /= s.q;
                CHECK(d == 1);
            }
        }
    }

    TEST_CASE("psi is exact for mod-only sentences on small graphs")
    {
        CHECK(total_disagreements("parity x. parity y. E(x,y)", 2, 6) == 0);
        CHECK(total_disagreements("parity x. x = x", 2, 6) == 0);
        CHECK(total_disagreements("mod[3,0] x. mod[3,0] y. E(x,y)", 3, 6) == 0);
        CHECK(total_disagreements("mod[3,1] x. mod[3,2] y. (E(x,y) | x = y)", 3, 6) == 0);
    }

    TEST_CASE("psi with two free variables on random graphs")
    {
        const std::vector<std::pair<const char*, int>> formulas{
            {"parity z. (E(x,z) & E(y,z))", 2},
            {"mod[3,1] z. (E(x,z) | E(y,z))", 3},
            {"(E(x,y) & parity z. E(x,z))", 2},
        };
        for (auto [text, q] : formulas) {
            auto phi = parse(text);
            auto psi = build_psi(*phi, q);
            for (std::uint64_t s = 0; s < 20; ++s)
                CHECK_MESSAGE(count_disagreements(psi, *phi, sample_gnp(12, 0.5, s)) == 0, text);
        }
    }

    TEST_CASE("forall is not-exists-not")
    {
        auto a = build_psi(*parse("forall x. parity y. E(x,y)"), 2);
        auto b = build_psi(*parse("!exists x. !parity y. E(x,y)"), 2);
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto g = sample_gnp(10 + static_cast<int>(s % 3), 0.5, s);
            CHECK(a.evaluate_graph(g, std::vector<int>{}) == b.evaluate_graph(g, std::vector<int>{}));
        }
    }

    TEST_CASE("errors")
    {
        CHECK_THROWS_AS(build_psi(*parse("(parity x. x = x & mod[3,0] y. y = y)"), 2), std::invalid_argument);
        CHECK_THROWS_AS(build_psi(*parse("parity x. x = x"), 4), std::invalid_argument);
        CHECK_THROWS_AS(limit_probabilities(*parse("E(x,y)"), 2), std::invalid_argument);
        EliminationOptions tight;
        tight.c_cap = 0;
        try {
            build_psi(*parse("parity x. parity y. E(x,y)"), 2, tight);
            FAIL("expected a scale error");
        } catch (const ScaleError& e) {
            CHECK(std::string(e.what()).find("parity y. E(x,y)") != std::string::npos);
        }
    }

    TEST_CASE("formula_to_polynomial")
    {
        auto even = formula_to_polynomial(*parse("parity x. x = x"), 2, 4);
        CHECK(even.polynomial.is_zero());
        auto odd = formula_to_polynomial(*parse("parity x. x = x"), 2, 5);
        CHECK(odd.polynomial == ZqPolynomial::constant(2, 10, 1));
        // [K2] = 2|E| vanishes mod 2, so the ordered-pair parity compiles to zero.
        for (int n : {4, 5})
            CHECK(formula_to_polynomial(*parse("parity x. parity y. E(x,y)"), 2, n).polynomial.is_zero());

        const std::vector<std::pair<const char*, int>> formulas{
            {"parity x. parity y. E(x,y)", 2},
            {"exists x. parity y. E(x,y)", 2},
            {"mod[3,1] x. mod[3,2] y. (E(x,y) | x = y)", 3},
            {"mod[3,0] x. exists y. E(x,y)", 3},
        };
        for (auto [text, q] : formulas) {
            auto phi = parse(text);
            auto psi = build_psi(*phi, q);
            auto poly = formula_to_polynomial(*phi, q, 4);
            CHECK(poly.polynomial.variables() == 6);
            CHECK(static_cast<std::uint64_t>(poly.degree) <= poly.degree_bound);
            for (std::uint64_t mask = 0; mask < 64; ++mask) {
                auto g = oracle::graph_from_mask(4, mask);
                std::vector<int> x(6, 0);
                for (auto [u, v] : g.edges())
                    x[edge_index(4, u, v)] = 1;
                const int value = poly.polynomial.evaluate(x);
                CHECK((value == 1) == psi.evaluate_graph(g, std::vector<int>{}));
                CHECK((value == 0 || value == 1));
            }
        }
        CHECK_THROWS_AS(formula_to_polynomial(*parse("parity x. x = x"), 2, 13), ScaleError);
        CHECK(edge_index(4, 0, 1) == 0);
        CHECK(edge_index(4, 2, 3) == 5);
    }
}
