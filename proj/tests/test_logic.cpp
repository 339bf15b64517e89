#include <doctest.h>

#include "modlaw/logic.hpp"
#include "oracles.hpp"

using namespace modlaw;

namespace {

Graph complete(int n) { return Graph::from_edges(n, oracle::all_pairs(n)); }

Graph cycle(int n)
{
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        edges.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
    std::sort(edges.begin(), edges.end());
    return Graph::from_edges(n, edges);
}

const std::vector<std::string> corpus{
    "E(x,y)",
    "exists x. forall y. (E(x,y) | x = y)",
    "parity x. parity y. E(x,y)",
    "forall x. parity y. E(x,y)",
    "mod[3,1] x. exists y. (E(x,y) & !x = y)",
    "exists x. !exists y. E(x,y)",
    "(parity x. x = x | forall x. exists y. E(x,y))",
    "mod[3,2] x. mod[3,0] y. (E(x,y) | x = y)",
};

} // namespace

TEST_SUITE("logic")
{
    TEST_CASE("parse examples")
    {
        auto phi = parse("forall x. parity y. E(x,y)");
        auto expected = make_forall("x", make_mod(2, 1, "y", make_edge("x", "y")));
        CHECK(structurally_equal(*phi, *expected));
        CHECK(to_string(*phi) == "forall x. parity y. E(x,y)");
        CHECK(structurally_equal(*parse("mod[3,2] x. x = x"), *make_mod(3, 2, "x", make_equal("x", "x"))));
        CHECK(structurally_equal(*parse("  ( E( a1 ,b ) &!a1=b )"),
                                 *make_and(make_edge("a1", "b"), make_not(make_equal("a1", "b")))));
    }

    TEST_CASE("parse errors")
    {
        try {
            parse("E(x");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.code() == ParseErrorCode::Syntax);
            CHECK(e.offset() == 3);
        }
        try {
            parse("mod[4,1] x. x = x");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.code() == ParseErrorCode::NonPrimeModulus);
        }
        try {
            parse("mod[3,3] x. x = x");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.code() == ParseErrorCode::ResidueOutOfRange);
        }
        CHECK_THROWS_AS(parse("exists exists. x = x"), ParseError);
        CHECK_THROWS_AS(parse("E(x,y) trailing"), ParseError);
        CHECK_THROWS_AS(make_mod(6, 1, "x", make_equal("x", "x")), std::invalid_argument);
    }

    TEST_CASE("round trip through to_string")
    {
        for (const auto& text : corpus) {
            auto phi = parse(text);
            CHECK(structurally_equal(*parse(to_string(*phi)), *phi));
        }
    }

    TEST_CASE("free variables, depth and moduli")
    {
        CHECK(quantifier_depth(*parse("E(x,y)")) == 0);
        CHECK(quantifier_depth(*parse("forall x. parity y. E(x,y)")) == 2);
        CHECK(quantifier_depth(*parse("(exists x. E(x,y) & E(y,z))")) == 1);
        CHECK(free_variables(*parse("(exists x. E(x,y) & E(y,z))")) == std::set<std::string>{"y", "z"});
        CHECK(free_variables(*parse("forall x. parity y. E(x,y)")).empty());
        CHECK(moduli(*parse("(parity x. x = x & mod[3,0] y. y = y)")) == std::set<int>{2, 3});
        CHECK(is_prime(2));
        CHECK(is_prime(13));
        CHECK_FALSE(is_prime(1));
        CHECK_FALSE(is_prime(9));
    }

    TEST_CASE("evaluate examples")
    {
        auto phi = parse("forall x. parity y. E(x,y)");
        CHECK(evaluate(*phi, complete(4)));
        CHECK_FALSE(evaluate(*phi, cycle(4)));
        auto count = parse("parity x. x = x");
        for (int n = 0; n <= 6; ++n)
            CHECK(evaluate(*count, Graph(n)) == (n % 2 == 1));
        CHECK(evaluate(*parse("E(x,y)"), complete(3), {{"x", 0}, {"y", 2}}));
        CHECK_FALSE(evaluate(*parse("E(x,y)"), complete(3), {{"x", 1}, {"y", 1}}));
        CHECK_THROWS_AS(evaluate(*parse("E(x,y)"), complete(3), {{"x", 0}}), std::invalid_argument);
    }

    TEST_CASE("mod quantifier agrees with a direct residue fold")
    {
        CounterRng rng(3);
        for (int rep = 0; rep < 20; ++rep) {
            const int n = 1 + static_cast<int>(rng.below(9));
            auto g = oracle::random_graph(n, 0.5, rng);
            for (int q : {2, 3})
                for (int i = 0; i < q; ++i) {
                    auto phi = make_mod(q, i, "y", make_edge("x", "y"));
                    for (int x = 0; x < n; ++x)
                        CHECK(evaluate(*phi, g, {{"x", x}}) == (g.degree(x) % q == i));
                }
        }
    }

    TEST_CASE("evaluation is invariant under isomorphism")
    {
        CounterRng rng(4);
        for (int rep = 0; rep < 20; ++rep) {
            const int n = 2 + static_cast<int>(rng.below(6));
            auto g = oracle::random_graph(n, 0.5, rng);
            auto sigma = oracle::random_permutation(n, rng);
            auto h = g.permuted(sigma);
            for (const auto& text : corpus) {
                auto phi = parse(text);
                Assignment env, moved;
                for (const auto& v : free_variables(*phi)) {
                    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
                    env[v] = x;
                    moved[v] = sigma[x];
                }
                CHECK(evaluate(*phi, g, env) == evaluate(*phi, h, moved));
            }
        }
    }

    TEST_CASE("De Morgan")
    {
        CounterRng rng(5);
        for (int rep = 0; rep < 30; ++rep) {
            const int n = 1 + static_cast<int>(rng.below(6));
            auto g = oracle::random_graph(n, 0.5, rng);
            for (const auto& text : corpus) {
                auto body = parse(text);
                auto lhs = make_not(make_exists("x", body));
                auto rhs = make_forall("x", make_not(body));
                Assignment env;
                for (const auto& v : free_variables(*body))
                    env[v] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
                env.erase("x");
                CHECK(evaluate(*lhs, g, env) == evaluate(*rhs, g, env));
            }
        }
    }
}
