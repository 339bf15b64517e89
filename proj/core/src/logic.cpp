#include "modlaw/logic.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace modlaw {

namespace {

FormulaPtr wrap(auto node)
{
    return std::make_shared<const Formula>(Formula{std::move(node)});
}

bool valid_var(const std::string& v)
{
    if (v.empty() || !std::islower(static_cast<unsigned char>(v[0])))
        return false;
    return std::all_of(v.begin(), v.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c));
    });
}

bool reserved(const std::string& v)
{
    return v == "exists" || v == "forall" || v == "parity" || v == "mod";
}

void require_var(const std::string& v)
{
    if (!valid_var(v) || reserved(v))
        throw std::invalid_argument("invalid variable name '" + v + "'");
}

} // namespace

bool is_prime(int q)
{
    if (q < 2)
        return false;
    for (int d = 2; d * d <= q; ++d)
        if (q % d == 0)
            return false;
    return true;
}

FormulaPtr make_edge(std::string a, std::string b)
{
    require_var(a);
    require_var(b);
    return wrap(EdgeAtom{std::move(a), std::move(b)});
}

FormulaPtr make_equal(std::string a, std::string b)
{
    require_var(a);
    require_var(b);
    return wrap(EqualAtom{std::move(a), std::move(b)});
}

FormulaPtr make_not(FormulaPtr child)
{
    return wrap(NotNode{std::move(child)});
}

FormulaPtr make_and(FormulaPtr left, FormulaPtr right)
{
    return wrap(AndNode{std::move(left), std::move(right)});
}

FormulaPtr make_or(FormulaPtr left, FormulaPtr right)
{
    return wrap(OrNode{std::move(left), std::move(right)});
}

FormulaPtr make_exists(std::string var, FormulaPtr body)
{
    require_var(var);
    return wrap(ExistsNode{std::move(var), std::move(body)});
}

FormulaPtr make_forall(std::string var, FormulaPtr body)
{
    require_var(var);
    return wrap(ForallNode{std::move(var), std::move(body)});
}

FormulaPtr make_mod(int q, int i, std::string var, FormulaPtr body)
{
    if (!is_prime(q))
        throw std::invalid_argument("modulus " + std::to_string(q) + " is not prime");
    if (i < 0 || i >= q)
        throw std::invalid_argument("residue " + std::to_string(i) + " out of range for modulus " + std::to_string(q));
    require_var(var);
    return wrap(ModNode{q, i, std::move(var), std::move(body)});
}

// ---------------------------------------------------------------------------
// Parser

ParseError::ParseError(ParseErrorCode code, std::size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message), code_(code), offset_(offset)
{
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    FormulaPtr run()
    {
        auto phi = formula();
        skip();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        return phi;
    }

private:
    [[noreturn]] void fail(const std::string& what, ParseErrorCode code = ParseErrorCode::Syntax)
    {
        throw ParseError(code, pos_, what);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool peek(char c)
    {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    void expect(char c)
    {
        skip();
        if (pos_ >= s_.size() || s_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string identifier()
    {
        skip();
        const std::size_t start = pos_;
        if (pos_ >= s_.size() || !std::islower(static_cast<unsigned char>(s_[pos_])))
            fail("expected a variable");
        while (pos_ < s_.size() &&
               (std::islower(static_cast<unsigned char>(s_[pos_])) || std::isdigit(static_cast<unsigned char>(s_[pos_]))))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    std::string variable()
    {
        skip();
        const std::size_t start = pos_;
        auto v = identifier();
        if (reserved(v)) {
            pos_ = start;
            fail("'" + v + "' is a reserved word");
        }
        return v;
    }

    int integer()
    {
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("expected an integer");
        if (pos_ - start > 9) {
            pos_ = start;
            fail("integer too large");
        }
        return std::stoi(s_.substr(start, pos_ - start));
    }

    FormulaPtr formula()
    {
        skip();
        if (pos_ >= s_.size())
            fail("expected a formula");
        const char c = s_[pos_];
        if (c == '!') {
            ++pos_;
            return make_not(formula());
        }
        if (c == '(') {
            ++pos_;
            auto left = formula();
            skip();
            if (pos_ >= s_.size() || (s_[pos_] != '&' && s_[pos_] != '|'))
                fail("expected '&' or '|'");
            const char op = s_[pos_++];
            auto right = formula();
            expect(')');
            return op == '&' ? make_and(std::move(left), std::move(right)) : make_or(std::move(left), std::move(right));
        }
        if (c == 'E') {
            ++pos_;
            expect('(');
            auto a = variable();
            expect(',');
            auto b = variable();
            expect(')');
            return make_edge(std::move(a), std::move(b));
        }
        const std::size_t start = pos_;
        auto word = identifier();
        if (word == "exists" || word == "forall" || word == "parity") {
            auto var = variable();
            expect('.');
            auto body = formula();
            if (word == "exists")
                return make_exists(std::move(var), std::move(body));
            if (word == "forall")
                return make_forall(std::move(var), std::move(body));
            return make_mod(2, 1, std::move(var), std::move(body));
        }
        if (word == "mod") {
            if (pos_ >= s_.size() || s_[pos_] != '[')
                fail("expected '['");
            ++pos_;
            skip();
            const std::size_t q_at = pos_;
            const int q = integer();
            expect(',');
            skip();
            const std::size_t i_at = pos_;
            const int i = integer();
            expect(']');
            if (!is_prime(q)) {
                pos_ = q_at;
                fail("modulus " + std::to_string(q) + " is not prime", ParseErrorCode::NonPrimeModulus);
            }
            if (i >= q) {
                pos_ = i_at;
                fail("residue " + std::to_string(i) + " must be below " + std::to_string(q),
                     ParseErrorCode::ResidueOutOfRange);
            }
            auto var = variable();
            expect('.');
            return make_mod(q, i, std::move(var), formula());
        }
        if (reserved(word)) {
            pos_ = start;
            fail("'" + word + "' is a reserved word");
        }
        expect('=');
        auto b = variable();
        return make_equal(std::move(word), std::move(b));
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

FormulaPtr parse(const std::string& text)
{
    return Parser(text).run();
}

// ---------------------------------------------------------------------------
// Printing and structure

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void print(const Formula& phi, std::ostream& os)
{
    std::visit(overloaded{
                   [&](const EdgeAtom& n) { os << "E(" << n.a << "," << n.b << ")"; },
                   [&](const EqualAtom& n) { os << n.a << " = " << n.b; },
                   [&](const NotNode& n) {
                       os << "!";
                       print(*n.child, os);
                   },
                   [&](const AndNode& n) {
                       os << "(";
                       print(*n.left, os);
                       os << " & ";
                       print(*n.right, os);
                       os << ")";
                   },
                   [&](const OrNode& n) {
                       os << "(";
                       print(*n.left, os);
                       os << " | ";
                       print(*n.right, os);
                       os << ")";
                   },
                   [&](const ExistsNode& n) {
                       os << "exists " << n.var << ". ";
                       print(*n.body, os);
                   },
                   [&](const ForallNode& n) {
                       os << "forall " << n.var << ". ";
                       print(*n.body, os);
                   },
                   [&](const ModNode& n) {
                       if (n.q == 2 && n.i == 1)
                           os << "parity " << n.var << ". ";
                       else
                           os << "mod[" << n.q << "," << n.i << "] " << n.var << ". ";
                       print(*n.body, os);
                   },
               },
               phi.node);
}

void collect_free(const Formula& phi, std::set<std::string>& bound, std::set<std::string>& out)
{
    auto use = [&](const std::string& v) {
        if (!bound.contains(v))
            out.insert(v);
    };
    auto binder = [&](const std::string& v, const Formula& body) {
        const bool was = bound.contains(v);
        bound.insert(v);
        collect_free(body, bound, out);
        if (!was)
            bound.erase(v);
    };
    std::visit(overloaded{
                   [&](const EdgeAtom& n) {
                       use(n.a);
                       use(n.b);
                   },
                   [&](const EqualAtom& n) {
                       use(n.a);
                       use(n.b);
                   },
                   [&](const NotNode& n) { collect_free(*n.child, bound, out); },
                   [&](const AndNode& n) {
                       collect_free(*n.left, bound, out);
                       collect_free(*n.right, bound, out);
                   },
                   [&](const OrNode& n) {
                       collect_free(*n.left, bound, out);
                       collect_free(*n.right, bound, out);
                   },
                   [&](const ExistsNode& n) { binder(n.var, *n.body); },
                   [&](const ForallNode& n) { binder(n.var, *n.body); },
                   [&](const ModNode& n) { binder(n.var, *n.body); },
               },
               phi.node);
}

} // namespace

std::string to_string(const Formula& phi)
{
    std::ostringstream os;
    print(phi, os);
    return os.str();
}

bool structurally_equal(const Formula& a, const Formula& b)
{
    if (a.node.index() != b.node.index())
        return false;
    return std::visit(
        overloaded{
            [&](const EdgeAtom& x) {
                const auto& y = std::get<EdgeAtom>(b.node);
                return x.a == y.a && x.b == y.b;
            },
            [&](const EqualAtom& x) {
                const auto& y = std::get<EqualAtom>(b.node);
                return x.a == y.a && x.b == y.b;
            },
            [&](const NotNode& x) { return structurally_equal(*x.child, *std::get<NotNode>(b.node).child); },
            [&](const AndNode& x) {
                const auto& y = std::get<AndNode>(b.node);
                return structurally_equal(*x.left, *y.left) && structurally_equal(*x.right, *y.right);
            },
            [&](const OrNode& x) {
                const auto& y = std::get<OrNode>(b.node);
                return structurally_equal(*x.left, *y.left) && structurally_equal(*x.right, *y.right);
            },
            [&](const ExistsNode& x) {
                const auto& y = std::get<ExistsNode>(b.node);
                return x.var == y.var && structurally_equal(*x.body, *y.body);
            },
            [&](const ForallNode& x) {
                const auto& y = std::get<ForallNode>(b.node);
                return x.var == y.var && structurally_equal(*x.body, *y.body);
            },
            [&](const ModNode& x) {
                const auto& y = std::get<ModNode>(b.node);
                return x.q == y.q && x.i == y.i && x.var == y.var && structurally_equal(*x.body, *y.body);
            },
        },
        a.node);
}

std::set<std::string> free_variables(const Formula& phi)
{
    std::set<std::string> bound, out;
    collect_free(phi, bound, out);
    return out;
}

int quantifier_depth(const Formula& phi)
{
    return std::visit(overloaded{
                          [](const EdgeAtom&) { return 0; },
                          [](const EqualAtom&) { return 0; },
                          [](const NotNode& n) { return quantifier_depth(*n.child); },
                          [](const AndNode& n) { return std::max(quantifier_depth(*n.left), quantifier_depth(*n.right)); },
                          [](const OrNode& n) { return std::max(quantifier_depth(*n.left), quantifier_depth(*n.right)); },
                          [](const ExistsNode& n) { return 1 + quantifier_depth(*n.body); },
                          [](const ForallNode& n) { return 1 + quantifier_depth(*n.body); },
                          [](const ModNode& n) { return 1 + quantifier_depth(*n.body); },
                      },
                      phi.node);
}

std::set<int> moduli(const Formula& phi)
{
    std::set<int> out;
    std::visit(overloaded{
                   [](const EdgeAtom&) {},
                   [](const EqualAtom&) {},
                   [&](const NotNode& n) { out = moduli(*n.child); },
                   [&](const AndNode& n) {
                       out = moduli(*n.left);
                       out.merge(moduli(*n.right));
                   },
                   [&](const OrNode& n) {
                       out = moduli(*n.left);
                       out.merge(moduli(*n.right));
                   },
                   [&](const ExistsNode& n) { out = moduli(*n.body); },
                   [&](const ForallNode& n) { out = moduli(*n.body); },
                   [&](const ModNode& n) {
                       out = moduli(*n.body);
                       out.insert(n.q);
                   },
               },
               phi.node);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int lookup(const Assignment& env, const std::string& v)
{
    auto it = env.find(v);
    if (it == env.end())
        throw std::invalid_argument("unbound variable '" + v + "'");
    return it->second;
}

bool eval(const Formula& phi, const Graph& g, Assignment& env)
{
    auto count = [&](const std::string& var, const Formula& body, auto&& stop) {
        auto saved = env.find(var) == env.end() ? std::optional<int>{} : std::optional<int>{env[var]};
        int hits = 0;
        for (int v = 0; v < g.order(); ++v) {
            env[var] = v;
            if (eval(body, g, env)) {
                ++hits;
                if (stop(hits))
                    break;
            }
        }
        if (saved)
            env[var] = *saved;
        else
            env.erase(var);
        return hits;
    };
    return std::visit(overloaded{
                          [&](const EdgeAtom& n) { return g.adjacent(lookup(env, n.a), lookup(env, n.b)); },
                          [&](const EqualAtom& n) { return lookup(env, n.a) == lookup(env, n.b); },
                          [&](const NotNode& n) { return !eval(*n.child, g, env); },
                          [&](const AndNode& n) { return eval(*n.left, g, env) && eval(*n.right, g, env); },
                          [&](const OrNode& n) { return eval(*n.left, g, env) || eval(*n.right, g, env); },
                          [&](const ExistsNode& n) { return count(n.var, *n.body, [](int) { return true; }) > 0; },
                          [&](const ForallNode& n) {
                              std::optional<int> saved;
                              if (auto it = env.find(n.var); it != env.end())
                                  saved = it->second;
                              bool all = true;
                              for (int v = 0; v < g.order() && all; ++v) {
                                  env[n.var] = v;
                                  all = eval(*n.body, g, env);
                              }
                              if (saved)
                                  env[n.var] = *saved;
                              else
                                  env.erase(n.var);
                              return all;
                          },
                          [&](const ModNode& n) {
                              return count(n.var, *n.body, [](int) { return false; }) % n.q == n.i;
                          },
                      },
                      phi.node);
}

} // namespace

bool evaluate(const Formula& phi, const Graph& g, const Assignment& env)
{
    for (const auto& [v, x] : env)
        if (x < 0 || x >= g.order())
            throw std::invalid_argument("variable '" + v + "' is bound to a vertex outside the graph");
    Assignment scratch = env;
    return eval(phi, g, scratch);
}

} // namespace modlaw
