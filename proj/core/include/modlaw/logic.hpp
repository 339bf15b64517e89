#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

#include "modlaw/graph.hpp"

namespace modlaw {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct EdgeAtom {
    std::string a, b;
};
struct EqualAtom {
    std::string a, b;
};
struct NotNode {
    FormulaPtr child;
};
struct AndNode {
    FormulaPtr left, right;
};
struct OrNode {
    FormulaPtr left, right;
};
struct ExistsNode {
    std::string var;
    FormulaPtr body;
};
struct ForallNode {
    std::string var;
    FormulaPtr body;
};
/// Mod_q^i var. body: the number of witnesses is i mod q.
struct ModNode {
    int q = 2;
    int i = 1;
    std::string var;
    FormulaPtr body;
};

struct Formula {
    std::variant<EdgeAtom, EqualAtom, NotNode, AndNode, OrNode, ExistsNode, ForallNode, ModNode> node;
};

FormulaPtr make_edge(std::string a, std::string b);
FormulaPtr make_equal(std::string a, std::string b);
FormulaPtr make_not(FormulaPtr child);
FormulaPtr make_and(FormulaPtr left, FormulaPtr right);
FormulaPtr make_or(FormulaPtr left, FormulaPtr right);
FormulaPtr make_exists(std::string var, FormulaPtr body);
FormulaPtr make_forall(std::string var, FormulaPtr body);
/// Throws std::invalid_argument unless q is prime and 0 <= i < q.
FormulaPtr make_mod(int q, int i, std::string var, FormulaPtr body);

enum class ParseErrorCode { Syntax, ResidueOutOfRange, NonPrimeModulus };

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorCode code, std::size_t offset, const std::string& message);
    ParseErrorCode code() const noexcept { return code_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    ParseErrorCode code_;
    std::size_t offset_;
};

/// Grammar:
///   formula := "E(" var "," var ")" | var "=" var | "!" formula
///            | "(" formula "&" formula ")" | "(" formula "|" formula ")"
///            | "exists" var "." formula | "forall" var "." formula
///            | "parity" var "." formula | "mod[" int "," int "]" var "." formula
///   var := [a-z][a-z0-9]*
/// Whitespace is ignored between tokens. The quantifier keywords are reserved.
FormulaPtr parse(const std::string& text);

/// Concrete syntax accepted by parse; mod[2,1] prints as "parity".
std::string to_string(const Formula& phi);

bool structurally_equal(const Formula& a, const Formula& b);

std::set<std::string> free_variables(const Formula& phi);
int quantifier_depth(const Formula& phi);
/// Moduli of all counting quantifiers.
std::set<int> moduli(const Formula& phi);

bool is_prime(int q);

using Assignment = std::map<std::string, int>;

/// Direct recursive evaluation; quantifiers range over all vertices.
/// Throws std::invalid_argument on an unbound variable.
bool evaluate(const Formula& phi, const Graph& g, const Assignment& env = {});

} // namespace modlaw
