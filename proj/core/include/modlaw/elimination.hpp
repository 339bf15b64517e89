#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "modlaw/count.hpp"
#include "modlaw/logic.hpp"
#include "modlaw/pattern.hpp"
#include "modlaw/polybias.hpp"

namespace modlaw {

/// Raised when an elimination step would exceed a configured bound.
class ScaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EliminationOptions {
    /// Largest unlabelled size allowed in any frequency coordinate psi reads.
    std::optional<int> c_cap;
    /// Bound on value tables (Mod) and candidate extensions (exists) per type.
    std::uint64_t enumeration_cap = std::uint64_t{1} << 20;
    /// Bound on terms in formula_to_polynomial.
    std::size_t term_cap = 1'000'000;
};

class PsiNode;

/// psi(tau, f) for a formula with free variables bound to positions
/// 0..k-1. Only the coordinates in support() are read; c_used() is the
/// largest unlabelled size among them. Safe to evaluate concurrently.
class PsiFunction {
public:
    PsiFunction(std::shared_ptr<const PsiNode> root, std::vector<std::string> variables, int q);

    int arity() const noexcept { return static_cast<int>(variables_.size()); }
    int q() const noexcept { return q_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::shared_ptr<const PatternBasis>& support() const;
    int c_used() const;

    /// f supplies each support coordinate by code (extra coordinates ignored).
    bool operator()(const TypeTau& tau, const FreqVector& f) const;
    /// Values aligned with support().
    bool evaluate_aligned(const TypeTau& tau, std::span<const int> values) const;
    /// psi(type_G(w), freq_G(w)) computed directly from g.
    bool evaluate_graph(const Graph& g, std::span<const int> w) const;

private:
    std::shared_ptr<const PsiNode> root_;
    std::vector<std::string> variables_;
    int q_;
};

/// Quantifier elimination for a single prime modulus. Free variables take
/// positions in `variables` order (sorted names if empty). Forall is
/// rewritten as not-exists-not. Throws ScaleError when a bound in options is
/// exceeded, naming the subformula.
PsiFunction build_psi(const Formula& phi, int q, const EliminationOptions& options = {},
                      std::vector<std::string> variables = {});

/// Number of root tuples w in V^k with evaluate(phi, g, w) != psi(w).
std::uint64_t count_disagreements(const PsiFunction& psi, const Formula& phi, const Graph& g);

struct Fraction {
    boost::multiprecision::cpp_int num;
    boost::multiprecision::cpp_int den;
    std::string to_string() const;
    double to_double() const;
    friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct LimitProfile {
    int q = 2;
    std::vector<Fraction> a;
    int c_used = 0;
    /// Per residue: size of the feasible set projected onto the support.
    std::vector<std::uint64_t> feasible_set_sizes;
    std::size_t support_size = 0;
};

/// Limiting probabilities a_0..a_{q-1} of a sentence.
LimitProfile limit_probabilities(const Formula& phi, int q, const EliminationOptions& options = {});

struct FormulaPolynomial {
    ZqPolynomial polynomial;
    int degree = 0;
    /// (q-1) * c * |Conn^c| with c = c_used.
    std::uint64_t degree_bound = 0;
    int c_used = 0;
};

/// P in the C(n,2) edge indicators (pairs in lexicographic order) with
/// P(A_G) = psi(freq_G) for every G on n vertices.
FormulaPolynomial formula_to_polynomial(const Formula& phi, int q, int n, const EliminationOptions& options = {});

/// Index of edge {u, v}, u < v, among the C(n,2) lexicographic pairs.
int edge_index(int n, int u, int v);

} // namespace modlaw
