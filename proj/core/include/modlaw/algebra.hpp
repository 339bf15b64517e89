#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "modlaw/count.hpp"
#include "modlaw/pattern.hpp"

namespace modlaw {

using Integer = boost::multiprecision::cpp_int;

/// Residue of x in [0, q).
int mod_q(const Integer& x, int q);

/// One-to-one pairs (unlabelled vertex of f1, unlabelled vertex of f2).
struct PartialMatching {
    std::vector<std::pair<int, int>> pairs;
};

/// All partial matchings, the empty one first.
std::vector<PartialMatching> partial_matchings(const LabelledGraph& f1, const LabelledGraph& f2);

/// F1 glued to F2 along eta. Unlabelled vertices of f1 keep their indices;
/// unmatched unlabelled vertices of f2 follow in order.
LabelledGraph glue(const LabelledGraph& f1, const LabelledGraph& f2, const PartialMatching& eta);

/// Integer combination of k-labelled patterns; like terms merge by code.
class PatternSum {
public:
    struct Term {
        LabelledGraph graph;
        Integer coeff;
    };

    explicit PatternSum(int labels) : labels_(labels) {}

    int labels() const noexcept { return labels_; }
    void add(const LabelledGraph& g, const Integer& coeff);
    const std::map<CanonicalCode, Term>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    /// Sum of coeff * [F](G, w).
    Integer evaluate(const Graph& g, std::span<const int> w) const;

    /// Each term multiplied by [h] through the gluing identity.
    PatternSum times(const LabelledGraph& h) const;

private:
    int labels_;
    std::map<CanonicalCode, Term> terms_;
};

/// Sum over eta of F1 glued to F2 along eta; its counts multiply.
PatternSum product_expand(const LabelledGraph& f1, const LabelledGraph& f2);

/// Integer polynomial in indeterminates X_F, F ranging over k-labelled
/// label-connected patterns named by canonical code.
class FreqPolynomial {
public:
    /// Sorted codes with repetition; empty means the constant term.
    using Monomial = std::vector<CanonicalCode>;

    explicit FreqPolynomial(int labels) : labels_(labels) {}
    static FreqPolynomial constant(int labels, const Integer& c);
    static FreqPolynomial variable(const LabelledGraph& f);

    int labels() const noexcept { return labels_; }
    const std::map<Monomial, Integer>& terms() const noexcept { return terms_; }
    const std::map<CanonicalCode, LabelledGraph>& variables() const noexcept { return variables_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    int degree() const noexcept;
    /// Largest unlabelled count among the variables.
    int max_unlabelled() const noexcept;

    void add_term(const Monomial& m, const Integer& coeff);
    FreqPolynomial& operator+=(const FreqPolynomial& other);
    FreqPolynomial& operator-=(const FreqPolynomial& other);
    FreqPolynomial scaled(const Integer& c) const;
    friend FreqPolynomial operator*(const FreqPolynomial& a, const FreqPolynomial& b);

    /// Coefficients reduced into [0, q); zero terms dropped.
    FreqPolynomial reduce_mod(int q) const;

    /// Evaluation at x_F = [F](G, w).
    Integer evaluate(const Graph& g, std::span<const int> w) const;
    /// Evaluation mod f.q at x_F = f_F. Throws std::out_of_range naming any
    /// variable f lacks.
    int evaluate_mod(const FreqVector& f) const;

    /// Human-readable term list, e.g. "X[L0/V2{0-1}]^2 - 4*X[L0/V3{0-1,1-2}]".
    std::string to_string() const;

    friend bool operator==(const FreqPolynomial& a, const FreqPolynomial& b)
    {
        return a.labels_ == b.labels_ && a.terms_ == b.terms_;
    }

private:
    void note_variables(const FreqPolynomial& other);

    int labels_;
    std::map<Monomial, Integer> terms_;
    std::map<CanonicalCode, LabelledGraph> variables_;
};

enum class SplitStrategy { First, Last };

/// delta_F: evaluates to [F](G, w) from label-connected counts. Memoized.
FreqPolynomial delta_polynomial(const LabelledGraph& f, SplitStrategy strategy = SplitStrategy::First);
/// As above; throws std::length_error if F has more than t unlabelled vertices.
FreqPolynomial delta_polynomial(const LabelledGraph& f, int t, SplitStrategy strategy = SplitStrategy::First);

/// F-tilde: F with an isolated label appended.
inline LabelledGraph tilde(const LabelledGraph& f) { return f.with_isolated_label(); }

/// c_u of the extension equation: every label adjacent to u is tau'-adjacent
/// to the new last position.
bool extension_coefficient(const LabelledGraph& f, int u, const TypeTau& tau_prime);

/// n mod q recovered from the K1(I) coordinate of f.
int n_residue_of(const TypeTau& tau, const FreqVector& f);

/// (tau', f') extends (tau, f). f must cover Conn_k^b, b the size bound of f'.
bool extends(const TypeTau& tau_prime, const FreqVector& f_prime, const TypeTau& tau, const FreqVector& f);

/// The unique f' over Conn_{k+1}^b with the given coordinates on patterns
/// dependent on label k+1 that extends (tau, f). Throws std::invalid_argument
/// when the data are inconsistent.
FreqVector complete_extension(const TypeTau& tau_prime, const TypeTau& tau, const FreqVector& f,
                              const std::map<CanonicalCode, int>& dependent, int b);

/// Symbolic extension counting for one prime q, with caches shared by all
/// callers. Thread-safe.
class ExtensionCounter {
public:
    explicit ExtensionCounter(int q);

    int q() const noexcept { return q_; }

    /// prod over the basis of (1 - (X_F - f'_F)^(q-1)), reduced mod q.
    FreqPolynomial indicator(const FreqVector& f_prime) const;

    /// sum over v outside the roots with type(w, v) = tau' of p evaluated at
    /// (w, v), as a k-level polynomial mod q. tau' must extend its
    /// restriction with the last position a singleton.
    FreqPolynomial transform(const TypeTau& tau_prime, const FreqPolynomial& p);

    /// Product expansion of a monomial over (k+1)-labelled patterns.
    std::shared_ptr<const PatternSum> expand(int labels, const FreqPolynomial::Monomial& m);

private:
    const FreqPolynomial& monomial_transform(const TypeTau& tau_prime, const FreqPolynomial::Monomial& m);

    int q_;
    std::mutex mutex_;
    std::map<std::pair<int, FreqPolynomial::Monomial>, std::shared_ptr<const PatternSum>> expansions_;
    std::map<std::pair<std::string, FreqPolynomial::Monomial>, std::shared_ptr<const FreqPolynomial>> transforms_;
};

/// Shared counter for modulus q.
ExtensionCounter& extension_counter(int q);

struct LambdaOptions {
    /// Skip the a >= (q-1)*b*|Conn_{k+1}^b| + 1 hypothesis check.
    bool allow_small_a = false;
};

/// The lambda polynomial of Case 1 (last position of tau' a singleton).
FreqPolynomial lambda_polynomial(const TypeTau& tau_prime, const FreqVector& f_prime);

/// Number mod q of v with type(w, v) = tau' and freq^b(w, v) = f', given
/// type(w) = tau and freq^a(w) = f. Coordinates of f are looked up by code;
/// a missing one is an error.
int lambda_count(const TypeTau& tau_prime, const FreqVector& f_prime, const TypeTau& tau, const FreqVector& f,
                 int a, const LambdaOptions& options = {});

/// Smallest a accepted by lambda_count for this f'.
int lambda_size_bound(int q, int b, std::size_t basis_size);

} // namespace modlaw
