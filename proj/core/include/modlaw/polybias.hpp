#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "modlaw/rng.hpp"

namespace modlaw {

/// Sparse multilinear polynomial over Z_q in variables Z_0..Z_{m-1}. Inputs
/// are 0/1 in every use, so products reduce Z_i^2 to Z_i.
class ZqPolynomial {
public:
    /// Sorted, duplicate-free variable indices.
    using Monomial = std::vector<int>;

    ZqPolynomial(int q, int m);
    static ZqPolynomial constant(int q, int m, int c);
    static ZqPolynomial variable(int q, int m, int i);
    /// Reads to_string output, e.g. "2*Z0*Z1 + Z3 - 1". Throws std::invalid_argument.
    static ZqPolynomial parse(const std::string& text, int q, int m);

    int q() const noexcept { return q_; }
    int variables() const noexcept { return m_; }
    int degree() const noexcept;
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }
    const std::map<Monomial, int>& terms() const noexcept { return terms_; }

    /// Adds coeff * prod Z_i; the index list may be unsorted or repeat.
    void add_term(Monomial vars, long long coeff);
    ZqPolynomial& operator+=(const ZqPolynomial& other);
    ZqPolynomial scaled(long long c) const;
    friend ZqPolynomial operator*(const ZqPolynomial& a, const ZqPolynomial& b);

    /// Value in Z_q at a 0/1 (or Z_q) point.
    int evaluate(std::span<const int> x) const;

    std::string to_string() const;

    friend bool operator==(const ZqPolynomial&, const ZqPolynomial&) = default;

private:
    int q_;
    int m_;
    std::map<Monomial, int> terms_;
};

/// sum_j a_j prod_{i in E_j} Z_i over r disjoint blocks E_j of size d.
ZqPolynomial gip(int r, int d, std::span<const int> coeffs, int q);

/// omega = exp(2 pi i / q).
std::complex<double> root_of_unity(int q, long long e);

/// |E[omega^Q(z)]| under the product p-biased measure on {0,1}^m, by full
/// enumeration. Throws std::length_error for m > 24 (use bias_mc).
double bias_exact(const ZqPolynomial& Q, double p);

struct BiasEstimate {
    double value;
    double stderr_;
    std::uint64_t samples;
};

/// Seeded Monte Carlo estimate; stderr reported as 1/sqrt(samples).
BiasEstimate bias_mc(const ZqPolynomial& Q, double p, std::uint64_t samples, std::uint64_t seed,
                     unsigned workers = 1);

/// Probability measure on Z_q^m: either an explicit table indexed by the
/// base-q encoding of x (x_0 least significant), or a product of
/// per-coordinate distributions over Z_q.
class Measure {
public:
    static Measure table(int q, int m, std::vector<double> probabilities);
    static Measure product(int q, std::vector<std::vector<double>> coordinates);
    static Measure uniform(int q, int m);
    /// p-biased bits: Pr[x_i = 1] = p, Pr[x_i = 0] = 1 - p (needs q >= 2).
    static Measure p_biased(int q, int m, double p);

    int q() const noexcept { return q_; }
    int dimension() const noexcept { return m_; }
    bool is_product() const noexcept { return !coordinates_.empty() || m_ == 0; }
    /// q^m points; throws std::length_error beyond 2^24.
    std::size_t points() const;
    double probability(std::size_t x) const;
    std::vector<double> full_table() const;
    const std::vector<std::vector<double>>& coordinates() const noexcept { return coordinates_; }

    /// mu1 (x) mu2 on Z_q^(m1+m2); mu1 occupies the low coordinates.
    friend Measure tensor(const Measure& a, const Measure& b);

    /// One sample by inverse-CDF draws.
    std::vector<int> sample(CounterRng& rng) const;

private:
    int q_ = 2;
    int m_ = 0;
    std::vector<double> table_;
    std::vector<std::vector<double>> coordinates_;
};

/// mu^(d) on H^(d+1) as an explicit table over tuples (x, t_1..t_d), each
/// in Z_q^m, indexed with x in the lowest digits. Zero-mass prefixes are
/// excluded. d = 0 returns mu.
Measure mu_power(const Measure& mu, int d);

/// f(x) = omega^{e(x)}, e given as a table over Z_q^m.
class PhaseFunction {
public:
    PhaseFunction(int q, int m, std::vector<int> exponents);
    static PhaseFunction from_polynomial(const ZqPolynomial& Q);
    /// g1 (x) g2 on Z_q^(m1+m2).
    friend PhaseFunction tensor(const PhaseFunction& a, const PhaseFunction& b);
    /// f * omega^h pointwise.
    PhaseFunction times_phase(const ZqPolynomial& h) const;

    int q() const noexcept { return q_; }
    int dimension() const noexcept { return m_; }
    int exponent(std::size_t x) const { return exponents_[x]; }
    std::complex<double> operator()(std::size_t x) const { return root_of_unity(q_, exponents_[x]); }

private:
    int q_;
    int m_;
    std::vector<int> exponents_;
};

struct GowersResult {
    double value;
    bool exact;
    double stderr_ = 0.0;
};

/// ||f||_{U^d, mu}. Exact when q^(m(d+1)) <= 2^24; otherwise Monte Carlo
/// with `samples` draws (product measures only).
GowersResult gowers_norm(const PhaseFunction& f, const Measure& mu, int d, std::uint64_t samples = 200000,
                         std::uint64_t seed = 1, unsigned workers = 1);

/// Encodes a point of Z_q^m; x_0 is least significant.
std::size_t encode_point(std::span<const int> x, int q);
std::vector<int> decode_point(std::size_t index, int q, int m);

} // namespace modlaw
