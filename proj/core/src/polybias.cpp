#include "modlaw/polybias.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "modlaw/parallel.hpp"

namespace modlaw {

namespace {

constexpr std::size_t kMaxPoints = std::size_t{1} << 24;

int pos_mod(long long x, int q)
{
    x %= q;
    return static_cast<int>(x < 0 ? x + q : x);
}

std::size_t checked_points(int q, int m)
{
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= static_cast<std::size_t>(q);
        if (total > kMaxPoints)
            throw std::length_error("Z_" + std::to_string(q) + "^" + std::to_string(m) +
                                    " has more than 2^24 points");
    }
    return total;
}

std::size_t add_points(std::size_t a, std::size_t b, int q, int m)
{
    std::size_t out = 0, scale = 1;
    for (int i = 0; i < m; ++i) {
        const auto qa = static_cast<std::size_t>(q);
        out += ((a % qa + b % qa) % qa) * scale;
        a /= qa;
        b /= qa;
        scale *= qa;
    }
    return out;
}

std::vector<double> check_distribution(std::vector<double> p, const char* what)
{
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0))
            throw std::invalid_argument(std::string(what) + ": negative or NaN probability");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(what) + ": probabilities sum to " + std::to_string(total));
    return p;
}

std::size_t sample_index(const std::vector<double>& p, CounterRng& rng)
{
    double u = rng.uniform();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (u < p[i])
            return i;
        u -= p[i];
    }
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] > 0.0)
            return i;
    return 0;
}

/// mu^(d) over (Z_q^m)^(d+1) as a raw table, x in the low digits.
std::vector<double> power_table(const std::vector<double>& base, int q, int m, int d)
{
    const std::size_t points = checked_points(q, m);
    std::vector<double> prev = base;
    for (int level = 1; level <= d; ++level) {
        checked_points(q, m * (level + 1));
        const std::size_t prefixes = prev.size() / points;
        std::vector<double> next(prev.size() * points, 0.0);
        for (std::size_t t = 0; t < prefixes; ++t) {
            const double* row = prev.data() + t * points;
            const double mass = std::accumulate(row, row + points, 0.0);
            if (mass <= 0.0)
                continue;
            for (std::size_t x = 0; x < points; ++x) {
                if (row[x] == 0.0)
                    continue;
                for (std::size_t td = 0; td < points; ++td)
                    next[x + points * t + prev.size() * td] = row[x] * row[add_points(x, td, q, m)] / mass;
            }
        }
        prev = std::move(next);
    }
    return prev;
}

/// Exponent of D_t f(x) for a phase function given by its exponent table.
int derivative_exponent(const PhaseFunction& f, std::size_t x, std::span<const std::size_t> t)
{
    const int d = static_cast<int>(t.size());
    const int q = f.q(), m = f.dimension();
    long long e = 0;
    for (std::uint32_t s = 0; s < (1u << d); ++s) {
        std::size_t point = x;
        for (int i = 0; i < d; ++i)
            if ((s >> i) & 1u)
                point = add_points(point, t[i], q, m);
        e += (std::popcount(s) % 2 ? -1 : 1) * f.exponent(point);
    }
    return pos_mod(e, q);
}

} // namespace

// ---------------------------------------------------------------------------
// ZqPolynomial

ZqPolynomial::ZqPolynomial(int q, int m) : q_(q), m_(m)
{
    if (q < 2)
        throw std::invalid_argument("modulus must be at least 2");
    if (m < 0)
        throw std::invalid_argument("variable count must be nonnegative");
}

ZqPolynomial ZqPolynomial::constant(int q, int m, int c)
{
    ZqPolynomial p(q, m);
    p.add_term({}, c);
    return p;
}

ZqPolynomial ZqPolynomial::variable(int q, int m, int i)
{
    ZqPolynomial p(q, m);
    p.add_term({i}, 1);
    return p;
}

ZqPolynomial ZqPolynomial::parse(const std::string& text, int q, int m)
{
    ZqPolynomial out(q, m);
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            t.push_back(c);
    if (t.empty() || t == "0")
        return out;
    std::size_t i = 0;
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("polynomial '" + text + "': " + why + " at offset " + std::to_string(i));
    };
    auto number = [&](long long modulus) {
        if (i >= t.size() || !std::isdigit(static_cast<unsigned char>(t[i])))
            fail("expected a number");
        long long v = 0;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
            v = (v * 10 + (t[i] - '0')) % modulus;
            ++i;
        }
        return v;
    };
    while (i < t.size()) {
        long long sign = 1;
        if (t[i] == '+' || t[i] == '-') {
            sign = t[i] == '-' ? -1 : 1;
            ++i;
        } else if (i != 0) {
            fail("expected '+' or '-'");
        }
        long long coeff = 1;
        Monomial vars;
        bool factor = true;
        while (factor) {
            if (i < t.size() && t[i] == 'Z') {
                ++i;
                const auto v = number(1'000'000'007);
                if (v >= m)
                    fail("variable Z" + std::to_string(v) + " outside Z0..Z" + std::to_string(m - 1));
                vars.push_back(static_cast<int>(v));
            } else {
                coeff = coeff * number(q) % q;
            }
            factor = i < t.size() && t[i] == '*';
            if (factor)
                ++i;
        }
        out.add_term(std::move(vars), sign * coeff);
    }
    return out;
}

int ZqPolynomial::degree() const noexcept
{
    int d = 0;
    for (const auto& [mono, c] : terms_)
        d = std::max(d, static_cast<int>(mono.size()));
    return d;
}

void ZqPolynomial::add_term(Monomial vars, long long coeff)
{
    const int c = pos_mod(coeff, q_);
    if (c == 0)
        return;
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (int v : vars)
        if (v < 0 || v >= m_)
            throw std::out_of_range("variable index " + std::to_string(v) + " out of range");
    auto [it, fresh] = terms_.emplace(std::move(vars), c);
    if (!fresh) {
        it->second = (it->second + c) % q_;
        if (it->second == 0)
            terms_.erase(it);
    }
}

ZqPolynomial& ZqPolynomial::operator+=(const ZqPolynomial& other)
{
    if (other.q_ != q_ || other.m_ != m_)
        throw std::invalid_argument("adding polynomials over different rings");
    for (const auto& [mono, c] : other.terms_)
        add_term(mono, c);
    return *this;
}

ZqPolynomial ZqPolynomial::scaled(long long c) const
{
    ZqPolynomial out(q_, m_);
    for (const auto& [mono, v] : terms_)
        out.add_term(mono, static_cast<long long>(v) * pos_mod(c, q_));
    return out;
}

ZqPolynomial operator*(const ZqPolynomial& a, const ZqPolynomial& b)
{
    if (a.q_ != b.q_ || a.m_ != b.m_)
        throw std::invalid_argument("multiplying polynomials over different rings");
    ZqPolynomial out(a.q_, a.m_);
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) {
            ZqPolynomial::Monomial mono;
            std::set_union(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(mono));
            out.add_term(std::move(mono), static_cast<long long>(ca) * cb);
        }
    return out;
}

int ZqPolynomial::evaluate(std::span<const int> x) const
{
    if (static_cast<int>(x.size()) != m_)
        throw std::invalid_argument("point has the wrong dimension");
    long long total = 0;
    for (const auto& [mono, c] : terms_) {
        long long v = c;
        for (int i : mono)
            v = v * x[i] % q_;
        total += v;
    }
    return pos_mod(total, q_);
}

std::string ZqPolynomial::to_string() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [mono, c] : terms_) {
        if (!first)
            os << " + ";
        first = false;
        if (mono.empty()) {
            os << c;
            continue;
        }
        if (c != 1)
            os << c << "*";
        for (std::size_t i = 0; i < mono.size(); ++i)
            os << (i ? "*" : "") << "Z" << mono[i];
    }
    return os.str();
}

ZqPolynomial gip(int r, int d, std::span<const int> coeffs, int q)
{
    if (r < 0 || d < 1)
        throw std::invalid_argument("gip needs r >= 0 and d >= 1");
    if (static_cast<int>(coeffs.size()) != r)
        throw std::invalid_argument("gip needs one coefficient per block");
    ZqPolynomial p(q, r * d);
    for (int j = 0; j < r; ++j) {
        if (pos_mod(coeffs[j], q) == 0)
            throw std::invalid_argument("gip coefficients must be nonzero mod q");
        ZqPolynomial::Monomial mono(d);
        std::iota(mono.begin(), mono.end(), j * d);
        p.add_term(std::move(mono), coeffs[j]);
    }
    return p;
}

std::complex<double> root_of_unity(int q, long long e)
{
    const int r = pos_mod(e, q);
    if (r == 0)
        return {1.0, 0.0};
    if (q == 2)
        return {-1.0, 0.0};
    return std::polar(1.0, 2.0 * std::numbers::pi * r / q);
}

// ---------------------------------------------------------------------------
// Bias

namespace {

/// Q as (bitmask, coefficient) pairs for fast evaluation on {0,1}^m.
std::vector<std::pair<std::uint32_t, int>> masked_terms(const ZqPolynomial& Q)
{
    std::vector<std::pair<std::uint32_t, int>> out;
    for (const auto& [mono, c] : Q.terms()) {
        std::uint32_t mask = 0;
        for (int i : mono)
            mask |= 1u << i;
        out.emplace_back(mask, c);
    }
    return out;
}

int masked_eval(const std::vector<std::pair<std::uint32_t, int>>& terms, std::uint32_t x, int q)
{
    int e = 0;
    for (auto [mask, c] : terms)
        if ((x & mask) == mask)
            e += c;
    return e % q;
}

void check_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("p must lie in [0, 1]");
}

} // namespace

double bias_exact(const ZqPolynomial& Q, double p)
{
    check_probability(p);
    const int m = Q.variables();
    if (m > 24)
        throw std::length_error("bias_exact enumerates {0,1}^m and needs m <= 24; use bias_mc for m = " +
                                std::to_string(m));
    const auto terms = masked_terms(Q);
    std::vector<double> weight(m + 1);
    for (int w = 0; w <= m; ++w)
        weight[w] = std::pow(p, w) * std::pow(1.0 - p, m - w);
    std::vector<double> by_exponent(Q.q(), 0.0);
    for (std::uint32_t x = 0; x < (1u << m); ++x)
        by_exponent[masked_eval(terms, x, Q.q())] += weight[std::popcount(x)];
    std::complex<double> total = 0.0;
    for (int e = 0; e < Q.q(); ++e)
        total += by_exponent[e] * root_of_unity(Q.q(), e);
    return std::abs(total);
}

namespace {

constexpr std::uint64_t kChunk = 4096;

template <typename Draw>
std::complex<double> chunked_mean(std::uint64_t samples, std::uint64_t seed, unsigned workers, Draw&& draw)
{
    const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<std::complex<double>> sums(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        CounterRng rng(derive_seed(seed, c));
        const std::uint64_t begin = c * kChunk;
        const std::uint64_t end = std::min(samples, begin + kChunk);
        std::complex<double> s = 0.0;
        for (std::uint64_t i = begin; i < end; ++i)
            s += draw(rng);
        sums[c] = s;
    });
    // Pairwise reduction in index order.
    while (sums.size() > 1) {
        std::vector<std::complex<double>> next((sums.size() + 1) / 2);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = sums[2 * i] + (2 * i + 1 < sums.size() ? sums[2 * i + 1] : 0.0);
        sums = std::move(next);
    }
    return sums.empty() ? 0.0 : sums.front() / static_cast<double>(samples);
}

} // namespace

BiasEstimate bias_mc(const ZqPolynomial& Q, double p, std::uint64_t samples, std::uint64_t seed, unsigned workers)
{
    check_probability(p);
    if (samples == 0)
        throw std::invalid_argument("bias_mc needs at least one sample");
    const int m = Q.variables();
    const int q = Q.q();
    std::vector<std::pair<std::vector<int>, int>> terms(Q.terms().begin(), Q.terms().end());
    const auto mean = chunked_mean(samples, seed, workers, [&](CounterRng& rng) {
        std::vector<int> z(m);
        for (int i = 0; i < m; ++i)
            z[i] = rng.bernoulli(p) ? 1 : 0;
        long long e = 0;
        for (const auto& [mono, c] : terms) {
            bool all = true;
            for (int i : mono)
                all = all && z[i];
            if (all)
                e += c;
        }
        return root_of_unity(q, e);
    });
    return {std::abs(mean), 1.0 / std::sqrt(static_cast<double>(samples)), samples};
}

// ---------------------------------------------------------------------------
// Measures

Measure Measure::table(int q, int m, std::vector<double> probabilities)
{
    if (probabilities.size() != checked_points(q, m))
        throw std::invalid_argument("measure table has the wrong size");
    Measure mu;
    mu.q_ = q;
    mu.m_ = m;
    mu.table_ = check_distribution(std::move(probabilities), "measure table");
    return mu;
}

Measure Measure::product(int q, std::vector<std::vector<double>> coordinates)
{
    if (q < 2)
        throw std::invalid_argument("modulus must be at least 2");
    for (auto& c : coordinates) {
        if (static_cast<int>(c.size()) != q)
            throw std::invalid_argument("coordinate distribution must have q entries");
        c = check_distribution(std::move(c), "coordinate distribution");
    }
    Measure mu;
    mu.q_ = q;
    mu.m_ = static_cast<int>(coordinates.size());
    mu.coordinates_ = std::move(coordinates);
    return mu;
}

Measure Measure::uniform(int q, int m)
{
    return product(q, std::vector<std::vector<double>>(m, std::vector<double>(q, 1.0 / q)));
}

Measure Measure::p_biased(int q, int m, double p)
{
    check_probability(p);
    std::vector<double> c(q, 0.0);
    c[0] = 1.0 - p;
    c[1] = p;
    return product(q, std::vector<std::vector<double>>(m, c));
}

std::size_t Measure::points() const
{
    return checked_points(q_, m_);
}

double Measure::probability(std::size_t x) const
{
    if (!is_product())
        return table_.at(x);
    double p = 1.0;
    for (int i = 0; i < m_; ++i) {
        p *= coordinates_[i][x % static_cast<std::size_t>(q_)];
        x /= static_cast<std::size_t>(q_);
    }
    return p;
}

std::vector<double> Measure::full_table() const
{
    if (!table_.empty())
        return table_;
    const std::size_t n = points();
    std::vector<double> out(n);
    for (std::size_t x = 0; x < n; ++x)
        out[x] = probability(x);
    return out;
}

Measure tensor(const Measure& a, const Measure& b)
{
    if (a.q_ != b.q_)
        throw std::invalid_argument("tensor of measures over different moduli");
    if (a.is_product() && b.is_product()) {
        auto coords = a.coordinates_;
        coords.insert(coords.end(), b.coordinates_.begin(), b.coordinates_.end());
        return Measure::product(a.q_, std::move(coords));
    }
    const auto ta = a.full_table();
    const auto tb = b.full_table();
    checked_points(a.q_, a.m_ + b.m_);
    std::vector<double> t(ta.size() * tb.size());
    for (std::size_t j = 0; j < tb.size(); ++j)
        for (std::size_t i = 0; i < ta.size(); ++i)
            t[i + ta.size() * j] = ta[i] * tb[j];
    Measure mu;
    mu.q_ = a.q_;
    mu.m_ = a.m_ + b.m_;
    mu.table_ = std::move(t);
    return mu;
}

std::vector<int> Measure::sample(CounterRng& rng) const
{
    if (is_product()) {
        std::vector<int> x(m_);
        for (int i = 0; i < m_; ++i)
            x[i] = static_cast<int>(sample_index(coordinates_[i], rng));
        return x;
    }
    return decode_point(sample_index(table_, rng), q_, m_);
}

Measure mu_power(const Measure& mu, int d)
{
    if (d < 0)
        throw std::invalid_argument("level must be nonnegative");
    if (d == 0)
        return mu;
    auto t = power_table(mu.full_table(), mu.q(), mu.dimension(), d);
    // Excluded prefixes leave total mass 1 because they carry no mass in mu^(d-1).
    return Measure::table(mu.q(), mu.dimension() * (d + 1), std::move(t));
}

// ---------------------------------------------------------------------------
// Phase functions and Gowers norms

PhaseFunction::PhaseFunction(int q, int m, std::vector<int> exponents) : q_(q), m_(m), exponents_(std::move(exponents))
{
    if (exponents_.size() != checked_points(q, m))
        throw std::invalid_argument("phase table has the wrong size");
    for (auto& e : exponents_)
        e = pos_mod(e, q);
}

PhaseFunction PhaseFunction::from_polynomial(const ZqPolynomial& Q)
{
    const std::size_t n = checked_points(Q.q(), Q.variables());
    std::vector<int> e(n);
    for (std::size_t x = 0; x < n; ++x)
        e[x] = Q.evaluate(decode_point(x, Q.q(), Q.variables()));
    return PhaseFunction(Q.q(), Q.variables(), std::move(e));
}

PhaseFunction tensor(const PhaseFunction& a, const PhaseFunction& b)
{
    if (a.q_ != b.q_)
        throw std::invalid_argument("tensor of phase functions over different moduli");
    checked_points(a.q_, a.m_ + b.m_);
    std::vector<int> e(a.exponents_.size() * b.exponents_.size());
    for (std::size_t j = 0; j < b.exponents_.size(); ++j)
        for (std::size_t i = 0; i < a.exponents_.size(); ++i)
            e[i + a.exponents_.size() * j] = a.exponents_[i] + b.exponents_[j];
    return PhaseFunction(a.q_, a.m_ + b.m_, std::move(e));
}

PhaseFunction PhaseFunction::times_phase(const ZqPolynomial& h) const
{
    if (h.q() != q_ || h.variables() != m_)
        throw std::invalid_argument("phase polynomial lives on a different space");
    auto e = exponents_;
    for (std::size_t x = 0; x < e.size(); ++x)
        e[x] += h.evaluate(decode_point(x, q_, m_));
    return PhaseFunction(q_, m_, std::move(e));
}

GowersResult gowers_norm(const PhaseFunction& f, const Measure& mu, int d, std::uint64_t samples, std::uint64_t seed,
                         unsigned workers)
{
    if (d < 0)
        throw std::invalid_argument("level must be nonnegative");
    if (f.q() != mu.q() || f.dimension() != mu.dimension())
        throw std::invalid_argument("phase function and measure live on different spaces");
    const int q = f.q(), m = f.dimension();
    const double root = 1.0 / std::pow(2.0, d);

    bool exact = true;
    try {
        checked_points(q, m * (d + 1));
    } catch (const std::length_error&) {
        exact = false;
    }
    if (exact) {
        const auto table = power_table(mu.full_table(), q, m, d);
        const std::size_t points = checked_points(q, m);
        std::vector<double> by_exponent(q, 0.0);
        std::vector<std::size_t> t(d);
        for (std::size_t idx = 0; idx < table.size(); ++idx) {
            if (table[idx] == 0.0)
                continue;
            std::size_t rest = idx / points;
            for (int i = 0; i < d; ++i) {
                t[i] = rest % points;
                rest /= points;
            }
            by_exponent[derivative_exponent(f, idx % points, t)] += table[idx];
        }
        std::complex<double> total = 0.0;
        for (int e = 0; e < q; ++e)
            total += by_exponent[e] * root_of_unity(q, e);
        return {std::pow(std::abs(total), root), true, 0.0};
    }

    if (!mu.is_product())
        throw std::length_error("Monte Carlo Gowers norms need a product measure");
    if (samples == 0)
        throw std::invalid_argument("Monte Carlo Gowers norm needs at least one sample");
    // mu^(d) of a product measure is the product of the per-coordinate mu_i^(d).
    std::vector<std::vector<double>> per_coordinate;
    for (const auto& c : mu.coordinates())
        per_coordinate.push_back(power_table(c, q, 1, d));
    const auto mean = chunked_mean(samples, seed, workers, [&](CounterRng& rng) {
        std::size_t x = 0, scale = 1;
        std::vector<std::size_t> t(d, 0);
        for (int i = 0; i < m; ++i) {
            std::size_t s = sample_index(per_coordinate[i], rng);
            x += (s % static_cast<std::size_t>(q)) * scale;
            s /= static_cast<std::size_t>(q);
            for (int j = 0; j < d; ++j) {
                t[j] += (s % static_cast<std::size_t>(q)) * scale;
                s /= static_cast<std::size_t>(q);
            }
            scale *= static_cast<std::size_t>(q);
        }
        return root_of_unity(q, derivative_exponent(f, x, t));
    });
    return {std::pow(std::abs(mean), root), false, 1.0 / std::sqrt(static_cast<double>(samples))};
}

std::size_t encode_point(std::span<const int> x, int q)
{
    std::size_t out = 0;
    for (std::size_t i = x.size(); i-- > 0;)
        out = out * static_cast<std::size_t>(q) + static_cast<std::size_t>(pos_mod(x[i], q));
    return out;
}

std::vector<int> decode_point(std::size_t index, int q, int m)
{
    std::vector<int> x(m);
    for (int i = 0; i < m; ++i) {
        x[i] = static_cast<int>(index % static_cast<std::size_t>(q));
        index /= static_cast<std::size_t>(q);
    }
    return x;
}

} // namespace modlaw
