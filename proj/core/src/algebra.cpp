#include "modlaw/algebra.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <functional>
#include <sstream>

namespace modlaw {

int mod_q(const Integer& x, int q)
{
    Integer r = x % q;
    if (r < 0)
        r += q;
    return static_cast<int>(r);
}

// ---------------------------------------------------------------------------
// Gluing

std::vector<PartialMatching> partial_matchings(const LabelledGraph& f1, const LabelledGraph& f2)
{
    if (f1.labels() != f2.labels())
        throw std::invalid_argument("partial matchings need a common label set");
    const int k = f1.labels();
    const int n1 = f1.order();
    const int n2 = f2.order();
    std::vector<PartialMatching> out;
    PartialMatching current;
    std::vector<bool> taken(n2, false);
    std::function<void(int)> rec = [&](int u) {
        if (u == n1) {
            out.push_back(current);
            return;
        }
        rec(u + 1);
        for (int v = k; v < n2; ++v) {
            if (taken[v])
                continue;
            taken[v] = true;
            current.pairs.emplace_back(u, v);
            rec(u + 1);
            current.pairs.pop_back();
            taken[v] = false;
        }
    };
    rec(k);
    return out;
}

LabelledGraph glue(const LabelledGraph& f1, const LabelledGraph& f2, const PartialMatching& eta)
{
    if (f1.labels() != f2.labels())
        throw std::invalid_argument("glue needs a common label set");
    const int k = f1.labels();
    std::vector<int> map2(f2.order(), -1);
    for (int i = 0; i < k; ++i)
        map2[i] = i;
    for (auto [u, v] : eta.pairs) {
        if (u < k || u >= f1.order() || v < k || v >= f2.order() || map2[v] >= 0)
            throw std::invalid_argument("invalid partial matching");
        map2[v] = u;
    }
    int next = f1.order();
    for (int v = k; v < f2.order(); ++v)
        if (map2[v] < 0)
            map2[v] = next++;
    LabelledGraph out(k, next - k);
    for (auto [a, b] : f1.edges())
        out.add_edge(a, b);
    for (auto [a, b] : f2.edges())
        out.add_edge(map2[a], map2[b]);
    return out;
}

void PatternSum::add(const LabelledGraph& g, const Integer& coeff)
{
    if (g.labels() != labels_)
        throw std::invalid_argument("pattern sum label count mismatch");
    if (coeff == 0)
        return;
    auto lab = canonical_labelling(g);
    auto it = terms_.find(lab.code);
    if (it == terms_.end()) {
        terms_.emplace(std::move(lab.code), Term{canonical_representative(g), coeff});
        return;
    }
    it->second.coeff += coeff;
    if (it->second.coeff == 0)
        terms_.erase(it);
}

Integer PatternSum::evaluate(const Graph& g, std::span<const int> w) const
{
    Integer total = 0;
    for (const auto& [code, term] : terms_)
        total += term.coeff * Integer(count_inj(term.graph, g, w));
    return total;
}

PatternSum PatternSum::times(const LabelledGraph& h) const
{
    PatternSum out(labels_);
    for (const auto& [code, term] : terms_) {
        const auto expanded = product_expand(term.graph, h);
        for (const auto& [code2, glued] : expanded.terms())
            out.add(glued.graph, term.coeff * glued.coeff);
    }
    return out;
}

PatternSum product_expand(const LabelledGraph& f1, const LabelledGraph& f2)
{
    PatternSum out(f1.labels());
    for (const auto& eta : partial_matchings(f1, f2))
        out.add(glue(f1, f2, eta), 1);
    return out;
}

// ---------------------------------------------------------------------------
// FreqPolynomial

FreqPolynomial FreqPolynomial::constant(int labels, const Integer& c)
{
    FreqPolynomial p(labels);
    p.add_term({}, c);
    return p;
}

FreqPolynomial FreqPolynomial::variable(const LabelledGraph& f)
{
    FreqPolynomial p(f.labels());
    auto lab = canonical_labelling(f);
    p.variables_.emplace(lab.code, canonical_representative(f));
    p.add_term({lab.code}, 1);
    return p;
}

int FreqPolynomial::degree() const noexcept
{
    int d = 0;
    for (const auto& [m, c] : terms_)
        d = std::max(d, static_cast<int>(m.size()));
    return d;
}

int FreqPolynomial::max_unlabelled() const noexcept
{
    int t = 0;
    for (const auto& [code, g] : variables_)
        t = std::max(t, g.unlabelled_count());
    return t;
}

void FreqPolynomial::add_term(const Monomial& m, const Integer& coeff)
{
    if (coeff == 0)
        return;
    for (const auto& code : m)
        if (!variables_.contains(code))
            variables_.emplace(code, from_canonical_code(code));
    auto [it, fresh] = terms_.emplace(m, coeff);
    if (!fresh) {
        it->second += coeff;
        if (it->second == 0)
            terms_.erase(it);
    }
}

void FreqPolynomial::note_variables(const FreqPolynomial& other)
{
    for (const auto& [code, g] : other.variables_)
        variables_.emplace(code, g);
}

FreqPolynomial& FreqPolynomial::operator+=(const FreqPolynomial& other)
{
    note_variables(other);
    for (const auto& [m, c] : other.terms_)
        add_term(m, c);
    return *this;
}

FreqPolynomial& FreqPolynomial::operator-=(const FreqPolynomial& other)
{
    note_variables(other);
    for (const auto& [m, c] : other.terms_)
        add_term(m, -c);
    return *this;
}

FreqPolynomial FreqPolynomial::scaled(const Integer& c) const
{
    FreqPolynomial out(labels_);
    out.note_variables(*this);
    for (const auto& [m, coeff] : terms_)
        out.add_term(m, coeff * c);
    return out;
}

FreqPolynomial operator*(const FreqPolynomial& a, const FreqPolynomial& b)
{
    if (a.labels_ != b.labels_)
        throw std::invalid_argument("polynomials over different label sets");
    FreqPolynomial out(a.labels_);
    out.note_variables(a);
    out.note_variables(b);
    FreqPolynomial::Monomial m;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) {
            m.clear();
            std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
            out.add_term(m, ca * cb);
        }
    return out;
}

FreqPolynomial FreqPolynomial::reduce_mod(int q) const
{
    FreqPolynomial out(labels_);
    for (const auto& [m, c] : terms_)
        out.add_term(m, mod_q(c, q));
    for (const auto& [m, c] : out.terms_)
        for (const auto& code : m)
            out.variables_.emplace(code, variables_.at(code));
    return out;
}

Integer FreqPolynomial::evaluate(const Graph& g, std::span<const int> w) const
{
    std::map<CanonicalCode, Integer> values;
    for (const auto& [code, f] : variables_)
        values.emplace(code, Integer(count_inj(f, g, w)));
    Integer total = 0;
    for (const auto& [m, c] : terms_) {
        Integer term = c;
        for (const auto& code : m)
            term *= values.at(code);
        total += term;
    }
    return total;
}

int FreqPolynomial::evaluate_mod(const FreqVector& f) const
{
    const int q = f.q;
    std::map<CanonicalCode, long long> values;
    for (const auto& [m, c] : terms_)
        for (const auto& code : m)
            if (!values.contains(code)) {
                auto idx = f.basis->find(code);
                if (!idx)
                    throw std::out_of_range("frequency vector lacks coordinate " + variables_.at(code).to_string());
                values.emplace(code, f[*idx]);
            }
    long long total = 0;
    for (const auto& [m, c] : terms_) {
        long long term = mod_q(c, q);
        for (const auto& code : m)
            term = term * values.at(code) % q;
        total = (total + term) % q;
    }
    return static_cast<int>(total);
}

std::string FreqPolynomial::to_string() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        Integer mag = c < 0 ? Integer(-c) : c;
        if (first)
            os << (c < 0 ? "-" : "");
        else
            os << (c < 0 ? " - " : " + ");
        first = false;
        if (m.empty() || mag != 1)
            os << mag << (m.empty() ? "" : "*");
        for (std::size_t i = 0; i < m.size();) {
            std::size_t j = i;
            while (j < m.size() && m[j] == m[i])
                ++j;
            if (i)
                os << "*";
            os << "X[" << variables_.at(m[i]).to_string() << "]";
            if (j - i > 1)
                os << "^" << (j - i);
            i = j;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// delta

namespace {

struct DeltaCache {
    std::mutex mutex;
    std::map<std::pair<int, CanonicalCode>, std::shared_ptr<const FreqPolynomial>> table;
};

DeltaCache& delta_cache()
{
    static DeltaCache cache;
    return cache;
}

std::shared_ptr<const FreqPolynomial> delta_impl(const LabelledGraph& f, SplitStrategy strategy)
{
    auto lab = canonical_labelling(f);
    auto key = std::pair{static_cast<int>(strategy), lab.code};
    auto& cache = delta_cache();
    {
        std::lock_guard lock(cache.mutex);
        if (auto it = cache.table.find(key); it != cache.table.end())
            return it->second;
    }
    const LabelledGraph g = canonical_representative(f);
    const auto comps = g.unlabelled_components();
    std::shared_ptr<const FreqPolynomial> result;
    if (comps.empty()) {
        result = std::make_shared<const FreqPolynomial>(FreqPolynomial::constant(g.labels(), 1));
    } else if (comps.size() == 1) {
        result = std::make_shared<const FreqPolynomial>(FreqPolynomial::variable(g));
    } else {
        const std::size_t pick = strategy == SplitStrategy::First ? 0 : comps.size() - 1;
        std::vector<int> rest;
        for (std::size_t c = 0; c < comps.size(); ++c)
            if (c != pick)
                rest.insert(rest.end(), comps[c].begin(), comps[c].end());
        const auto f1 = g.restricted_to(comps[pick]);
        const auto f2 = g.restricted_to(rest);
        FreqPolynomial p = *delta_impl(f1, strategy) * *delta_impl(f2, strategy);
        const auto matchings = partial_matchings(f1, f2);
        assert(!matchings.empty() && matchings.front().pairs.empty());
        for (std::size_t i = 1; i < matchings.size(); ++i)
            p -= *delta_impl(glue(f1, f2, matchings[i]), strategy);
        result = std::make_shared<const FreqPolynomial>(std::move(p));
    }
    std::lock_guard lock(cache.mutex);
    return cache.table.emplace(std::move(key), std::move(result)).first->second;
}

} // namespace

FreqPolynomial delta_polynomial(const LabelledGraph& f, SplitStrategy strategy)
{
    return *delta_impl(f, strategy);
}

FreqPolynomial delta_polynomial(const LabelledGraph& f, int t, SplitStrategy strategy)
{
    if (f.unlabelled_count() > t)
        throw std::length_error("pattern " + f.to_string() + " has more than " + std::to_string(t) +
                                " unlabelled vertices");
    return delta_polynomial(f, strategy);
}

// ---------------------------------------------------------------------------
// Extensions

bool extension_coefficient(const LabelledGraph& f, int u, const TypeTau& tau_prime)
{
    const int star = tau_prime.arity() - 1;
    for (int i = 0; i < f.labels(); ++i)
        if (f.adjacent(u, i) && !tau_prime.adjacent(star, i))
            return false;
    return true;
}

int n_residue_of(const TypeTau& tau, const FreqVector& f)
{
    const int k1 = f.at(canonical_form(LabelledGraph::k1(tau.arity())));
    return ((k1 + tau.block_count()) % f.q + f.q) % f.q;
}

namespace {

/// F with its isolated last label removed.
LabelledGraph drop_last_label(const LabelledGraph& h)
{
    const int star = h.labels() - 1;
    if (h.depends_on_label(star))
        throw std::logic_error("pattern depends on the last label");
    LabelledGraph f(star, h.unlabelled_count());
    for (auto [a, b] : h.edges())
        f.add_edge(a > star ? a - 1 : a, b > star ? b - 1 : b);
    return f;
}

int merge_target(const TypeTau& tau_prime)
{
    const int star = tau_prime.arity() - 1;
    return tau_prime.partition().representative(tau_prime.partition().block(star));
}

/// sum over u of c_u * delta_{F_u}(f') mod q.
int correction(const LabelledGraph& f, const TypeTau& tau_prime, const FreqVector& f_prime)
{
    int total = 0;
    for (int u = f.labels(); u < f.order(); ++u)
        if (extension_coefficient(f, u, tau_prime))
            total += delta_polynomial(f.label_vertex(u)).evaluate_mod(f_prime);
    return total % f_prime.q;
}

void check_arity(const TypeTau& tau_prime, const TypeTau& tau)
{
    if (tau_prime.arity() != tau.arity() + 1)
        throw std::invalid_argument("tau' must have exactly one more position than tau");
}

} // namespace

bool extends(const TypeTau& tau_prime, const FreqVector& f_prime, const TypeTau& tau, const FreqVector& f)
{
    check_arity(tau_prime, tau);
    if (f.q != f_prime.q)
        throw std::invalid_argument("frequency vectors use different moduli");
    if (!tau_prime.extends(tau))
        return false;
    const int q = f.q;
    const int b = f_prime.basis->max_unlabelled();
    FeasibleSet feasible(tau_prime, f_prime.basis, q, n_residue_of(tau, f));
    if (!feasible.contains(f_prime))
        return false;
    const bool merged = !tau_prime.last_is_singleton();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& pattern = f.basis->pattern(i);
        if (pattern.unlabelled_count() > b)
            continue;
        int rhs = f_prime.at(canonical_form(tilde(pattern)));
        if (!merged)
            rhs = (rhs + correction(pattern, tau_prime, f_prime)) % q;
        if (rhs != f[i])
            return false;
    }
    return true;
}

FreqVector complete_extension(const TypeTau& tau_prime, const TypeTau& tau, const FreqVector& f,
                              const std::map<CanonicalCode, int>& dependent, int b)
{
    check_arity(tau_prime, tau);
    if (!tau_prime.extends(tau))
        throw std::invalid_argument("tau' does not extend tau");
    const int q = f.q;
    const int k = tau.arity();
    FreqVector out;
    out.q = q;
    out.basis = PatternBasis::conn(k + 1, b);
    out.residues.assign(out.basis->size(), 0);
    const bool merged = !tau_prime.last_is_singleton();
    std::size_t used = 0;
    for (std::size_t i = 0; i < out.basis->size(); ++i) {
        const auto& h = out.basis->pattern(i);
        const bool depends = h.depends_on_label(k);
        auto given = dependent.find(out.basis->code(i));
        if (given != dependent.end()) {
            if (!depends)
                throw std::invalid_argument("coordinate " + h.to_string() + " is not dependent on the new label");
            if (given->second < 0 || given->second >= q)
                throw std::invalid_argument("residue out of range for " + h.to_string());
            ++used;
        }
        if (merged) {
            const int value = f.at(canonical_form(merge_labels(h, k, merge_target(tau_prime))));
            if (given != dependent.end() && given->second != value)
                throw std::invalid_argument("merged extension forces " + h.to_string() + " = " +
                                            std::to_string(value));
            out.residues[i] = value;
        } else if (depends) {
            if (given == dependent.end())
                throw std::invalid_argument("missing dependent coordinate " + h.to_string());
            out.residues[i] = given->second;
        } else {
            const auto base = drop_last_label(h);
            const int value = f.at(canonical_form(base)) - correction(base, tau_prime, out);
            out.residues[i] = ((value % q) + q) % q;
        }
    }
    if (used != dependent.size())
        throw std::invalid_argument("partial assignment names patterns outside Conn_{k+1}^b");
    if (!extends(tau_prime, out, tau, f))
        throw std::invalid_argument("no feasible extension matches the given coordinates");
    return out;
}

// ---------------------------------------------------------------------------
// Extension counting

ExtensionCounter::ExtensionCounter(int q) : q_(q)
{
    if (q < 2)
        throw std::invalid_argument("modulus must be at least 2");
}

FreqPolynomial ExtensionCounter::indicator(const FreqVector& f_prime) const
{
    if (f_prime.q != q_)
        throw std::invalid_argument("indicator modulus mismatch");
    const int labels = f_prime.basis->labels();
    FreqPolynomial product = FreqPolynomial::constant(labels, 1);
    for (std::size_t i = 0; i < f_prime.size(); ++i) {
        const auto x = FreqPolynomial::variable(f_prime.basis->pattern(i));
        // (X - c)^(q-1) by repeated multiplication, then 1 - that.
        FreqPolynomial shifted = x;
        shifted -= FreqPolynomial::constant(labels, f_prime[i]);
        FreqPolynomial power = FreqPolynomial::constant(labels, 1);
        for (int e = 0; e < q_ - 1; ++e)
            power = (power * shifted).reduce_mod(q_);
        FreqPolynomial factor = FreqPolynomial::constant(labels, 1);
        factor -= power;
        product = (product * factor).reduce_mod(q_);
    }
    return product;
}

std::shared_ptr<const PatternSum> ExtensionCounter::expand(int labels, const FreqPolynomial::Monomial& m)
{
    auto key = std::pair{labels, m};
    {
        std::lock_guard lock(mutex_);
        if (auto it = expansions_.find(key); it != expansions_.end())
            return it->second;
    }
    std::shared_ptr<const PatternSum> result;
    if (m.empty()) {
        PatternSum s(labels);
        s.add(LabelledGraph::labels_only(labels), 1);
        result = std::make_shared<const PatternSum>(std::move(s));
    } else {
        FreqPolynomial::Monomial prefix(m.begin(), m.end() - 1);
        result = std::make_shared<const PatternSum>(expand(labels, prefix)->times(from_canonical_code(m.back())));
    }
    std::lock_guard lock(mutex_);
    return expansions_.emplace(std::move(key), std::move(result)).first->second;
}

const FreqPolynomial& ExtensionCounter::monomial_transform(const TypeTau& tau_prime,
                                                           const FreqPolynomial::Monomial& m)
{
    auto key = std::pair{tau_prime.key(), m};
    {
        std::lock_guard lock(mutex_);
        if (auto it = transforms_.find(key); it != transforms_.end())
            return *it->second;
    }
    const int star = tau_prime.arity() - 1;
    const int k = star;
    const auto& pi = tau_prime.partition();
    const int fresh = pi.block(star);
    std::vector<int> reps;
    std::uint32_t required = 0;
    for (int b = 0; b < pi.block_count(); ++b) {
        if (b == fresh)
            continue;
        if (tau_prime.blocks_adjacent(b, fresh))
            required |= 1u << reps.size();
        reps.push_back(pi.representative(b));
    }
    const auto sum = expand(k + 1, m);
    FreqPolynomial result(k);
    const std::uint32_t all = (1u << reps.size()) - 1u;
    for (std::uint32_t s = 0; s <= all; ++s) {
        if ((s & required) != required)
            continue;
        const int sign = (std::popcount(s & ~required) % 2) ? -1 : 1;
        for (const auto& [code, term] : sum->terms()) {
            LabelledGraph g = term.graph.unlabel(star);
            for (std::size_t r = 0; r < reps.size(); ++r)
                if ((s >> r) & 1u)
                    g.add_edge(k, reps[r]);
            result += delta_polynomial(g).scaled(term.coeff * sign);
        }
        result = result.reduce_mod(q_);
    }
    auto stored = std::make_shared<const FreqPolynomial>(result.reduce_mod(q_));
    std::lock_guard lock(mutex_);
    return *transforms_.emplace(std::move(key), std::move(stored)).first->second;
}

FreqPolynomial ExtensionCounter::transform(const TypeTau& tau_prime, const FreqPolynomial& p)
{
    if (tau_prime.arity() < 1 || !tau_prime.last_is_singleton())
        throw std::invalid_argument("transform needs tau' whose last position is a singleton");
    if (p.labels() != tau_prime.arity())
        throw std::invalid_argument("polynomial label count must equal the arity of tau'");
    FreqPolynomial out(tau_prime.arity() - 1);
    for (const auto& [m, c] : p.terms())
        out += monomial_transform(tau_prime, m).scaled(c);
    return out.reduce_mod(q_);
}

ExtensionCounter& extension_counter(int q)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<ExtensionCounter>> counters;
    std::lock_guard lock(mutex);
    auto& slot = counters[q];
    if (!slot)
        slot = std::make_unique<ExtensionCounter>(q);
    return *slot;
}

int lambda_size_bound(int q, int b, std::size_t basis_size)
{
    return (q - 1) * b * static_cast<int>(basis_size) + 1;
}

FreqPolynomial lambda_polynomial(const TypeTau& tau_prime, const FreqVector& f_prime)
{
    auto& counter = extension_counter(f_prime.q);
    return counter.transform(tau_prime, counter.indicator(f_prime));
}

int lambda_count(const TypeTau& tau_prime, const FreqVector& f_prime, const TypeTau& tau, const FreqVector& f,
                 int a, const LambdaOptions& options)
{
    check_arity(tau_prime, tau);
    if (f.q != f_prime.q)
        throw std::invalid_argument("frequency vectors use different moduli");
    if (!tau_prime.extends(tau))
        return 0;
    const int k = tau.arity();
    if (!tau_prime.last_is_singleton()) {
        const int j = merge_target(tau_prime);
        for (std::size_t i = 0; i < f_prime.size(); ++i)
            if (f_prime[i] != f.at(canonical_form(merge_labels(f_prime.basis->pattern(i), k, j))))
                return 0;
        return 1;
    }
    const int b = f_prime.basis->max_unlabelled();
    const int bound = lambda_size_bound(f.q, b, f_prime.size());
    if (a < bound && !options.allow_small_a)
        throw std::invalid_argument("lambda_count needs a >= " + std::to_string(bound) + " (got " +
                                    std::to_string(a) + "); pass allow_small_a to override");
    return lambda_polynomial(tau_prime, f_prime).evaluate_mod(f);
}

} // namespace modlaw
