#include "modlaw/elimination.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "modlaw/algebra.hpp"

namespace modlaw {

namespace {

int pos_mod(long long x, int q)
{
    x %= q;
    return static_cast<int>(x < 0 ? x + q : x);
}

/// Support under construction: indices are assigned on first sight and never move.
class SupportBuilder {
public:
    explicit SupportBuilder(int labels) : labels_(labels) {}

    int add(const LabelledGraph& g)
    {
        auto lab = canonical_labelling(g);
        if (auto it = index_.find(lab.code); it != index_.end())
            return it->second;
        const int idx = static_cast<int>(patterns_.size());
        index_.emplace(std::move(lab.code), idx);
        patterns_.push_back(canonical_representative(g));
        return idx;
    }

    int add(const CanonicalCode& code)
    {
        if (auto it = index_.find(code); it != index_.end())
            return it->second;
        return add(from_canonical_code(code));
    }

    std::size_t size() const noexcept { return patterns_.size(); }
    const LabelledGraph& pattern(std::size_t i) const { return patterns_[i]; }

    std::shared_ptr<const PatternBasis> finish() const
    {
        return std::make_shared<const PatternBasis>(labels_, patterns_);
    }

private:
    int labels_;
    std::vector<LabelledGraph> patterns_;
    std::map<CanonicalCode, int> index_;
};

/// Polynomial mod q over support indices.
struct CompiledPoly {
    struct Term {
        int coeff;
        std::vector<int> vars;
    };
    std::vector<Term> terms;

    int eval(std::span<const int> values, int q) const
    {
        long long total = 0;
        for (const auto& t : terms) {
            long long v = t.coeff;
            for (int i : t.vars)
                v = v * values[i] % q;
            total += v;
        }
        return pos_mod(total, q);
    }
};

CompiledPoly compile(const FreqPolynomial& p, int q, SupportBuilder& support)
{
    CompiledPoly out;
    for (const auto& [m, c] : p.terms()) {
        const int coeff = mod_q(c, q);
        if (coeff == 0)
            continue;
        CompiledPoly::Term t{coeff, {}};
        for (const auto& code : m)
            t.vars.push_back(support.add(p.variables().at(code)));
        out.terms.push_back(std::move(t));
    }
    return out;
}

/// M[e][a]: coefficient of x^e in the indicator [x = a] over Z_q.
std::vector<std::vector<int>> indicator_matrix(int q)
{
    std::vector<long long> binom(q, 1);
    for (int e = 1; e < q; ++e)
        binom[e] = binom[e - 1] * (q - e) / e;
    std::vector<std::vector<int>> m(q, std::vector<int>(q, 0));
    for (int a = 0; a < q; ++a)
        for (int e = 0; e < q; ++e) {
            long long power = 1;
            for (int i = 0; i < q - 1 - e; ++i)
                power = power * (q - a) % q;
            m[e][a] = pos_mod((e == 0 ? 1 : 0) - binom[e] % q * power, q);
        }
    return m;
}

/// Coefficients (same mixed-radix layout, digit = exponent) of the unique
/// polynomial of degree < q per variable matching the value table.
std::vector<int> interpolate(std::vector<int> table, int q, int m)
{
    const auto matrix = indicator_matrix(q);
    std::size_t stride = 1;
    std::vector<int> fiber(q);
    for (int axis = 0; axis < m; ++axis) {
        for (std::size_t base = 0; base < table.size(); ++base) {
            if ((base / stride) % q != 0)
                continue;
            for (int a = 0; a < q; ++a)
                fiber[a] = table[base + a * stride];
            for (int e = 0; e < q; ++e) {
                long long s = 0;
                for (int a = 0; a < q; ++a)
                    s += static_cast<long long>(matrix[e][a]) * fiber[a];
                table[base + e * stride] = pos_mod(s, q);
            }
        }
        stride *= q;
    }
    return table;
}

std::uint64_t checked_power(int q, int m, std::uint64_t cap, const std::string& what)
{
    std::uint64_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= static_cast<std::uint64_t>(q);
        if (total > cap)
            throw ScaleError(what + ": " + std::to_string(q) + "^" + std::to_string(m) +
                             " candidates exceed the enumeration cap " + std::to_string(cap));
    }
    return total;
}

bool is_k1(const LabelledGraph& f)
{
    return f.unlabelled_count() == 1 && f.edge_count() == 0;
}

LabelledGraph drop_last_label(const LabelledGraph& h)
{
    const int star = h.labels() - 1;
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

} // namespace

// ---------------------------------------------------------------------------
// Nodes

class PsiNode {
public:
    PsiNode(int arity, std::string text) : arity_(arity), text_(std::move(text)) {}
    virtual ~PsiNode() = default;

    int arity() const noexcept { return arity_; }
    const std::string& text() const noexcept { return text_; }
    const std::shared_ptr<const PatternBasis>& support() const noexcept { return support_; }
    int c_used() const noexcept { return c_used_; }

    virtual bool eval(const TypeTau& tau, std::span<const int> f) const = 0;

protected:
    void finish(const SupportBuilder& builder, int child_c, const EliminationOptions& options)
    {
        support_ = builder.finish();
        c_used_ = std::max(child_c, support_->max_unlabelled());
        if (options.c_cap && support_->max_unlabelled() > *options.c_cap)
            throw ScaleError("subformula `" + text_ + "` reads frequency coordinates with " +
                             std::to_string(support_->max_unlabelled()) + " unlabelled vertices; c-cap is " +
                             std::to_string(*options.c_cap));
    }

    static std::vector<int> gather(std::span<const int> f, const std::vector<int>& idx)
    {
        std::vector<int> out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            out[i] = f[idx[i]];
        return out;
    }

    int arity_;
    std::string text_;
    std::shared_ptr<const PatternBasis> support_;
    int c_used_ = 0;
};

namespace {

using NodePtr = std::shared_ptr<const PsiNode>;

class AtomNode final : public PsiNode {
public:
    AtomNode(int arity, std::string text, bool edge, int i, int j, const EliminationOptions& options)
        : PsiNode(arity, std::move(text)), edge_(edge), i_(i), j_(j)
    {
        finish(SupportBuilder(arity), 0, options);
    }

    bool eval(const TypeTau& tau, std::span<const int>) const override
    {
        return edge_ ? (!tau.equal(i_, j_) && tau.adjacent(i_, j_)) : tau.equal(i_, j_);
    }

private:
    bool edge_;
    int i_, j_;
};

class NotPsi final : public PsiNode {
public:
    NotPsi(std::string text, NodePtr child, const EliminationOptions& options)
        : PsiNode(child->arity(), std::move(text)), child_(std::move(child))
    {
        support_ = child_->support();
        c_used_ = child_->c_used();
        (void)options;
    }

    bool eval(const TypeTau& tau, std::span<const int> f) const override { return !child_->eval(tau, f); }

private:
    NodePtr child_;
};

class BinaryPsi final : public PsiNode {
public:
    BinaryPsi(std::string text, bool conjunction, NodePtr left, NodePtr right, const EliminationOptions& options)
        : PsiNode(left->arity(), std::move(text)), conjunction_(conjunction), left_(std::move(left)),
          right_(std::move(right))
    {
        SupportBuilder builder(arity_);
        for (const auto& p : left_->support()->patterns())
            left_idx_.push_back(builder.add(p));
        for (const auto& p : right_->support()->patterns())
            right_idx_.push_back(builder.add(p));
        finish(builder, std::max(left_->c_used(), right_->c_used()), options);
    }

    bool eval(const TypeTau& tau, std::span<const int> f) const override
    {
        const bool l = left_->eval(tau, gather(f, left_idx_));
        if (conjunction_ ? !l : l)
            return l;
        return right_->eval(tau, gather(f, right_idx_));
    }

private:
    bool conjunction_;
    NodePtr left_, right_;
    std::vector<int> left_idx_, right_idx_;
};

/// Per-type data shared by the quantifier nodes: the merged extensions.
struct MergedExtension {
    TypeTau tau_prime;
    std::vector<int> idx;
};

std::vector<MergedExtension> merged_extensions(const TypeTau& tau, const PatternBasis& child_support,
                                               SupportBuilder& builder)
{
    std::vector<MergedExtension> out;
    const int k = tau.arity();
    for (const auto& tp : TypeTau::extensions(tau)) {
        if (tp.last_is_singleton())
            continue;
        MergedExtension m{tp, {}};
        const int j = merge_target(tp);
        for (const auto& h : child_support.patterns())
            m.idx.push_back(builder.add(merge_labels(h, k, j)));
        out.push_back(std::move(m));
    }
    return out;
}

class ModPsi final : public PsiNode {
public:
    ModPsi(std::string text, int q, int residue, NodePtr child, const EliminationOptions& options)
        : PsiNode(child->arity() - 1, std::move(text)), q_(q), residue_(residue), child_(std::move(child))
    {
        const int k = arity_;
        const auto& T = *child_->support();
        SupportBuilder builder(k);
        int k1_child = -1;
        for (std::size_t i = 0; i < T.size(); ++i)
            if (is_k1(T.pattern(i)))
                k1_child = static_cast<int>(i);
        if (k1_child >= 0)
            k1_index_ = builder.add(LabelledGraph::k1(k));
        const int residues = k1_child >= 0 ? q_ : 1;
        auto& counter = extension_counter(q_);

        for (const auto& tau : TypeTau::all(k)) {
            Entry entry;
            entry.merged = merged_extensions(tau, T, builder);
            std::vector<FreqPolynomial> sums(residues, FreqPolynomial(k));
            for (const auto& tp : TypeTau::extensions(tau)) {
                if (!tp.last_is_singleton())
                    continue;
                // Coordinates of f' that are forced (aut-divisible) or shared
                // within a partition class are not separate variables.
                std::map<CanonicalCode, int> classes;
                std::vector<int> var_of(T.size(), -1);
                std::vector<bool> forced_zero(T.size(), false);
                std::vector<LabelledGraph> reps;
                for (std::size_t i = 0; i < T.size(); ++i) {
                    if (static_cast<int>(i) == k1_child)
                        continue;
                    const auto qg = quotient(T.pattern(i), tp.partition());
                    if (count_aut(qg) % static_cast<std::uint64_t>(q_) == 0) {
                        forced_zero[i] = true;
                        continue;
                    }
                    auto [it, fresh] = classes.emplace(canonical_form(qg), static_cast<int>(reps.size()));
                    if (fresh)
                        reps.push_back(T.pattern(i));
                    var_of[i] = it->second;
                }
                const int m = static_cast<int>(reps.size());
                const auto cells = checked_power(q_, m, options.enumeration_cap, "subformula `" + text_ + "`");
                for (int r = 0; r < residues; ++r) {
                    std::vector<int> table(cells);
                    std::vector<int> values(T.size(), 0);
                    for (std::uint64_t x = 0; x < cells; ++x) {
                        const auto digits = decode_point(x, q_, m);
                        for (std::size_t i = 0; i < T.size(); ++i) {
                            if (static_cast<int>(i) == k1_child)
                                values[i] = pos_mod(r - 1, q_);
                            else
                                values[i] = forced_zero[i] ? 0 : digits[var_of[i]];
                        }
                        table[x] = child_->eval(tp, values) ? 1 : 0;
                    }
                    const auto coeffs = interpolate(std::move(table), q_, m);
                    FreqPolynomial p(k + 1);
                    for (std::uint64_t e = 0; e < cells; ++e) {
                        if (coeffs[e] == 0)
                            continue;
                        const auto exps = decode_point(e, q_, m);
                        FreqPolynomial::Monomial mono;
                        for (int v = 0; v < m; ++v)
                            for (int rep = 0; rep < exps[v]; ++rep)
                                mono.push_back(canonical_form(reps[v]));
                        std::sort(mono.begin(), mono.end());
                        p.add_term(mono, coeffs[e]);
                    }
                    try {
                        sums[r] += counter.transform(tp, p);
                    } catch (const PatternSizeError& e) {
                        throw ScaleError("subformula `" + text_ + "`: " + e.what());
                    }
                }
            }
            for (int r = 0; r < residues; ++r)
                entry.polys.push_back(compile(sums[r].reduce_mod(q_), q_, builder));
            entries_.emplace(tau.key(), std::move(entry));
        }
        finish(builder, child_->c_used(), options);
    }

    bool eval(const TypeTau& tau, std::span<const int> f) const override
    {
        const auto& entry = entries_.at(tau.key());
        long long total = 0;
        for (const auto& m : entry.merged)
            total += child_->eval(m.tau_prime, gather(f, m.idx)) ? 1 : 0;
        const int r = k1_index_ >= 0 ? f[k1_index_] : 0;
        total += entry.polys[r].eval(f, q_);
        return pos_mod(total, q_) == residue_;
    }

private:
    struct Entry {
        std::vector<MergedExtension> merged;
        std::vector<CompiledPoly> polys;
    };

    int q_;
    int residue_;
    NodePtr child_;
    int k1_index_ = -1;
    std::map<std::string, Entry> entries_;
};

class ExistsPsi final : public PsiNode {
public:
    ExistsPsi(std::string text, int q, NodePtr child, const EliminationOptions& options)
        : PsiNode(child->arity() - 1, std::move(text)), q_(q), child_(std::move(child))
    {
        const int k = arity_;
        const auto& T = *child_->support();
        SupportBuilder builder(k);
        for (const auto& tau : TypeTau::all(k)) {
            Entry entry;
            entry.merged = merged_extensions(tau, T, builder);
            for (const auto& tp : TypeTau::extensions(tau))
                if (tp.last_is_singleton())
                    entry.plans.push_back(make_plan(tp, T, builder, options));
            entries_.emplace(tau.key(), std::move(entry));
        }
        finish(builder, child_->c_used(), options);
    }

    bool eval(const TypeTau& tau, std::span<const int> f) const override
    {
        std::string key = tau.key();
        key.push_back('#');
        for (int v : f)
            key.push_back(static_cast<char>(v));
        {
            std::shared_lock lock(memo_mutex_);
            if (auto it = memo_.find(key); it != memo_.end())
                return it->second;
        }
        const bool result = search(tau, f);
        std::unique_lock lock(memo_mutex_);
        memo_.emplace(std::move(key), result);
        return result;
    }

private:
    /// Candidate f' restricted to the closure of the child support under
    /// the extension equations. Dependent classes are enumerated; the rest
    /// are solved for in increasing size.
    struct Plan {
        TypeTau tau_prime;
        std::size_t child_size = 0;
        std::vector<int> class_of;
        std::vector<bool> class_zero;
        std::vector<int> enumerated_classes;
        /// Coordinates solved from f: value = f[base] - sum of corrections.
        struct Equation {
            int coord;
            int base;
            std::vector<CompiledPoly> corrections;
        };
        std::vector<Equation> equations;
        std::uint64_t candidates = 1;
    };

    Plan make_plan(const TypeTau& tp, const PatternBasis& T, SupportBuilder& builder,
                   const EliminationOptions& options) const
    {
        const int k = arity_;
        Plan plan;
        plan.tau_prime = tp;
        plan.child_size = T.size();
        SupportBuilder closure(k + 1);
        for (const auto& h : T.patterns())
            closure.add(h);
        std::map<int, Plan::Equation> equations;
        for (std::size_t i = 0; i < closure.size(); ++i) {
            const LabelledGraph h = closure.pattern(i);
            if (h.depends_on_label(k))
                continue;
            const auto base = drop_last_label(h);
            Plan::Equation eq{static_cast<int>(i), builder.add(base), {}};
            for (int u = base.labels(); u < base.order(); ++u) {
                if (!extension_coefficient(base, u, tp))
                    continue;
                eq.corrections.push_back(compile(delta_polynomial(base.label_vertex(u)).reduce_mod(q_), q_, closure));
            }
            equations.emplace(static_cast<int>(i), std::move(eq));
        }
        std::vector<int> order(closure.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return closure.pattern(a).unlabelled_count() < closure.pattern(b).unlabelled_count();
        });
        for (int i : order)
            if (auto it = equations.find(i); it != equations.end())
                plan.equations.push_back(std::move(it->second));

        std::map<CanonicalCode, int> classes;
        std::vector<bool> class_dependent;
        for (std::size_t i = 0; i < closure.size(); ++i) {
            const auto qg = quotient(closure.pattern(i), tp.partition());
            auto [it, fresh] = classes.emplace(canonical_form(qg), static_cast<int>(plan.class_zero.size()));
            if (fresh) {
                plan.class_zero.push_back(count_aut(qg) % static_cast<std::uint64_t>(q_) == 0);
                class_dependent.push_back(false);
            }
            plan.class_of.push_back(it->second);
            if (closure.pattern(i).depends_on_label(k))
                class_dependent[it->second] = true;
        }
        for (std::size_t c = 0; c < plan.class_zero.size(); ++c)
            if (class_dependent[c] && !plan.class_zero[c])
                plan.enumerated_classes.push_back(static_cast<int>(c));
        plan.candidates = checked_power(q_, static_cast<int>(plan.enumerated_classes.size()),
                                        options.enumeration_cap, "subformula `" + text_ + "`");
        return plan;
    }

    bool search(const TypeTau& tau, std::span<const int> f) const
    {
        const auto& entry = entries_.at(tau.key());
        for (const auto& m : entry.merged)
            if (child_->eval(m.tau_prime, gather(f, m.idx)))
                return true;
        for (const auto& plan : entry.plans) {
            const std::size_t n_coords = plan.class_of.size();
            std::vector<int> class_value(plan.class_zero.size(), -1);
            std::vector<int> values(n_coords, 0);
            for (std::uint64_t x = 0; x < plan.candidates; ++x) {
                std::fill(class_value.begin(), class_value.end(), -1);
                std::uint64_t rest = x;
                for (std::size_t c = 0; c < plan.class_zero.size(); ++c)
                    if (plan.class_zero[c])
                        class_value[c] = 0;
                for (int c : plan.enumerated_classes) {
                    class_value[c] = static_cast<int>(rest % static_cast<std::uint64_t>(q_));
                    rest /= static_cast<std::uint64_t>(q_);
                }
                std::vector<bool> solved(n_coords, false);
                for (std::size_t i = 0; i < n_coords; ++i)
                    if (class_value[plan.class_of[i]] >= 0) {
                        values[i] = class_value[plan.class_of[i]];
                        solved[i] = true;
                    }
                bool consistent = true;
                for (const auto& eq : plan.equations) {
                    long long v = f[eq.base];
                    for (const auto& corr : eq.corrections)
                        v -= corr.eval(values, q_);
                    const int value = pos_mod(v, q_);
                    const int c = plan.class_of[eq.coord];
                    if (class_value[c] >= 0 && class_value[c] != value) {
                        consistent = false;
                        break;
                    }
                    class_value[c] = value;
                    values[eq.coord] = value;
                    solved[eq.coord] = true;
                }
                if (!consistent)
                    continue;
                if (child_->eval(plan.tau_prime, std::span<const int>(values.data(), plan.child_size)))
                    return true;
            }
        }
        return false;
    }

    struct Entry {
        std::vector<MergedExtension> merged;
        std::vector<Plan> plans;
    };

    int q_;
    NodePtr child_;
    std::map<std::string, Entry> entries_;
    mutable std::shared_mutex memo_mutex_;
    mutable std::unordered_map<std::string, bool> memo_;
};

// ---------------------------------------------------------------------------
// Construction

class Builder {
public:
    Builder(int q, const EliminationOptions& options) : q_(q), options_(options) {}

    NodePtr build(const Formula& phi, std::vector<std::string>& context)
    {
        const int k = static_cast<int>(context.size());
        const std::string text = to_string(phi);
        auto position = [&](const std::string& v) {
            for (int i = k - 1; i >= 0; --i)
                if (context[i] == v)
                    return i;
            throw std::invalid_argument("unbound variable '" + v + "'");
        };
        auto quantified = [&](const std::string& var, const Formula& body) {
            context.push_back(var);
            auto child = build(body, context);
            context.pop_back();
            return child;
        };
        if (auto* n = std::get_if<EdgeAtom>(&phi.node))
            return std::make_shared<AtomNode>(k, text, true, position(n->a), position(n->b), options_);
        if (auto* n = std::get_if<EqualAtom>(&phi.node))
            return std::make_shared<AtomNode>(k, text, false, position(n->a), position(n->b), options_);
        if (auto* n = std::get_if<NotNode>(&phi.node))
            return std::make_shared<NotPsi>(text, build(*n->child, context), options_);
        if (auto* n = std::get_if<AndNode>(&phi.node))
            return std::make_shared<BinaryPsi>(text, true, build(*n->left, context), build(*n->right, context),
                                               options_);
        if (auto* n = std::get_if<OrNode>(&phi.node))
            return std::make_shared<BinaryPsi>(text, false, build(*n->left, context), build(*n->right, context),
                                               options_);
        if (auto* n = std::get_if<ExistsNode>(&phi.node))
            return std::make_shared<ExistsPsi>(text, q_, quantified(n->var, *n->body), options_);
        if (auto* n = std::get_if<ForallNode>(&phi.node)) {
            auto inner = std::make_shared<NotPsi>("!" + to_string(*n->body), quantified(n->var, *n->body), options_);
            auto exists = std::make_shared<ExistsPsi>("exists " + n->var + ". !" + to_string(*n->body), q_, inner,
                                                      options_);
            return std::make_shared<NotPsi>(text, exists, options_);
        }
        const auto& n = std::get<ModNode>(phi.node);
        return std::make_shared<ModPsi>(text, q_, n.i, quantified(n.var, *n.body), options_);
    }

private:
    int q_;
    const EliminationOptions& options_;
};

} // namespace

// ---------------------------------------------------------------------------
// PsiFunction

PsiFunction::PsiFunction(std::shared_ptr<const PsiNode> root, std::vector<std::string> variables, int q)
    : root_(std::move(root)), variables_(std::move(variables)), q_(q)
{
}

const std::shared_ptr<const PatternBasis>& PsiFunction::support() const
{
    return root_->support();
}

int PsiFunction::c_used() const
{
    return root_->c_used();
}

bool PsiFunction::evaluate_aligned(const TypeTau& tau, std::span<const int> values) const
{
    if (tau.arity() != arity())
        throw std::invalid_argument("type arity differs from psi arity");
    if (values.size() != support()->size())
        throw std::invalid_argument("value vector does not match the psi support");
    return root_->eval(tau, values);
}

bool PsiFunction::operator()(const TypeTau& tau, const FreqVector& f) const
{
    if (f.q != q_)
        throw std::invalid_argument("frequency vector modulus differs from psi modulus");
    std::vector<int> values;
    values.reserve(support()->size());
    for (const auto& code : support()->codes())
        values.push_back(f.at(code));
    return evaluate_aligned(tau, values);
}

bool PsiFunction::evaluate_graph(const Graph& g, std::span<const int> w) const
{
    std::vector<int> values;
    values.reserve(support()->size());
    for (const auto& p : support()->patterns())
        values.push_back(static_cast<int>(count_inj(p, g, w) % static_cast<std::uint64_t>(q_)));
    return evaluate_aligned(type_of(g, w), values);
}

PsiFunction build_psi(const Formula& phi, int q, const EliminationOptions& options, std::vector<std::string> variables)
{
    if (!is_prime(q))
        throw std::invalid_argument("elimination needs a prime modulus");
    for (int m : moduli(phi))
        if (m != q)
            throw std::invalid_argument("formula uses modulus " + std::to_string(m) + " but elimination runs mod " +
                                        std::to_string(q) + "; mixed moduli are not supported");
    const auto free = free_variables(phi);
    if (variables.empty())
        variables.assign(free.begin(), free.end());
    for (const auto& v : free)
        if (std::find(variables.begin(), variables.end(), v) == variables.end())
            throw std::invalid_argument("free variable '" + v + "' has no position");
    Builder builder(q, options);
    auto context = variables;
    auto root = builder.build(phi, context);
    return PsiFunction(std::move(root), std::move(variables), q);
}

std::uint64_t count_disagreements(const PsiFunction& psi, const Formula& phi, const Graph& g)
{
    const int k = psi.arity();
    const int n = g.order();
    std::uint64_t bad = 0;
    std::vector<int> w(k, 0);
    if (k > 0 && n == 0)
        return 0;
    while (true) {
        Assignment env;
        for (int i = 0; i < k; ++i)
            env[psi.variables()[i]] = w[i];
        if (evaluate(phi, g, env) != psi.evaluate_graph(g, w))
            ++bad;
        int i = 0;
        while (i < k && ++w[i] == n)
            w[i++] = 0;
        if (i == k)
            break;
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Limits

std::string Fraction::to_string() const
{
    std::ostringstream os;
    os << num << "/" << den;
    return os.str();
}

double Fraction::to_double() const
{
    return static_cast<double>(num) / static_cast<double>(den);
}

namespace {

/// Per-coordinate value domains of the k = 0 feasible set for n = residue.
std::vector<std::vector<int>> sentence_domains(const PatternBasis& support, int q, int residue)
{
    std::vector<std::vector<int>> domains;
    for (const auto& f : support.patterns()) {
        if (is_k1(f))
            domains.push_back({residue});
        else if (count_aut(f) % static_cast<std::uint64_t>(q) == 0)
            domains.push_back({0});
        else {
            std::vector<int> all(q);
            std::iota(all.begin(), all.end(), 0);
            domains.push_back(std::move(all));
        }
    }
    return domains;
}

void require_sentence(const PsiFunction& psi)
{
    if (psi.arity() != 0)
        throw std::invalid_argument("expected a sentence (no free variables)");
}

} // namespace

LimitProfile limit_probabilities(const Formula& phi, int q, const EliminationOptions& options)
{
    if (!free_variables(phi).empty())
        throw std::invalid_argument("limit_probabilities needs a sentence");
    const auto psi = build_psi(phi, q, options);
    require_sentence(psi);
    LimitProfile profile;
    profile.q = q;
    profile.c_used = psi.c_used();
    profile.support_size = psi.support()->size();
    const TypeTau empty = TypeTau::all(0).front();
    for (int i = 0; i < q; ++i) {
        const auto domains = sentence_domains(*psi.support(), q, i);
        std::uint64_t total = 1;
        for (const auto& d : domains) {
            total *= d.size();
            if (total > options.enumeration_cap)
                throw ScaleError("feasible set projected onto the psi support has more than " +
                                 std::to_string(options.enumeration_cap) + " members");
        }
        std::uint64_t accepted = 0;
        std::vector<int> values(domains.size());
        for (std::uint64_t x = 0; x < total; ++x) {
            std::uint64_t rest = x;
            for (std::size_t c = 0; c < domains.size(); ++c) {
                values[c] = domains[c][rest % domains[c].size()];
                rest /= domains[c].size();
            }
            if (psi.evaluate_aligned(empty, values))
                ++accepted;
        }
        Fraction a{accepted, total};
        const boost::multiprecision::cpp_int g = boost::multiprecision::gcd(a.num, a.den);
        if (g > 1) {
            a.num /= g;
            a.den /= g;
        }
        if (a.num == 0)
            a.den = 1;
        profile.a.push_back(std::move(a));
        profile.feasible_set_sizes.push_back(total);
    }
    return profile;
}

// ---------------------------------------------------------------------------
// Polynomial compilation

int edge_index(int n, int u, int v)
{
    if (u > v)
        std::swap(u, v);
    if (u < 0 || v >= n || u == v)
        throw std::invalid_argument("invalid edge for edge_index");
    return u * n - u * (u + 1) / 2 + (v - u - 1);
}

namespace {

/// [F](A) as a multilinear polynomial in the edge indicators of K_n.
ZqPolynomial injective_count_polynomial(const LabelledGraph& f, int q, int n)
{
    const int m = n * (n - 1) / 2;
    ZqPolynomial out(q, m);
    const int order = f.order();
    if (order > n)
        return out;
    std::vector<int> image(order, -1);
    std::vector<bool> used(n, false);
    const auto edges = f.edges();
    std::vector<std::pair<ZqPolynomial::Monomial, long long>> pending;
    std::map<ZqPolynomial::Monomial, long long> counts;
    std::function<void(int)> rec = [&](int v) {
        if (v == order) {
            ZqPolynomial::Monomial mono;
            for (auto [a, b] : edges)
                mono.push_back(edge_index(n, image[a], image[b]));
            std::sort(mono.begin(), mono.end());
            mono.erase(std::unique(mono.begin(), mono.end()), mono.end());
            counts[mono] += 1;
            return;
        }
        for (int x = 0; x < n; ++x) {
            if (used[x])
                continue;
            used[x] = true;
            image[v] = x;
            rec(v + 1);
            used[x] = false;
        }
    };
    rec(0);
    for (auto& [mono, c] : counts)
        out.add_term(mono, c);
    return out;
}

} // namespace

FormulaPolynomial formula_to_polynomial(const Formula& phi, int q, int n, const EliminationOptions& options)
{
    if (n < 0 || n > 12)
        throw ScaleError("formula_to_polynomial supports n <= 12");
    const auto psi = build_psi(phi, q, options);
    require_sentence(psi);
    const auto& support = *psi.support();
    const auto domains = sentence_domains(support, q, n % q);
    std::vector<int> free_coords;
    for (std::size_t i = 0; i < domains.size(); ++i)
        if (domains[i].size() > 1)
            free_coords.push_back(static_cast<int>(i));
    const int m_free = static_cast<int>(free_coords.size());
    const auto cells = checked_power(q, m_free, options.enumeration_cap, "formula_to_polynomial");
    std::vector<int> table(cells);
    std::vector<int> values(domains.size());
    const TypeTau empty = TypeTau::all(0).front();
    for (std::uint64_t x = 0; x < cells; ++x) {
        const auto digits = decode_point(x, q, m_free);
        for (std::size_t i = 0; i < domains.size(); ++i)
            values[i] = domains[i].front();
        for (int j = 0; j < m_free; ++j)
            values[free_coords[j]] = digits[j];
        table[x] = psi.evaluate_aligned(empty, values) ? 1 : 0;
    }
    const auto coeffs = interpolate(std::move(table), q, m_free);

    const int edges = n * (n - 1) / 2;
    std::vector<std::vector<ZqPolynomial>> powers(m_free);
    for (int j = 0; j < m_free; ++j) {
        powers[j].push_back(ZqPolynomial::constant(q, edges, 1));
        const auto base = injective_count_polynomial(support.pattern(free_coords[j]), q, n);
        for (int e = 1; e < q; ++e) {
            powers[j].push_back(powers[j].back() * base);
            if (powers[j].back().size() > options.term_cap)
                throw ScaleError("formula_to_polynomial exceeded the term cap");
        }
    }
    ZqPolynomial result(q, edges);
    for (std::uint64_t e = 0; e < cells; ++e) {
        if (coeffs[e] == 0)
            continue;
        const auto exps = decode_point(e, q, m_free);
        ZqPolynomial term = ZqPolynomial::constant(q, edges, coeffs[e]);
        for (int j = 0; j < m_free; ++j)
            if (exps[j] > 0) {
                term = term * powers[j][exps[j]];
                if (term.size() > options.term_cap)
                    throw ScaleError("formula_to_polynomial exceeded the term cap");
            }
        result += term;
        if (result.size() > options.term_cap)
            throw ScaleError("formula_to_polynomial exceeded the term cap");
    }
    FormulaPolynomial out{result, result.degree(), 0, psi.c_used()};
    const auto conn = PatternBasis::conn(0, std::max(1, psi.c_used()))->size();
    out.degree_bound = static_cast<std::uint64_t>(q - 1) * static_cast<std::uint64_t>(psi.c_used()) * conn;
    return out;
}

} // namespace modlaw
