#include "modlaw/count.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <set>
#include <sstream>

namespace modlaw {

PatternBasis::PatternBasis(int labels, std::vector<LabelledGraph> patterns) : labels_(labels)
{
    patterns_.reserve(patterns.size());
    for (auto& p : patterns) {
        if (p.labels() != labels)
            throw std::invalid_argument("basis pattern has the wrong label count");
        auto lab = canonical_labelling(p);
        if (index_.contains(lab.code))
            throw std::invalid_argument("duplicate pattern in basis: " + p.to_string());
        index_.emplace(lab.code, patterns_.size());
        patterns_.push_back(canonical_representative(p));
        codes_.push_back(std::move(lab.code));
        max_unlabelled_ = std::max(max_unlabelled_, p.unlabelled_count());
    }
}

std::shared_ptr<const PatternBasis> PatternBasis::conn(int labels, int a)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const PatternBasis>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find({labels, a}); it != cache.end())
            return it->second;
    }
    auto basis = std::make_shared<const PatternBasis>(labels, enumerate_label_connected(labels, a));
    std::lock_guard lock(mutex);
    return cache.emplace(std::pair{labels, a}, std::move(basis)).first->second;
}

std::optional<std::size_t> PatternBasis::find(const CanonicalCode& code) const
{
    if (auto it = index_.find(code); it != index_.end())
        return it->second;
    return std::nullopt;
}

std::size_t PatternBasis::index_of(const CanonicalCode& code) const
{
    if (auto it = index_.find(code); it != index_.end())
        return it->second;
    throw std::out_of_range("pattern " + from_canonical_code(code).to_string() + " is not a basis coordinate");
}

// ---------------------------------------------------------------------------
// Counting

namespace {

class InjectiveSearch {
public:
    InjectiveSearch(const LabelledGraph& f, const Graph& g, std::span<const int> w) : f_(f), g_(g)
    {
        if (static_cast<int>(w.size()) != f.labels())
            throw std::invalid_argument("root tuple length must equal the pattern label count");
        for (int v : w)
            if (v < 0 || v >= g.order())
                throw std::invalid_argument("root vertex out of range");
        words_ = g.words();
        image_.assign(f.order(), -1);
        used_.assign(words_, 0);
        for (int i = 0; i < f.labels(); ++i) {
            image_[i] = w[i];
            used_[w[i] >> 6] |= std::uint64_t{1} << (w[i] & 63);
        }
        plan_order();
        scratch_.assign(static_cast<std::size_t>(order_.size() + 1) * words_, 0);
        full_.assign(words_, ~std::uint64_t{0});
        if (g.order() % 64)
            full_.back() = (std::uint64_t{1} << (g.order() % 64)) - 1;
        if (words_ == 0)
            full_.clear();
    }

    /// Distinct root images leave too few vertices for the unlabelled part.
    bool impossible() const
    {
        int free = g_.order();
        for (auto word : used_)
            free -= std::popcount(word);
        return free < static_cast<int>(order_.size());
    }

    std::uint64_t count()
    {
        if (order_.empty())
            return 1;
        if (impossible())
            return 0;
        return count_level(0);
    }

    template <typename Visit>
    void enumerate(Visit&& visit)
    {
        if (order_.empty()) {
            visit(image_);
            return;
        }
        if (!impossible())
            enumerate_level(0, visit);
    }

private:
    void plan_order()
    {
        const int k = f_.labels();
        std::uint32_t placed = k == 0 ? 0u : ((1u << k) - 1u);
        std::uint32_t remaining = 0;
        for (int v = k; v < f_.order(); ++v)
            remaining |= 1u << v;
        while (remaining) {
            int best = -1;
            int best_placed = -1;
            int best_degree = -1;
            for (std::uint32_t m = remaining; m; m &= m - 1) {
                const int v = std::countr_zero(m);
                const int np = std::popcount(f_.neighbours(v) & placed);
                const int deg = std::popcount(f_.neighbours(v));
                if (np > best_placed || (np == best_placed && deg > best_degree)) {
                    best = v;
                    best_placed = np;
                    best_degree = deg;
                }
            }
            order_.push_back(best);
            anchors_.push_back(f_.neighbours(best) & placed);
            placed |= 1u << best;
            remaining &= ~(1u << best);
        }
    }

    std::uint64_t* candidates(std::size_t level)
    {
        std::uint64_t* c = scratch_.data() + level * words_;
        const std::uint32_t anchors = anchors_[level];
        if (anchors == 0) {
            for (int i = 0; i < words_; ++i)
                c[i] = full_[i] & ~used_[i];
            return c;
        }
        bool first = true;
        for (std::uint32_t m = anchors; m; m &= m - 1) {
            auto row = g_.row(image_[std::countr_zero(m)]);
            if (first) {
                for (int i = 0; i < words_; ++i)
                    c[i] = row[i] & ~used_[i];
                first = false;
            } else {
                for (int i = 0; i < words_; ++i)
                    c[i] &= row[i];
            }
        }
        return c;
    }

    std::uint64_t count_level(std::size_t level)
    {
        const std::uint64_t* c = candidates(level);
        if (level + 1 == order_.size()) {
            std::uint64_t total = 0;
            for (int i = 0; i < words_; ++i)
                total += static_cast<std::uint64_t>(std::popcount(c[i]));
            return total;
        }
        std::uint64_t total = 0;
        const int v = order_[level];
        for (int i = 0; i < words_; ++i)
            for (std::uint64_t bits = c[i]; bits; bits &= bits - 1) {
                const int x = i * 64 + std::countr_zero(bits);
                image_[v] = x;
                used_[i] |= std::uint64_t{1} << (x & 63);
                const std::uint64_t sub = count_level(level + 1);
                used_[i] &= ~(std::uint64_t{1} << (x & 63));
                if (__builtin_add_overflow(total, sub, &total))
                    throw std::overflow_error("injective homomorphism count exceeds 64 bits");
            }
        image_[v] = -1;
        return total;
    }

    template <typename Visit>
    void enumerate_level(std::size_t level, Visit& visit)
    {
        const std::uint64_t* c = candidates(level);
        const int v = order_[level];
        for (int i = 0; i < words_; ++i)
            for (std::uint64_t bits = c[i]; bits; bits &= bits - 1) {
                const int x = i * 64 + std::countr_zero(bits);
                image_[v] = x;
                used_[i] |= std::uint64_t{1} << (x & 63);
                if (level + 1 == order_.size())
                    visit(image_);
                else
                    enumerate_level(level + 1, visit);
                used_[i] &= ~(std::uint64_t{1} << (x & 63));
            }
        image_[v] = -1;
    }

    const LabelledGraph& f_;
    const Graph& g_;
    int words_ = 0;
    std::vector<int> image_;
    std::vector<std::uint64_t> used_;
    std::vector<std::uint64_t> full_;
    std::vector<std::uint64_t> scratch_;
    std::vector<int> order_;
    std::vector<std::uint32_t> anchors_;
};

} // namespace

std::uint64_t count_inj(const LabelledGraph& f, const Graph& g, std::span<const int> w)
{
    InjectiveSearch search(f, g, w);
    return search.count();
}

std::uint64_t count_copies(const LabelledGraph& f, const Graph& g, std::span<const int> w)
{
    InjectiveSearch search(f, g, w);
    const auto edges = f.edges();
    std::set<std::vector<std::uint64_t>> images;
    std::vector<std::uint64_t> image;
    search.enumerate([&](const std::vector<int>& chi) {
        image.clear();
        for (auto [u, v] : edges) {
            auto a = static_cast<std::uint64_t>(chi[u]);
            auto b = static_cast<std::uint64_t>(chi[v]);
            if (a > b)
                std::swap(a, b);
            image.push_back(a << 32 | b);
        }
        std::sort(image.begin(), image.end());
        image.erase(std::unique(image.begin(), image.end()), image.end());
        images.insert(image);
    });
    return images.size();
}

std::uint64_t count_aut(const LabelledGraph& f)
{
    std::vector<int> roots(f.labels());
    for (int i = 0; i < f.labels(); ++i)
        roots[i] = i;
    return count_inj(f, f.as_graph(), roots);
}

// ---------------------------------------------------------------------------
// Frequency vectors

nlohmann::ordered_json FreqVector::to_json() const
{
    nlohmann::ordered_json coords = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < residues.size(); ++i)
        coords[basis->code(i).hex()] = residues[i];
    nlohmann::ordered_json j;
    j["q"] = q;
    j["coords"] = std::move(coords);
    return j;
}

FreqVector FreqVector::from_json(const nlohmann::ordered_json& j)
{
    FreqVector f;
    f.q = j.at("q").get<int>();
    if (f.q < 2)
        throw std::invalid_argument("frequency vector modulus must be at least 2");
    std::vector<LabelledGraph> patterns;
    int labels = -1;
    for (const auto& [hex, value] : j.at("coords").items()) {
        auto g = from_canonical_code(CanonicalCode::from_hex(hex));
        if (labels >= 0 && g.labels() != labels)
            throw std::invalid_argument("frequency vector mixes label counts");
        labels = g.labels();
        const int r = value.get<int>();
        if (r < 0 || r >= f.q)
            throw std::invalid_argument("residue out of range in frequency vector");
        patterns.push_back(g);
        f.residues.push_back(r);
    }
    f.basis = std::make_shared<const PatternBasis>(std::max(labels, 0), std::move(patterns));
    return f;
}

std::vector<std::uint64_t> count_vector(const PatternBasis& basis, const Graph& g, std::span<const int> w)
{
    std::vector<std::uint64_t> out;
    out.reserve(basis.size());
    for (const auto& p : basis.patterns())
        out.push_back(count_inj(p, g, w));
    return out;
}

FreqVector freq_vector(const Graph& g, std::span<const int> w, std::shared_ptr<const PatternBasis> basis, int q)
{
    if (q < 2)
        throw std::invalid_argument("modulus must be at least 2");
    FreqVector f;
    f.q = q;
    f.basis = std::move(basis);
    for (auto c : count_vector(*f.basis, g, w))
        f.residues.push_back(static_cast<int>(c % static_cast<std::uint64_t>(q)));
    return f;
}

FreqVector freq_vector(const Graph& g, std::span<const int> w, int a, int q)
{
    auto f = freq_vector(g, w, PatternBasis::conn(static_cast<int>(w.size()), a), q);
    FeasibleSet feasible(type_of(g, w), f.basis, q, g.order() % q);
    if (auto why = feasible.violation(f); !why.empty())
        throw std::logic_error("frequency vector of a concrete graph is infeasible: " + why);
    return f;
}

// ---------------------------------------------------------------------------
// Feasible sets

namespace {

bool is_k1(const LabelledGraph& f)
{
    return f.unlabelled_count() == 1 && f.edge_count() == 0;
}

} // namespace

FeasibleSet::FeasibleSet(TypeTau tau, std::shared_ptr<const PatternBasis> basis, int q, int n_residue)
    : tau_(std::move(tau)), basis_(std::move(basis)), q_(q), n_residue_(((n_residue % q) + q) % q)
{
    if (q < 2)
        throw std::invalid_argument("modulus must be at least 2");
    if (basis_->labels() != tau_.arity())
        throw std::invalid_argument("type arity and basis label count differ");
    std::map<CanonicalCode, int> classes;
    for (std::size_t i = 0; i < basis_->size(); ++i) {
        const auto& f = basis_->pattern(i);
        const auto quotient_graph = quotient(f, tau_.partition());
        auto code = canonical_form(quotient_graph);
        auto [it, fresh] = classes.emplace(std::move(code), static_cast<int>(class_value_.size()));
        if (fresh) {
            int value = -1;
            if (is_k1(f))
                value = ((n_residue_ - tau_.block_count()) % q + q) % q;
            else if (count_aut(quotient_graph) % static_cast<std::uint64_t>(q) == 0)
                value = 0;
            class_value_.push_back(value);
            if (value < 0)
                free_classes_.push_back(it->second);
        }
        class_of_.push_back(it->second);
    }
}

std::uint64_t FeasibleSet::size() const
{
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < free_classes_.size(); ++i)
        if (__builtin_mul_overflow(total, static_cast<std::uint64_t>(q_), &total) || total > (std::uint64_t{1} << 63))
            throw std::overflow_error("feasible set size exceeds 2^63");
    return total;
}

std::string FeasibleSet::violation(const FreqVector& f) const
{
    if (f.q != q_)
        return "modulus differs";
    if (f.basis->codes() != basis_->codes())
        return "coordinate set differs";
    std::vector<int> seen(class_value_.size(), -1);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const int r = f[i];
        const auto& name = basis_->pattern(i);
        if (r < 0 || r >= q_)
            return "residue out of range at " + name.to_string();
        const int c = class_of_[i];
        if (class_value_[c] >= 0 && r != class_value_[c])
            return "coordinate " + name.to_string() + " must be " + std::to_string(class_value_[c]);
        if (seen[c] >= 0 && seen[c] != r)
            return "partition-equivalent coordinates differ at " + name.to_string();
        seen[c] = r;
    }
    return {};
}

bool FeasibleSet::contains(const FreqVector& f) const
{
    return violation(f).empty();
}

FreqVector FeasibleSet::member(std::uint64_t index) const
{
    if (index >= size())
        throw std::out_of_range("feasible member index out of range");
    std::vector<int> value = class_value_;
    for (int c : free_classes_) {
        value[c] = static_cast<int>(index % static_cast<std::uint64_t>(q_));
        index /= static_cast<std::uint64_t>(q_);
    }
    FreqVector f;
    f.q = q_;
    f.basis = basis_;
    f.residues.reserve(class_of_.size());
    for (int c : class_of_)
        f.residues.push_back(value[c]);
    return f;
}

std::vector<FreqVector> FeasibleSet::members(std::uint64_t cap) const
{
    const auto total = size();
    if (total > cap)
        throw std::length_error("feasible set has " + std::to_string(total) + " members; cap is " +
                                std::to_string(cap));
    std::vector<FreqVector> out;
    out.reserve(total);
    for (std::uint64_t i = 0; i < total; ++i)
        out.push_back(member(i));
    return out;
}

FeasibleSet enumerate_feasible(const TypeTau& tau, int a, int q, int n_residue)
{
    return FeasibleSet(tau, PatternBasis::conn(tau.arity(), a), q, n_residue);
}

} // namespace modlaw
