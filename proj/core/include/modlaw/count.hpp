#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "modlaw/graph.hpp"
#include "modlaw/pattern.hpp"

namespace modlaw {

/// Ordered list of pairwise non-isomorphic k-labelled patterns. Coordinates of
/// a FreqVector are indexed by position in a basis.
class PatternBasis {
public:
    /// Patterns are replaced by canonical representatives; duplicates are rejected.
    PatternBasis(int labels, std::vector<LabelledGraph> patterns);

    /// Conn_k^a in enumerate_label_connected order. Cached and shared.
    static std::shared_ptr<const PatternBasis> conn(int labels, int a);

    int labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return patterns_.size(); }
    const LabelledGraph& pattern(std::size_t i) const { return patterns_.at(i); }
    const CanonicalCode& code(std::size_t i) const { return codes_.at(i); }
    const std::vector<LabelledGraph>& patterns() const noexcept { return patterns_; }
    const std::vector<CanonicalCode>& codes() const noexcept { return codes_; }

    std::optional<std::size_t> find(const CanonicalCode& code) const;
    /// Throws std::out_of_range naming the missing pattern.
    std::size_t index_of(const CanonicalCode& code) const;
    int max_unlabelled() const noexcept { return max_unlabelled_; }

private:
    int labels_;
    int max_unlabelled_ = 0;
    std::vector<LabelledGraph> patterns_;
    std::vector<CanonicalCode> codes_;
    std::map<CanonicalCode, std::size_t> index_;
};

/// [F](G, w): injective homomorphisms sending label i to w[i]. Injective
/// only off the labelled set, so repeated roots are allowed. Throws
/// std::overflow_error past 2^64.
std::uint64_t count_inj(const LabelledGraph& f, const Graph& g, std::span<const int> w);

/// <F>(G, w): distinct edge-set images of injective homomorphisms.
std::uint64_t count_copies(const LabelledGraph& f, const Graph& g, std::span<const int> w);

/// Automorphisms of f fixing every label.
std::uint64_t count_aut(const LabelledGraph& f);

/// Residues mod q over a pattern basis.
struct FreqVector {
    int q = 2;
    std::shared_ptr<const PatternBasis> basis;
    std::vector<int> residues;

    std::size_t size() const noexcept { return residues.size(); }
    int operator[](std::size_t i) const { return residues[i]; }
    /// Throws std::out_of_range if the pattern is not a coordinate.
    int at(const CanonicalCode& code) const { return residues[basis->index_of(code)]; }

    /// {"q": q, "coords": {"<code-hex>": r, ...}} in basis order.
    nlohmann::ordered_json to_json() const;
    /// Rebuilds the basis from the coordinate codes (in the order given).
    static FreqVector from_json(const nlohmann::ordered_json& j);

    friend bool operator==(const FreqVector& a, const FreqVector& b)
    {
        return a.q == b.q && a.basis->codes() == b.basis->codes() && a.residues == b.residues;
    }
};

/// Exact counts of every basis pattern at (g, w).
std::vector<std::uint64_t> count_vector(const PatternBasis& basis, const Graph& g, std::span<const int> w);

/// freq_G^a(w) over Conn_{|w|}^a. Asserts membership of the feasible set.
FreqVector freq_vector(const Graph& g, std::span<const int> w, int a, int q);
FreqVector freq_vector(const Graph& g, std::span<const int> w, std::shared_ptr<const PatternBasis> basis, int q);

/// FFreq_n(tau, I, a): divisibility by aut(F/Pi), equality across
/// Pi-equivalence classes, and the K1(I) pin. Members are enumerated lazily
/// in mixed-radix order over the free classes.
class FeasibleSet {
public:
    static constexpr std::uint64_t kDefaultCap = 1'000'000;

    FeasibleSet(TypeTau tau, std::shared_ptr<const PatternBasis> basis, int q, int n_residue);

    const TypeTau& tau() const noexcept { return tau_; }
    const std::shared_ptr<const PatternBasis>& basis() const noexcept { return basis_; }
    int q() const noexcept { return q_; }
    int n_residue() const noexcept { return n_residue_; }

    /// Pi-equivalence class of each coordinate (numbered by first occurrence).
    const std::vector<int>& class_of() const noexcept { return class_of_; }
    /// Per class: the forced residue, or -1 if the class is free.
    const std::vector<int>& class_value() const noexcept { return class_value_; }
    int free_count() const noexcept { return static_cast<int>(free_classes_.size()); }

    /// q^free_count; throws std::overflow_error beyond 2^63.
    std::uint64_t size() const;
    bool contains(const FreqVector& f) const;
    /// Why f is not a member, or an empty string.
    std::string violation(const FreqVector& f) const;

    FreqVector member(std::uint64_t index) const;
    /// All members; throws std::length_error if size() exceeds cap.
    std::vector<FreqVector> members(std::uint64_t cap = kDefaultCap) const;

private:
    TypeTau tau_;
    std::shared_ptr<const PatternBasis> basis_;
    int q_;
    int n_residue_;
    std::vector<int> class_of_;
    std::vector<int> class_value_;
    std::vector<int> free_classes_;
};

FeasibleSet enumerate_feasible(const TypeTau& tau, int a, int q, int n_residue);

} // namespace modlaw
