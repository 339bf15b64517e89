#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modlaw/graph.hpp"

namespace modlaw {

inline constexpr int kMaxPatternVertices = 20;

class PatternSizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// An I-labelled pattern graph with I = {0..labels-1}. Vertex i carries
/// label i for i < labels; the remaining vertices are unlabelled. The
/// labelled vertices always form an independent set.
class LabelledGraph {
public:
    LabelledGraph() = default;
    LabelledGraph(int labels, int unlabelled);

    /// Plain (I = {}) pattern from a host graph.
    static LabelledGraph from_graph(const Graph& g);
    static LabelledGraph from_edges(int labels, int order, std::span<const Edge> edges);
    /// The I-labelled graph with no unlabelled vertex; its count is always 1.
    static LabelledGraph labels_only(int labels) { return LabelledGraph(labels, 0); }
    /// K1(I): the labels plus one isolated unlabelled vertex.
    static LabelledGraph k1(int labels) { return LabelledGraph(labels, 1); }

    int labels() const noexcept { return labels_; }
    int order() const noexcept { return order_; }
    int unlabelled_count() const noexcept { return order_ - labels_; }
    bool is_labelled(int v) const noexcept { return v < labels_; }

    bool adjacent(int u, int v) const noexcept { return (adj_[u] >> v) & 1u; }
    std::uint32_t neighbours(int v) const noexcept { return adj_[v]; }
    int edge_count() const noexcept;
    std::vector<Edge> edges() const;

    /// Throws if both endpoints are labelled or u == v.
    void add_edge(int u, int v);
    void remove_edge(int u, int v) noexcept;
    /// Appends an unlabelled vertex and returns its index.
    int add_vertex();

    /// F minus its labelled vertices is connected and non-empty.
    bool is_label_connected() const;
    /// F(i) is not isolated.
    bool depends_on_label(int i) const noexcept { return adj_[i] != 0; }
    /// Connected components of the unlabelled part, each sorted ascending.
    std::vector<std::vector<int>> unlabelled_components() const;

    /// Keeps the labels and the given unlabelled vertices (in that order).
    LabelledGraph restricted_to(std::span<const int> unlabelled) const;
    /// Adds a new isolated label with index labels().
    LabelledGraph with_isolated_label() const;
    /// Turns unlabelled vertex u into a new label with index labels(). Edges
    /// between u and the existing labels are dropped.
    LabelledGraph label_vertex(int u) const;
    /// Turns the label `label` into an unlabelled vertex; later labels shift down.
    LabelledGraph unlabel(int label) const;
    /// Relabels vertex v as position sigma[v]; sigma must fix every label.
    LabelledGraph permuted(std::span<const int> sigma) const;
    /// Host-graph view (labels become ordinary vertices).
    Graph as_graph() const;

    std::string to_string() const;

    friend bool operator==(const LabelledGraph& a, const LabelledGraph& b) noexcept
    {
        if (a.labels_ != b.labels_ || a.order_ != b.order_)
            return false;
        for (int v = 0; v < a.order_; ++v)
            if (a.adj_[v] != b.adj_[v])
                return false;
        return true;
    }

private:
    int labels_ = 0;
    int order_ = 0;
    std::array<std::uint32_t, kMaxPatternVertices> adj_{};
};

/// Byte string identifying a labelled graph up to label-preserving isomorphism.
struct CanonicalCode {
    std::string bytes;

    std::string hex() const;
    static CanonicalCode from_hex(const std::string& hex);

    friend auto operator<=>(const CanonicalCode&, const CanonicalCode&) = default;
    friend bool operator==(const CanonicalCode&, const CanonicalCode&) = default;
};

struct CanonicalLabelling {
    CanonicalCode code;
    /// position -> original vertex; labels map to themselves.
    std::vector<int> order;
};

/// Individualisation-refinement search; labels stay fixed, twins are pruned.
CanonicalLabelling canonical_labelling(const LabelledGraph& f);
CanonicalCode canonical_form(const LabelledGraph& f);
CanonicalCode canonical_form(const Graph& g);
/// The isomorphic copy of f laid out in canonical vertex order.
LabelledGraph canonical_representative(const LabelledGraph& f);
/// Inverse of canonical_form up to isomorphism: rebuilds the canonical
/// representative from its code.
LabelledGraph from_canonical_code(const CanonicalCode& code);

/// Connected graphs on at most `a` vertices, one per isomorphism class,
/// ordered by vertex count, then edge count, then code.
std::vector<LabelledGraph> enumerate_connected(int a);

/// Label-connected patterns over {0..labels-1} with at most `t` unlabelled
/// vertices, one per label-preserving isomorphism class, ordered by
/// unlabelled count, then edge count, then code. K1(I) comes first.
std::vector<LabelledGraph> enumerate_label_connected(int labels, int t);

/// Partition of {0..k-1}; block ids are numbered by first occurrence.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<int> block_of);
    static Partition discrete(int k);
    /// Groups positions holding equal entries.
    static Partition of_tuple(std::span<const int> w);
    /// All partitions of {0..k-1} in restricted-growth-string order.
    static std::vector<Partition> all(int k);

    int size() const noexcept { return static_cast<int>(block_of_.size()); }
    int block_count() const noexcept { return blocks_; }
    int block(int i) const noexcept { return block_of_[i]; }
    /// Smallest element of block b.
    int representative(int b) const;
    std::vector<std::vector<int>> blocks() const;
    const std::vector<int>& block_ids() const noexcept { return block_of_; }

    /// This partition (over a superset) restricted to the first coarse.size() points equals coarse.
    bool extends(const Partition& coarse) const;

    friend auto operator<=>(const Partition&, const Partition&) = default;

private:
    std::vector<int> block_of_;
    int blocks_ = 0;
};

/// Equality/adjacency profile of a root tuple.
class TypeTau {
public:
    TypeTau() = default;
    /// block_adjacency[b] is a bitmask over blocks; must be symmetric and loop-free.
    TypeTau(Partition partition, std::vector<std::uint32_t> block_adjacency);

    const Partition& partition() const noexcept { return partition_; }
    int arity() const noexcept { return partition_.size(); }
    int block_count() const noexcept { return partition_.block_count(); }
    bool blocks_adjacent(int b1, int b2) const noexcept { return (adjacency_[b1] >> b2) & 1u; }
    /// Positions i and j are adjacent under this type.
    bool adjacent(int i, int j) const noexcept { return blocks_adjacent(partition_.block(i), partition_.block(j)); }
    bool equal(int i, int j) const noexcept { return partition_.block(i) == partition_.block(j); }
    const std::vector<std::uint32_t>& block_adjacency() const noexcept { return adjacency_; }

    /// tau' (over k+1 or more positions) extends tau (over k).
    bool extends(const TypeTau& base) const;

    /// Whether the last position is a singleton block.
    bool last_is_singleton() const;

    /// All types over k positions.
    static std::vector<TypeTau> all(int k);
    /// All types over k+1 positions extending `base`.
    static std::vector<TypeTau> extensions(const TypeTau& base);

    std::string key() const;
    std::string to_string() const;

    friend auto operator<=>(const TypeTau&, const TypeTau&) = default;

private:
    Partition partition_;
    std::vector<std::uint32_t> adjacency_;
};

TypeTau type_of(const Graph& g, std::span<const int> w);

/// F/Pi: identifies labels sharing a block; the result is labelled by block ids.
LabelledGraph quotient(const LabelledGraph& f, const Partition& pi);

/// Identifies label `from` with label `into` (from > into), keeping the
/// remaining labels in order. Used for merged-root extensions.
LabelledGraph merge_labels(const LabelledGraph& f, int from, int into);

} // namespace modlaw
