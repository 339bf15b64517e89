#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace modlaw {

using Edge = std::pair<int, int>;

struct Anchor;

/// Simple undirected graph on {0..n-1} with bitset adjacency rows.
class Graph {
public:
    Graph() = default;
    explicit Graph(int n);

    /// Edges must satisfy 0 <= u < v < n with no repeats.
    static Graph from_edges(int n, std::span<const Edge> edges);

    int order() const noexcept { return n_; }
    int words() const noexcept { return words_; }

    bool adjacent(int u, int v) const noexcept
    {
        return (bits_[static_cast<std::size_t>(u) * words_ + (v >> 6)] >> (v & 63)) & 1u;
    }

    std::span<const std::uint64_t> row(int u) const noexcept
    {
        return {bits_.data() + static_cast<std::size_t>(u) * words_, static_cast<std::size_t>(words_)};
    }

    int degree(int u) const noexcept;
    std::size_t edge_count() const noexcept;

    /// Sorted (u < v) edge list.
    std::vector<Edge> edges() const;

    Graph permuted(std::span<const int> sigma) const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    friend Graph sample_gnp(int, double, std::uint64_t);
    friend Graph sample_conditioned(int, double, const Anchor&, std::uint64_t);

    void set_edge(int u, int v) noexcept
    {
        bits_[static_cast<std::size_t>(u) * words_ + (v >> 6)] |= std::uint64_t{1} << (v & 63);
        bits_[static_cast<std::size_t>(v) * words_ + (u >> 6)] |= std::uint64_t{1} << (u & 63);
    }

    int n_ = 0;
    int words_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Fixed part of a conditioned random graph: the edges among `vertices`
/// are exactly `edges`.
struct Anchor {
    std::vector<int> vertices;
    std::vector<Edge> edges;
};

/// G(n, p). Pairs are visited in lexicographic order, one draw per pair.
Graph sample_gnp(int n, double p, std::uint64_t seed);

/// G(n, p | V_A, E_A). Draws only for free pairs, in the same order as
/// sample_gnp, so an empty anchor reproduces sample_gnp exactly.
Graph sample_conditioned(int n, double p, const Anchor& anchor, std::uint64_t seed);

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

} // namespace modlaw
