#include "modlaw/graph.hpp"

#include <algorithm>
#include <bit>

#include "modlaw/rng.hpp"

namespace modlaw {

Graph::Graph(int n)
{
    if (n < 0)
        throw std::invalid_argument("graph order must be non-negative");
    n_ = n;
    words_ = (n + 63) / 64;
    bits_.assign(static_cast<std::size_t>(n) * words_, 0);
}

Graph Graph::from_edges(int n, std::span<const Edge> edges)
{
    Graph g(n);
    for (auto [u, v] : edges) {
        if (u < 0 || v >= n || u >= v)
            throw std::invalid_argument("edge [" + std::to_string(u) + "," + std::to_string(v) +
                                        "] must satisfy 0 <= u < v < n");
        if (g.adjacent(u, v))
            throw std::invalid_argument("duplicate edge [" + std::to_string(u) + "," + std::to_string(v) + "]");
        g.set_edge(u, v);
    }
    return g;
}

int Graph::degree(int u) const noexcept
{
    int d = 0;
    for (auto w : row(u))
        d += std::popcount(w);
    return d;
}

std::size_t Graph::edge_count() const noexcept
{
    std::size_t total = 0;
    for (auto w : bits_)
        total += static_cast<std::size_t>(std::popcount(w));
    return total / 2;
}

std::vector<Edge> Graph::edges() const
{
    std::vector<Edge> out;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v)
            if (adjacent(u, v))
                out.emplace_back(u, v);
    return out;
}

Graph Graph::permuted(std::span<const int> sigma) const
{
    Graph g(n_);
    for (auto [u, v] : edges())
        g.set_edge(std::min(sigma[u], sigma[v]), std::max(sigma[u], sigma[v]));
    return g;
}

namespace {

void check_probability(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("edge probability must lie strictly between 0 and 1");
}

} // namespace

Graph sample_gnp(int n, double p, std::uint64_t seed)
{
    check_probability(p);
    Graph g(n);
    CounterRng rng(seed);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.bernoulli(p))
                g.set_edge(u, v);
    return g;
}

Graph sample_conditioned(int n, double p, const Anchor& anchor, std::uint64_t seed)
{
    check_probability(p);
    Graph g(n);
    std::vector<char> anchored(static_cast<std::size_t>(std::max(n, 0)), 0);
    for (int v : anchor.vertices) {
        if (v < 0 || v >= n)
            throw std::invalid_argument("anchor vertex " + std::to_string(v) + " out of range");
        anchored[v] = 1;
    }
    for (auto [u, v] : anchor.edges) {
        if (u < 0 || v >= n || u >= v)
            throw std::invalid_argument("anchor edges must satisfy 0 <= u < v < n");
        if (!anchored[u] || !anchored[v])
            throw std::invalid_argument("anchor edge endpoints must be anchor vertices");
        g.set_edge(u, v);
    }
    CounterRng rng(seed);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            if (anchored[u] && anchored[v])
                continue;
            if (rng.bernoulli(p))
                g.set_edge(u, v);
        }
    return g;
}

nlohmann::json graph_to_json(const Graph& g)
{
    nlohmann::json edges = nlohmann::json::array();
    for (auto [u, v] : g.edges())
        edges.push_back({u, v});
    return {{"n", g.order()}, {"edges", edges}};
}

Graph graph_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
        throw std::invalid_argument("graph JSON needs \"n\" and \"edges\"");
    const int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument("each edge must be a pair [u,v]");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Graph::from_edges(n, edges);
}

} // namespace modlaw
