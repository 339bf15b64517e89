#pragma once

// Brute-force reference implementations. Nothing here calls the code under
// test except for trivial accessors and the graph containers.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "modlaw/count.hpp"
#include "modlaw/graph.hpp"
#include "modlaw/pattern.hpp"
#include "modlaw/rng.hpp"

namespace oracle {

using modlaw::Edge;
using modlaw::Graph;
using modlaw::LabelledGraph;

/// Every map chi: V_F -> V_G with chi(i) = w[i] on labels, unlabelled
/// vertices sent injectively outside the root images, edges preserved.
inline void for_each_injective(const LabelledGraph& f, const Graph& g, std::span<const int> w,
                               const std::function<void(const std::vector<int>&)>& visit)
{
    const int n = g.order();
    const int order = f.order();
    std::vector<int> chi(order, -1);
    for (int i = 0; i < f.labels(); ++i)
        chi[i] = w[i];
    const auto edges = f.edges();
    std::function<void(int)> rec = [&](int v) {
        if (v == order) {
            for (auto [a, b] : edges)
                if (!g.adjacent(chi[a], chi[b]))
                    return;
            visit(chi);
            return;
        }
        for (int x = 0; x < n; ++x) {
            if (std::find(chi.begin(), chi.begin() + v, x) != chi.begin() + v)
                continue;
            chi[v] = x;
            rec(v + 1);
        }
        chi[v] = -1;
    };
    rec(f.labels());
}

inline std::uint64_t inj(const LabelledGraph& f, const Graph& g, std::span<const int> w)
{
    std::uint64_t c = 0;
    for_each_injective(f, g, w, [&](const std::vector<int>&) { ++c; });
    return c;
}

inline std::uint64_t copies(const LabelledGraph& f, const Graph& g, std::span<const int> w)
{
    std::set<std::set<std::pair<int, int>>> images;
    const auto edges = f.edges();
    for_each_injective(f, g, w, [&](const std::vector<int>& chi) {
        std::set<std::pair<int, int>> im;
        for (auto [a, b] : edges)
            im.insert(std::minmax(chi[a], chi[b]));
        images.insert(im);
    });
    return images.size();
}

/// Label-fixing permutations of V_F preserving adjacency.
inline std::uint64_t aut(const LabelledGraph& f)
{
    std::vector<int> perm(f.order());
    std::iota(perm.begin(), perm.end(), 0);
    std::uint64_t c = 0;
    do {
        bool ok = true;
        for (int i = 0; i < f.labels() && ok; ++i)
            ok = perm[i] == i;
        for (int u = 0; u < f.order() && ok; ++u)
            for (int v = u + 1; v < f.order() && ok; ++v)
                ok = f.adjacent(u, v) == f.adjacent(perm[u], perm[v]);
        c += ok;
    } while (std::next_permutation(perm.begin() + f.labels(), perm.end()));
    return c;
}

/// Label-preserving isomorphism by permutation search.
inline bool isomorphic(const LabelledGraph& a, const LabelledGraph& b)
{
    if (a.labels() != b.labels() || a.order() != b.order() || a.edge_count() != b.edge_count())
        return false;
    std::vector<int> perm(a.order());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (int u = 0; u < a.order() && ok; ++u)
            for (int v = u + 1; v < a.order() && ok; ++v)
                ok = a.adjacent(u, v) == b.adjacent(perm[u], perm[v]);
        if (ok)
            return true;
    } while (std::next_permutation(perm.begin() + a.labels(), perm.end()));
    return false;
}

inline bool connected(const Graph& g)
{
    if (g.order() == 0)
        return false;
    std::vector<int> seen(g.order(), 0), stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < g.order(); ++v)
            if (!seen[v] && g.adjacent(u, v)) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
    }
    return reached == g.order();
}

inline std::vector<Edge> all_pairs(int n)
{
    std::vector<Edge> pairs;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            pairs.emplace_back(u, v);
    return pairs;
}

inline Graph graph_from_mask(int n, std::uint64_t mask)
{
    const auto pairs = all_pairs(n);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if ((mask >> i) & 1u)
            edges.push_back(pairs[i]);
    return Graph::from_edges(n, edges);
}

/// All labelled graphs on n vertices (2^C(n,2) of them).
inline std::vector<Graph> all_graphs(int n)
{
    std::vector<Graph> out;
    const std::uint64_t total = std::uint64_t{1} << (n * (n - 1) / 2);
    for (std::uint64_t m = 0; m < total; ++m)
        out.push_back(graph_from_mask(n, m));
    return out;
}

/// Patterns with `labels` labels and `order` vertices, labelled set
/// independent, one per label-preserving isomorphism class (found by
/// permutation search, not by canonical codes).
inline std::vector<LabelledGraph> all_patterns(int labels, int order)
{
    std::vector<Edge> allowed;
    for (int u = 0; u < order; ++u)
        for (int v = std::max(u + 1, labels); v < order; ++v)
            allowed.emplace_back(u, v);
    std::vector<LabelledGraph> reps;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << allowed.size()); ++m) {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < allowed.size(); ++i)
            if ((m >> i) & 1u)
                edges.push_back(allowed[i]);
        auto f = LabelledGraph::from_edges(labels, order, edges);
        if (std::none_of(reps.begin(), reps.end(), [&](const LabelledGraph& r) { return isomorphic(r, f); }))
            reps.push_back(f);
    }
    return reps;
}

/// Graph isomorphism classes on exactly n vertices, by vertex augmentation
/// and permutation-search deduplication.
inline std::vector<Graph> graph_classes(int n)
{
    std::vector<LabelledGraph> level{LabelledGraph(0, 0)};
    for (int size = 1; size <= n; ++size) {
        std::vector<LabelledGraph> next;
        std::map<std::pair<int, std::vector<int>>, std::vector<std::size_t>> buckets;
        for (const auto& base : level)
            for (std::uint32_t nb = 0; nb < (1u << (size - 1)); ++nb) {
                LabelledGraph f = base;
                const int v = f.add_vertex();
                for (int u = 0; u < size - 1; ++u)
                    if ((nb >> u) & 1u)
                        f.add_edge(u, v);
                std::vector<int> degrees;
                for (int u = 0; u < size; ++u)
                    degrees.push_back(std::popcount(f.neighbours(u)));
                std::sort(degrees.begin(), degrees.end());
                auto& bucket = buckets[{f.edge_count(), degrees}];
                if (std::none_of(bucket.begin(), bucket.end(),
                                 [&](std::size_t i) { return isomorphic(next[i], f); })) {
                    bucket.push_back(next.size());
                    next.push_back(f);
                }
            }
        level = std::move(next);
    }
    std::vector<Graph> out;
    for (const auto& f : level)
        out.push_back(f.as_graph());
    return out;
}

inline Graph random_graph(int n, double p, modlaw::CounterRng& rng)
{
    std::vector<Edge> edges;
    for (auto e : all_pairs(n))
        if (rng.bernoulli(p))
            edges.push_back(e);
    return Graph::from_edges(n, edges);
}

inline std::vector<int> random_permutation(int n, modlaw::CounterRng& rng)
{
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    return perm;
}

/// All tuples in {0..n-1}^k.
inline std::vector<std::vector<int>> tuples(int n, int k)
{
    std::vector<std::vector<int>> out;
    if (n == 0 && k > 0)
        return out;
    std::vector<int> t(k, 0);
    while (true) {
        out.push_back(t);
        int i = 0;
        while (i < k && ++t[i] == n)
            t[i++] = 0;
        if (i == k)
            break;
    }
    return out;
}

} // namespace oracle
