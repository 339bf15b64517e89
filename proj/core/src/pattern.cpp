#include "modlaw/pattern.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <map>
#include <numeric>
#include <sstream>

namespace modlaw {

// ---------------------------------------------------------------------------
// LabelledGraph

LabelledGraph::LabelledGraph(int labels, int unlabelled)
{
    if (labels < 0 || unlabelled < 0)
        throw std::invalid_argument("negative pattern size");
    if (labels + unlabelled > kMaxPatternVertices)
        throw PatternSizeError("pattern has " + std::to_string(labels + unlabelled) + " vertices; limit is " +
                               std::to_string(kMaxPatternVertices));
    labels_ = labels;
    order_ = labels + unlabelled;
}

LabelledGraph LabelledGraph::from_graph(const Graph& g)
{
    LabelledGraph f(0, g.order());
    for (auto [u, v] : g.edges())
        f.add_edge(u, v);
    return f;
}

LabelledGraph LabelledGraph::from_edges(int labels, int order, std::span<const Edge> edges)
{
    LabelledGraph f(labels, order - labels);
    for (auto [u, v] : edges)
        f.add_edge(u, v);
    return f;
}

int LabelledGraph::edge_count() const noexcept
{
    int total = 0;
    for (int v = 0; v < order_; ++v)
        total += std::popcount(adj_[v]);
    return total / 2;
}

std::vector<Edge> LabelledGraph::edges() const
{
    std::vector<Edge> out;
    for (int u = 0; u < order_; ++u)
        for (int v = u + 1; v < order_; ++v)
            if (adjacent(u, v))
                out.emplace_back(u, v);
    return out;
}

void LabelledGraph::add_edge(int u, int v)
{
    if (u == v || u < 0 || v < 0 || u >= order_ || v >= order_)
        throw std::invalid_argument("invalid pattern edge");
    if (u < labels_ && v < labels_)
        throw std::invalid_argument("labelled vertices must stay independent");
    adj_[u] |= 1u << v;
    adj_[v] |= 1u << u;
}

void LabelledGraph::remove_edge(int u, int v) noexcept
{
    adj_[u] &= ~(1u << v);
    adj_[v] &= ~(1u << u);
}

int LabelledGraph::add_vertex()
{
    if (order_ + 1 > kMaxPatternVertices)
        throw PatternSizeError("pattern vertex limit " + std::to_string(kMaxPatternVertices) + " exceeded");
    adj_[order_] = 0;
    return order_++;
}

std::vector<std::vector<int>> LabelledGraph::unlabelled_components() const
{
    std::vector<std::vector<int>> comps;
    std::uint32_t unlabelled_mask = 0;
    for (int v = labels_; v < order_; ++v)
        unlabelled_mask |= 1u << v;
    std::uint32_t seen = 0;
    for (int s = labels_; s < order_; ++s) {
        if ((seen >> s) & 1u)
            continue;
        std::uint32_t comp = 1u << s;
        std::uint32_t frontier = comp;
        while (frontier) {
            const int v = std::countr_zero(frontier);
            frontier &= frontier - 1;
            const std::uint32_t fresh = adj_[v] & unlabelled_mask & ~comp;
            comp |= fresh;
            frontier |= fresh;
        }
        seen |= comp;
        std::vector<int> members;
        for (std::uint32_t m = comp; m; m &= m - 1)
            members.push_back(std::countr_zero(m));
        comps.push_back(std::move(members));
    }
    return comps;
}

bool LabelledGraph::is_label_connected() const
{
    return unlabelled_count() > 0 && unlabelled_components().size() == 1;
}

LabelledGraph LabelledGraph::restricted_to(std::span<const int> unlabelled) const
{
    LabelledGraph out(labels_, static_cast<int>(unlabelled.size()));
    std::vector<int> pos(order_, -1);
    for (int i = 0; i < labels_; ++i)
        pos[i] = i;
    for (std::size_t j = 0; j < unlabelled.size(); ++j)
        pos[unlabelled[j]] = labels_ + static_cast<int>(j);
    for (auto [u, v] : edges())
        if (pos[u] >= 0 && pos[v] >= 0)
            out.add_edge(pos[u], pos[v]);
    return out;
}

LabelledGraph LabelledGraph::with_isolated_label() const
{
    LabelledGraph out(labels_ + 1, unlabelled_count());
    auto shift = [&](int v) { return v < labels_ ? v : v + 1; };
    for (auto [u, v] : edges())
        out.add_edge(shift(u), shift(v));
    return out;
}

LabelledGraph LabelledGraph::label_vertex(int u) const
{
    if (u < labels_ || u >= order_)
        throw std::invalid_argument("label_vertex needs an unlabelled vertex");
    LabelledGraph out(labels_ + 1, unlabelled_count() - 1);
    auto pos = [&](int v) {
        if (v < labels_)
            return v;
        if (v == u)
            return labels_;
        return v < u ? v + 1 : v;
    };
    for (auto [a, b] : edges())
        if (pos(a) >= out.labels() || pos(b) >= out.labels())
            out.add_edge(pos(a), pos(b));
    return out;
}

LabelledGraph LabelledGraph::unlabel(int label) const
{
    if (label < 0 || label >= labels_)
        throw std::invalid_argument("unlabel needs a labelled vertex");
    LabelledGraph out(labels_ - 1, unlabelled_count() + 1);
    auto pos = [&](int v) {
        if (v == label)
            return labels_ - 1;
        if (v < label)
            return v;
        return v - 1 < labels_ - 1 ? v - 1 : v;
    };
    for (auto [a, b] : edges())
        out.add_edge(pos(a), pos(b));
    return out;
}

LabelledGraph LabelledGraph::permuted(std::span<const int> sigma) const
{
    LabelledGraph out(labels_, unlabelled_count());
    for (int i = 0; i < labels_; ++i)
        if (sigma[i] != i)
            throw std::invalid_argument("permutation must fix labels");
    for (auto [a, b] : edges())
        out.add_edge(sigma[a], sigma[b]);
    return out;
}

Graph LabelledGraph::as_graph() const
{
    auto e = edges();
    return Graph::from_edges(order_, e);
}

std::string LabelledGraph::to_string() const
{
    std::ostringstream os;
    os << "L" << labels_ << "/V" << order_ << "{";
    bool first = true;
    for (auto [u, v] : edges()) {
        os << (first ? "" : ",") << u << "-" << v;
        first = false;
    }
    os << "}";
    return os.str();
}

// ---------------------------------------------------------------------------
// Canonical form

std::string CanonicalCode::hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 15]);
    }
    return out;
}

CanonicalCode CanonicalCode::from_hex(const std::string& hex)
{
    if (hex.size() % 2)
        throw std::invalid_argument("odd-length code");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9')
            return c - '0';
        if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
        throw std::invalid_argument("bad hex digit in code");
    };
    CanonicalCode code;
    for (std::size_t i = 0; i < hex.size(); i += 2)
        code.bytes.push_back(static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
    return code;
}

namespace {

using Cells = std::vector<std::vector<int>>;

struct CanonSearch {
    const LabelledGraph& g;
    int n;
    std::vector<std::uint32_t> best_rows;
    std::vector<int> best_order;
    bool have_best = false;

    explicit CanonSearch(const LabelledGraph& graph) : g(graph), n(graph.order()) {}

    void refine(Cells& cells) const
    {
        std::vector<int> cell_of(n);
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t c = 0; c < cells.size(); ++c)
                for (int v : cells[c])
                    cell_of[v] = static_cast<int>(c);
            Cells next;
            next.reserve(cells.size());
            for (const auto& cell : cells) {
                if (cell.size() == 1) {
                    next.push_back(cell);
                    continue;
                }
                std::vector<std::pair<std::vector<int>, int>> sig;
                sig.reserve(cell.size());
                for (int v : cell) {
                    std::vector<int> counts(cells.size(), 0);
                    for (std::uint32_t m = g.neighbours(v); m; m &= m - 1)
                        ++counts[cell_of[std::countr_zero(m)]];
                    sig.emplace_back(std::move(counts), v);
                }
                std::sort(sig.begin(), sig.end());
                std::vector<int> current{sig[0].second};
                for (std::size_t i = 1; i < sig.size(); ++i) {
                    if (sig[i].first != sig[i - 1].first) {
                        next.push_back(std::move(current));
                        current.clear();
                        changed = true;
                    }
                    current.push_back(sig[i].second);
                }
                next.push_back(std::move(current));
            }
            cells = std::move(next);
        }
    }

    void leaf(const Cells& cells)
    {
        std::vector<int> order;
        order.reserve(n);
        for (const auto& c : cells)
            order.push_back(c[0]);
        std::vector<int> pos(n);
        for (int i = 0; i < n; ++i)
            pos[order[i]] = i;
        std::vector<std::uint32_t> rows(n, 0);
        for (int i = 0; i < n; ++i)
            for (std::uint32_t m = g.neighbours(order[i]); m; m &= m - 1) {
                const int j = pos[std::countr_zero(m)];
                if (j > i)
                    rows[i] |= 1u << j;
            }
        if (!have_best || rows < best_rows) {
            best_rows = std::move(rows);
            best_order = std::move(order);
            have_best = true;
        }
    }

    void search(Cells cells)
    {
        refine(cells);
        std::size_t target = cells.size();
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (cells[c].size() > 1) {
                target = c;
                break;
            }
        if (target == cells.size()) {
            leaf(cells);
            return;
        }
        const auto& cell = cells[target];
        std::vector<int> tried;
        for (int v : cell) {
            bool twin = false;
            for (int u : tried)
                if ((g.neighbours(u) & ~(1u << v)) == (g.neighbours(v) & ~(1u << u))) {
                    twin = true;
                    break;
                }
            if (twin)
                continue;
            tried.push_back(v);
            Cells child;
            child.reserve(cells.size() + 1);
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (c != target) {
                    child.push_back(cells[c]);
                    continue;
                }
                child.push_back({v});
                std::vector<int> rest;
                for (int u : cell)
                    if (u != v)
                        rest.push_back(u);
                child.push_back(std::move(rest));
            }
            search(std::move(child));
        }
    }
};

} // namespace

CanonicalLabelling canonical_labelling(const LabelledGraph& f)
{
    const int n = f.order();
    const int k = f.labels();
    Cells cells;
    for (int i = 0; i < k; ++i)
        cells.push_back({i});
    const std::uint32_t label_mask = k == 0 ? 0u : ((1u << k) - 1u);
    std::vector<std::pair<std::pair<std::uint32_t, int>, int>> initial;
    for (int v = k; v < n; ++v)
        initial.push_back({{f.neighbours(v) & label_mask, std::popcount(f.neighbours(v))}, v});
    std::sort(initial.begin(), initial.end());
    for (std::size_t i = 0; i < initial.size(); ++i) {
        if (i == 0 || initial[i].first != initial[i - 1].first)
            cells.emplace_back();
        cells.back().push_back(initial[i].second);
    }

    CanonSearch search(f);
    if (n == 0) {
        search.have_best = true;
    } else {
        search.search(std::move(cells));
    }

    CanonicalLabelling out;
    out.code.bytes.push_back(static_cast<char>(k));
    out.code.bytes.push_back(static_cast<char>(n));
    for (auto row : search.best_rows)
        for (int b = 0; b < 3; ++b)
            out.code.bytes.push_back(static_cast<char>((row >> (8 * b)) & 0xffu));
    out.order = std::move(search.best_order);
    return out;
}

CanonicalCode canonical_form(const LabelledGraph& f)
{
    return canonical_labelling(f).code;
}

CanonicalCode canonical_form(const Graph& g)
{
    if (g.order() > kMaxPatternVertices)
        throw PatternSizeError("canonical_form supports at most " + std::to_string(kMaxPatternVertices) + " vertices");
    return canonical_form(LabelledGraph::from_graph(g));
}

LabelledGraph canonical_representative(const LabelledGraph& f)
{
    const auto lab = canonical_labelling(f);
    std::vector<int> sigma(f.order());
    for (int i = 0; i < f.order(); ++i)
        sigma[lab.order[i]] = i;
    return f.permuted(sigma);
}

LabelledGraph from_canonical_code(const CanonicalCode& code)
{
    const auto& b = code.bytes;
    if (b.size() < 2)
        throw std::invalid_argument("truncated canonical code");
    const int k = static_cast<unsigned char>(b[0]);
    const int n = static_cast<unsigned char>(b[1]);
    if (k > n || n > kMaxPatternVertices || b.size() != 2 + 3 * static_cast<std::size_t>(n))
        throw std::invalid_argument("malformed canonical code");
    LabelledGraph f(k, n - k);
    for (int i = 0; i < n; ++i) {
        std::uint32_t row = 0;
        for (int j = 0; j < 3; ++j)
            row |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[2 + 3 * i + j])) << (8 * j);
        for (std::uint32_t m = row; m; m &= m - 1) {
            const int v = std::countr_zero(m);
            if (v <= i || v >= n)
                throw std::invalid_argument("malformed canonical code");
            f.add_edge(i, v);
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

void sort_patterns(std::vector<std::pair<CanonicalCode, LabelledGraph>>& items)
{
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        const auto ka = std::tuple(a.second.unlabelled_count(), a.second.edge_count());
        const auto kb = std::tuple(b.second.unlabelled_count(), b.second.edge_count());
        if (ka != kb)
            return ka < kb;
        return a.first < b.first;
    });
}

} // namespace

std::vector<LabelledGraph> enumerate_connected(int a)
{
    if (a > 7)
        throw PatternSizeError("enumerate_connected supports a <= 7");
    std::vector<std::pair<CanonicalCode, LabelledGraph>> all;
    if (a < 1)
        return {};
    std::vector<LabelledGraph> level{LabelledGraph(0, 1)};
    all.emplace_back(canonical_form(level[0]), level[0]);
    for (int m = 1; m < a; ++m) {
        std::map<CanonicalCode, LabelledGraph> next;
        for (const auto& h : level)
            for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
                LabelledGraph g = h;
                const int v = g.add_vertex();
                for (std::uint32_t bits = mask; bits; bits &= bits - 1)
                    g.add_edge(std::countr_zero(bits), v);
                auto lab = canonical_labelling(g);
                if (!next.contains(lab.code))
                    next.emplace(lab.code, canonical_representative(g));
            }
        level.clear();
        for (auto& [code, g] : next) {
            level.push_back(g);
            all.emplace_back(code, g);
        }
    }
    sort_patterns(all);
    std::vector<LabelledGraph> out;
    for (auto& [code, g] : all)
        out.push_back(std::move(g));
    return out;
}

std::vector<LabelledGraph> enumerate_label_connected(int labels, int t)
{
    if (labels + t > kMaxPatternVertices || t > 7)
        throw PatternSizeError("enumerate_label_connected: labels + t too large");
    std::map<CanonicalCode, LabelledGraph> found;
    for (const auto& h : enumerate_connected(t)) {
        const int m = h.order();
        const std::uint64_t choices = std::uint64_t{1} << (labels * m);
        for (std::uint64_t assign = 0; assign < choices; ++assign) {
            LabelledGraph g(labels, m);
            for (auto [u, v] : h.edges())
                g.add_edge(labels + u, labels + v);
            for (int v = 0; v < m; ++v) {
                const auto mask = static_cast<std::uint32_t>((assign >> (labels * v)) & ((1u << labels) - 1u));
                for (std::uint32_t bits = mask; bits; bits &= bits - 1)
                    g.add_edge(std::countr_zero(bits), labels + v);
            }
            auto lab = canonical_labelling(g);
            if (!found.contains(lab.code))
                found.emplace(lab.code, canonical_representative(g));
        }
    }
    std::vector<std::pair<CanonicalCode, LabelledGraph>> all(found.begin(), found.end());
    sort_patterns(all);
    std::vector<LabelledGraph> out;
    for (auto& [code, g] : all)
        out.push_back(std::move(g));
    return out;
}

// ---------------------------------------------------------------------------
// Partitions and types

Partition::Partition(std::vector<int> block_of) : block_of_(std::move(block_of))
{
    int next = 0;
    std::vector<int> rename;
    for (auto& b : block_of_) {
        if (b < 0)
            throw std::invalid_argument("negative block id");
        if (static_cast<std::size_t>(b) >= rename.size())
            rename.resize(b + 1, -1);
        if (rename[b] < 0)
            rename[b] = next++;
        b = rename[b];
    }
    blocks_ = next;
}

Partition Partition::discrete(int k)
{
    std::vector<int> ids(k);
    std::iota(ids.begin(), ids.end(), 0);
    return Partition(std::move(ids));
}

Partition Partition::of_tuple(std::span<const int> w)
{
    std::vector<int> ids(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        ids[i] = static_cast<int>(i);
        for (std::size_t j = 0; j < i; ++j)
            if (w[j] == w[i]) {
                ids[i] = ids[j];
                break;
            }
    }
    return Partition(std::move(ids));
}

std::vector<Partition> Partition::all(int k)
{
    std::vector<Partition> out;
    std::vector<int> rgs(k, 0);
    std::function<void(int, int)> rec = [&](int i, int max_block) {
        if (i == k) {
            out.emplace_back(rgs);
            return;
        }
        for (int b = 0; b <= max_block + 1; ++b) {
            rgs[i] = b;
            rec(i + 1, std::max(max_block, b));
        }
    };
    if (k == 0)
        out.emplace_back(std::vector<int>{});
    else
        rec(0, -1);
    return out;
}

int Partition::representative(int b) const
{
    for (int i = 0; i < size(); ++i)
        if (block_of_[i] == b)
            return i;
    throw std::out_of_range("no such block");
}

std::vector<std::vector<int>> Partition::blocks() const
{
    std::vector<std::vector<int>> out(blocks_);
    for (int i = 0; i < size(); ++i)
        out[block_of_[i]].push_back(i);
    return out;
}

bool Partition::extends(const Partition& coarse) const
{
    if (coarse.size() > size())
        return false;
    for (int i = 0; i < coarse.size(); ++i)
        for (int j = 0; j < i; ++j)
            if ((coarse.block(i) == coarse.block(j)) != (block(i) == block(j)))
                return false;
    return true;
}

TypeTau::TypeTau(Partition partition, std::vector<std::uint32_t> block_adjacency)
    : partition_(std::move(partition)), adjacency_(std::move(block_adjacency))
{
    const int b = partition_.block_count();
    if (static_cast<int>(adjacency_.size()) != b)
        throw std::invalid_argument("type adjacency must have one mask per block");
    for (int i = 0; i < b; ++i) {
        if ((adjacency_[i] >> i) & 1u)
            throw std::invalid_argument("type adjacency may not contain loops");
        if (b < 32 && (adjacency_[i] >> b))
            throw std::invalid_argument("type adjacency mask out of range");
        for (int j = 0; j < b; ++j)
            if (((adjacency_[i] >> j) & 1u) != ((adjacency_[j] >> i) & 1u))
                throw std::invalid_argument("type adjacency must be symmetric");
    }
}

bool TypeTau::extends(const TypeTau& base) const
{
    if (!partition_.extends(base.partition_))
        return false;
    for (int i = 0; i < base.arity(); ++i)
        for (int j = 0; j < i; ++j)
            if (!base.equal(i, j) && base.adjacent(i, j) != adjacent(i, j))
                return false;
    return true;
}

bool TypeTau::last_is_singleton() const
{
    const int k = arity();
    if (k == 0)
        return false;
    const int b = partition_.block(k - 1);
    for (int i = 0; i < k - 1; ++i)
        if (partition_.block(i) == b)
            return false;
    return true;
}

std::vector<TypeTau> TypeTau::all(int k)
{
    std::vector<TypeTau> out;
    for (const auto& p : Partition::all(k)) {
        const int b = p.block_count();
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < b; ++i)
            for (int j = i + 1; j < b; ++j)
                pairs.emplace_back(i, j);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
            std::vector<std::uint32_t> adj(b, 0);
            for (std::size_t e = 0; e < pairs.size(); ++e)
                if ((mask >> e) & 1u) {
                    adj[pairs[e].first] |= 1u << pairs[e].second;
                    adj[pairs[e].second] |= 1u << pairs[e].first;
                }
            out.emplace_back(p, std::move(adj));
        }
    }
    return out;
}

std::vector<TypeTau> TypeTau::extensions(const TypeTau& base)
{
    std::vector<TypeTau> out;
    const int b = base.block_count();
    auto ids = base.partition_.block_ids();
    for (int j = 0; j < b; ++j) {
        auto merged = ids;
        merged.push_back(j);
        out.emplace_back(Partition(std::move(merged)), base.adjacency_);
    }
    auto fresh_ids = ids;
    fresh_ids.push_back(b);
    for (std::uint32_t mask = 0; mask < (1u << b); ++mask) {
        auto adj = base.adjacency_;
        adj.push_back(mask);
        for (int j = 0; j < b; ++j)
            if ((mask >> j) & 1u)
                adj[j] |= 1u << b;
        out.emplace_back(Partition(fresh_ids), std::move(adj));
    }
    return out;
}

std::string TypeTau::key() const
{
    std::string s;
    for (int b : partition_.block_ids())
        s.push_back(static_cast<char>(b));
    s.push_back('|');
    for (auto m : adjacency_)
        for (int i = 0; i < 4; ++i)
            s.push_back(static_cast<char>((m >> (8 * i)) & 0xffu));
    return s;
}

std::string TypeTau::to_string() const
{
    std::ostringstream os;
    os << "{";
    auto blocks = partition_.blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        os << (b ? " " : "") << "[";
        for (std::size_t i = 0; i < blocks[b].size(); ++i)
            os << (i ? "," : "") << blocks[b][i];
        os << "]";
    }
    os << " E:";
    for (std::size_t i = 0; i < blocks.size(); ++i)
        for (std::size_t j = i + 1; j < blocks.size(); ++j)
            if (blocks_adjacent(static_cast<int>(i), static_cast<int>(j)))
                os << " " << i << "-" << j;
    os << "}";
    return os.str();
}

TypeTau type_of(const Graph& g, std::span<const int> w)
{
    for (int v : w)
        if (v < 0 || v >= g.order())
            throw std::invalid_argument("root vertex out of range");
    Partition p = Partition::of_tuple(w);
    const int b = p.block_count();
    std::vector<int> rep(b);
    for (int i = 0; i < b; ++i)
        rep[i] = w[p.representative(i)];
    std::vector<std::uint32_t> adj(b, 0);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j)
            if (i != j && g.adjacent(rep[i], rep[j]))
                adj[i] |= 1u << j;
    return TypeTau(std::move(p), std::move(adj));
}

LabelledGraph quotient(const LabelledGraph& f, const Partition& pi)
{
    if (pi.size() != f.labels())
        throw std::invalid_argument("partition must cover the label set");
    const int blocks = pi.block_count();
    LabelledGraph out(blocks, f.unlabelled_count());
    auto pos = [&](int v) { return v < f.labels() ? pi.block(v) : v - f.labels() + blocks; };
    for (auto [u, v] : f.edges()) {
        const int a = pos(u);
        const int b = pos(v);
        assert(!(u < f.labels() && v < f.labels()));
        if (!out.adjacent(a, b))
            out.add_edge(a, b);
    }
    return out;
}

LabelledGraph merge_labels(const LabelledGraph& f, int from, int into)
{
    if (!(into < from && from < f.labels()))
        throw std::invalid_argument("merge_labels needs into < from < labels");
    std::vector<int> ids(f.labels());
    for (int i = 0; i < f.labels(); ++i)
        ids[i] = i < from ? i : (i == from ? into : i - 1);
    return quotient(f, Partition(std::move(ids)));
}

} // namespace modlaw
