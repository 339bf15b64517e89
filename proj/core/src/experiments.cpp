#include "modlaw/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "modlaw/count.hpp"
#include "modlaw/parallel.hpp"
#include "modlaw/rng.hpp"

namespace modlaw {

namespace {

constexpr std::uint64_t kChunk = 1024;

const char* const kCalibrationNote =
    "distance gates are calibration choices sized to Monte Carlo error at the given sample count; "
    "the asymptotic closeness bounds have unspecified constants";

/// Samples draw(i) for i < samples over derived seeds and tallies them.
template <typename Draw>
EmpiricalDistribution tally(int q, int length, const SamplingOptions& options, Draw&& draw)
{
    if (options.samples == 0)
        throw std::invalid_argument("need at least one sample");
    const std::uint64_t chunks = (options.samples + kChunk - 1) / kChunk;
    std::vector<EmpiricalDistribution> parts(chunks);
    parallel_for(chunks, options.workers, [&](std::size_t c) {
        EmpiricalDistribution part;
        part.q = q;
        part.length = length;
        const std::uint64_t end = std::min(options.samples, (c + 1) * kChunk);
        for (std::uint64_t i = c * kChunk; i < end; ++i)
            part.add(draw(derive_seed(options.seed, i)));
        parts[c] = std::move(part);
    });
    EmpiricalDistribution out;
    out.q = q;
    out.length = length;
    out.seed = options.seed;
    for (const auto& part : parts)
        out.merge(part);
    return out;
}

ExperimentReport make_report(std::string kind, nlohmann::ordered_json parameters, EmpiricalDistribution dist,
                             std::vector<std::vector<int>> reference, std::optional<double> threshold)
{
    ExperimentReport r;
    r.kind = std::move(kind);
    r.parameters = std::move(parameters);
    r.distance = statistical_distance(dist, reference);
    const double expected = static_cast<double>(dist.total) / static_cast<double>(reference.size());
    for (const auto& x : reference) {
        auto it = dist.counts.find(x);
        const double observed = it == dist.counts.end() ? 0.0 : static_cast<double>(it->second);
        const double chi = (observed - expected) * (observed - expected) / expected;
        r.chi_square.push_back(chi);
        r.chi_square_total += chi;
    }
    r.distribution = std::move(dist);
    r.reference = std::move(reference);
    r.threshold = threshold;
    r.pass = !threshold || r.distance < *threshold;
    return r;
}

enum class Small { None, K2, P3, K3 };

Small classify(const LabelledGraph& f)
{
    static const CanonicalCode k2 = canonical_form(LabelledGraph::from_edges(0, 2, std::vector<Edge>{{0, 1}}));
    static const CanonicalCode p3 = canonical_form(LabelledGraph::from_edges(0, 3, std::vector<Edge>{{0, 1}, {1, 2}}));
    static const CanonicalCode k3 =
        canonical_form(LabelledGraph::from_edges(0, 3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}}));
    if (f.labels() != 0)
        return Small::None;
    const auto code = canonical_form(f);
    if (code == k2)
        return Small::K2;
    if (code == p3)
        return Small::P3;
    if (code == k3)
        return Small::K3;
    return Small::None;
}

void require_unlabelled(const LabelledGraph& f)
{
    if (f.labels() != 0)
        throw std::invalid_argument("expected an unlabelled pattern, got " + f.to_string());
}

} // namespace

// ---------------------------------------------------------------------------
// Distributions

void EmpiricalDistribution::add(const std::vector<int>& x, std::uint64_t times)
{
    if (static_cast<int>(x.size()) != length)
        throw std::invalid_argument("observation has the wrong length");
    counts[x] += times;
    total += times;
}

void EmpiricalDistribution::merge(const EmpiricalDistribution& other)
{
    for (const auto& [x, c] : other.counts)
        add(x, c);
}

double EmpiricalDistribution::frequency(const std::vector<int>& x) const
{
    if (total == 0)
        return 0.0;
    auto it = counts.find(x);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

double statistical_distance(const EmpiricalDistribution& e, const std::vector<std::vector<int>>& reference)
{
    if (reference.empty())
        throw std::invalid_argument("reference set is empty");
    std::map<std::vector<int>, double> ref;
    for (const auto& x : reference)
        ref[x] = 1.0 / static_cast<double>(reference.size());
    if (ref.size() != reference.size())
        throw std::invalid_argument("reference set has repeated points");
    double sum = 0.0;
    for (const auto& [x, r] : ref)
        sum += std::abs(e.frequency(x) - r);
    for (const auto& [x, c] : e.counts)
        if (!ref.contains(x))
            sum += e.frequency(x);
    return sum / 2.0;
}

double statistical_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b)
{
    double sum = 0.0;
    for (const auto& [x, c] : a.counts)
        sum += std::abs(a.frequency(x) - b.frequency(x));
    for (const auto& [x, c] : b.counts)
        if (!a.counts.contains(x))
            sum += b.frequency(x);
    return sum / 2.0;
}

std::vector<std::vector<int>> full_space(int q, int length)
{
    std::size_t size = 1;
    for (int i = 0; i < length; ++i) {
        size *= static_cast<std::size_t>(q);
        if (size > (std::size_t{1} << 24))
            throw std::length_error("Z_q^l too large to enumerate");
    }
    std::vector<std::vector<int>> out;
    out.reserve(size);
    for (std::size_t x = 0; x < size; ++x)
        out.push_back(decode_point(x, q, length));
    return out;
}

nlohmann::ordered_json ExperimentReport::to_json() const
{
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["parameters"] = parameters;
    j["samples"] = distribution.total;
    j["seed"] = distribution.seed;
    j["reference_size"] = reference.size();
    j["distance"] = distance;
    j["chi_square_total"] = chi_square_total;
    j["degrees_of_freedom"] = reference.size() - 1;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    const double expected = static_cast<double>(distribution.total) / static_cast<double>(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        auto it = distribution.counts.find(reference[i]);
        cells.push_back({{"x", reference[i]},
                         {"count", it == distribution.counts.end() ? 0 : it->second},
                         {"expected", expected},
                         {"chi_square", chi_square[i]}});
    }
    j["cells"] = cells;
    nlohmann::ordered_json outside = nlohmann::ordered_json::array();
    for (const auto& [x, c] : distribution.counts)
        if (std::find(reference.begin(), reference.end(), x) == reference.end())
            outside.push_back({{"x", x}, {"count", c}});
    j["outside_reference"] = outside;
    if (threshold)
        j["threshold"] = *threshold;
    else
        j["threshold"] = nullptr;
    j["pass"] = pass;
    j["note"] = kCalibrationNote;
    return j;
}

// ---------------------------------------------------------------------------
// Counting

std::uint64_t count_copies_fast(const LabelledGraph& f, const Graph& g)
{
    require_unlabelled(f);
    const int n = g.order();
    switch (classify(f)) {
    case Small::K2:
        return g.edge_count();
    case Small::P3: {
        std::uint64_t total = 0;
        for (int v = 0; v < n; ++v) {
            const std::uint64_t d = static_cast<std::uint64_t>(g.degree(v));
            total += d * (d - (d > 0 ? 1 : 0)) / 2;
        }
        return total;
    }
    case Small::K3: {
        std::uint64_t total = 0;
        for (int u = 0; u < n; ++u) {
            const auto ru = g.row(u);
            for (int v = u + 1; v < n; ++v) {
                if (!g.adjacent(u, v))
                    continue;
                const auto rv = g.row(v);
                for (std::size_t w = 0; w < ru.size(); ++w)
                    total += static_cast<std::uint64_t>(std::popcount(ru[w] & rv[w]));
            }
        }
        return total / 3;
    }
    case Small::None:
        break;
    }
    return count_copies(f, g, {});
}

std::uint64_t count_inj_fast(const LabelledGraph& f, const Graph& g)
{
    require_unlabelled(f);
    if (f.order() == 1)
        return static_cast<std::uint64_t>(g.order());
    if (classify(f) == Small::None)
        return count_inj(f, g, {});
    return count_copies_fast(f, g) * count_aut(f);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

nlohmann::ordered_json pattern_list(const std::vector<LabelledGraph>& patterns)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& f : patterns)
        out.push_back(f.to_string());
    return out;
}

} // namespace

ExperimentReport equidist_copies(const std::vector<LabelledGraph>& patterns, int n, double p, int q,
                                 const SamplingOptions& options)
{
    if (patterns.empty())
        throw std::invalid_argument("need at least one pattern");
    std::vector<CanonicalCode> seen;
    for (const auto& f : patterns) {
        require_unlabelled(f);
        if (f.edge_count() == 0)
            throw std::invalid_argument("pattern " + f.to_string() +
                                        " has no edges; its copy count is not random (K1 is rejected)");
        if (!f.is_label_connected())
            throw std::invalid_argument("pattern " + f.to_string() + " is not connected");
        const auto code = canonical_form(f);
        if (std::find(seen.begin(), seen.end(), code) != seen.end())
            throw std::invalid_argument("patterns must be distinct");
        seen.push_back(code);
    }
    const int length = static_cast<int>(patterns.size());
    auto dist = tally(q, length, options, [&](std::uint64_t seed) {
        const Graph g = sample_gnp(n, p, seed);
        std::vector<int> x(length);
        for (int i = 0; i < length; ++i)
            x[i] = static_cast<int>(count_copies_fast(patterns[i], g) % static_cast<std::uint64_t>(q));
        return x;
    });
    nlohmann::ordered_json params{{"patterns", pattern_list(patterns)}, {"n", n}, {"p", p}, {"q", q}};
    return make_report("equidist", std::move(params), std::move(dist), full_space(q, length), options.threshold);
}

ExperimentReport freq_distribution(int n, double p, int q, int a, const SamplingOptions& options)
{
    const auto basis = PatternBasis::conn(0, a);
    const auto feasible = enumerate_feasible(TypeTau::all(0).front(), a, q, n % q);
    std::vector<std::vector<int>> reference;
    for (const auto& f : feasible.members())
        reference.push_back(f.residues);
    const int length = static_cast<int>(basis->size());
    auto dist = tally(q, length, options, [&](std::uint64_t seed) {
        const Graph g = sample_gnp(n, p, seed);
        std::vector<int> x(length);
        for (int i = 0; i < length; ++i)
            x[i] = static_cast<int>(count_inj_fast(basis->pattern(i), g) % static_cast<std::uint64_t>(q));
        return x;
    });
    nlohmann::ordered_json params{{"n", n}, {"p", p}, {"q", q}, {"a", a}, {"coordinates", pattern_list(basis->patterns())}};
    return make_report("freqdist", std::move(params), std::move(dist), std::move(reference), options.threshold);
}

ExperimentReport labelled_equidist(const LabelledSetup& setup, int n, double p, int q, const SamplingOptions& options)
{
    const int k = setup.k, s = setup.s;
    if (k < 0 || s < 0 || k + s > n)
        throw std::invalid_argument("need 0 <= k, 0 <= s and k + s <= n");
    for (const auto& f : setup.base)
        if (f.labels() != k || !f.is_label_connected())
            throw std::invalid_argument("base pattern " + f.to_string() + " must be k-labelled and label-connected");
    for (const auto& h : setup.extensions)
        if (h.labels() != k + 1 || !h.depends_on_label(k))
            throw std::invalid_argument("extension pattern " + h.to_string() +
                                        " must be (k+1)-labelled and depend on its last label");
    if (2 * static_cast<int>(setup.anchor.vertices.size()) > n)
        throw std::invalid_argument("anchor must cover at most half of the vertices");
    const int length = static_cast<int>(setup.base.size() + s * setup.extensions.size());
    if (length == 0)
        throw std::invalid_argument("no statistics requested");
    auto dist = tally(q, length, options, [&](std::uint64_t seed) {
        const Graph g = sample_conditioned(n, p, setup.anchor, seed);
        std::vector<int> x;
        x.reserve(length);
        std::vector<int> roots(k);
        for (int i = 0; i < k; ++i)
            roots[i] = i;
        for (const auto& f : setup.base)
            x.push_back(static_cast<int>(count_copies(f, g, roots) % static_cast<std::uint64_t>(q)));
        roots.push_back(0);
        for (int j = 0; j < s; ++j) {
            roots[k] = k + j;
            for (const auto& h : setup.extensions)
                x.push_back(static_cast<int>(count_copies(h, g, roots) % static_cast<std::uint64_t>(q)));
        }
        return x;
    });
    nlohmann::ordered_json anchor_edges = nlohmann::ordered_json::array();
    for (auto [u, v] : setup.anchor.edges)
        anchor_edges.push_back({u, v});
    nlohmann::ordered_json params{{"k", k},
                                  {"s", s},
                                  {"base", pattern_list(setup.base)},
                                  {"extensions", pattern_list(setup.extensions)},
                                  {"anchor", {{"vertices", setup.anchor.vertices}, {"edges", anchor_edges}}},
                                  {"n", n},
                                  {"p", p},
                                  {"q", q}};
    return make_report("labelled", std::move(params), std::move(dist), full_space(q, length), options.threshold);
}

// ---------------------------------------------------------------------------
// Convergence

nlohmann::ordered_json ConvergenceReport::to_json() const
{
    nlohmann::ordered_json j;
    j["kind"] = "convergence";
    j["formula"] = formula;
    j["q"] = q;
    j["p"] = p;
    j["samples"] = samples;
    j["seed"] = seed;
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& f : profile.a)
        a.push_back(f.to_string());
    j["profile"] = a;
    j["c_used"] = profile.c_used;
    j["sigmas"] = sigmas;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        table.push_back({{"n", r.n},
                         {"satisfied", r.satisfied},
                         {"empirical", r.empirical},
                         {"limit", r.limit.to_string()},
                         {"difference", r.difference},
                         {"sigma", r.sigma},
                         {"within", r.within}});
    j["rows"] = table;
    j["pass"] = pass;
    return j;
}

ConvergenceReport convergence_experiment(const Formula& phi, int q, double p, const std::vector<int>& n_list,
                                         const SamplingOptions& options, const EliminationOptions& elimination,
                                         double sigmas)
{
    if (options.samples == 0)
        throw std::invalid_argument("need at least one sample");
    ConvergenceReport report;
    report.formula = to_string(phi);
    report.q = q;
    report.p = p;
    report.samples = options.samples;
    report.seed = options.seed;
    report.sigmas = sigmas;
    report.profile = limit_probabilities(phi, q, elimination);
    for (int n : n_list) {
        if (n < 1)
            throw std::invalid_argument("n must be positive");
        const std::uint64_t chunks = (options.samples + kChunk - 1) / kChunk;
        std::vector<std::uint64_t> hits(chunks, 0);
        const std::uint64_t base = derive_seed(options.seed, static_cast<std::uint64_t>(n));
        parallel_for(chunks, options.workers, [&](std::size_t c) {
            const std::uint64_t end = std::min(options.samples, (c + 1) * kChunk);
            for (std::uint64_t i = c * kChunk; i < end; ++i)
                if (evaluate(phi, sample_gnp(n, p, derive_seed(base, i))))
                    ++hits[c];
        });
        ConvergenceRow row;
        row.n = n;
        for (auto h : hits)
            row.satisfied += h;
        row.empirical = static_cast<double>(row.satisfied) / static_cast<double>(options.samples);
        row.limit = report.profile.a[static_cast<std::size_t>(n % q)];
        const double a = row.limit.to_double();
        row.difference = row.empirical - a;
        row.sigma = std::sqrt(a * (1.0 - a) / static_cast<double>(options.samples));
        row.within = std::abs(row.difference) <= sigmas * row.sigma + 1e-12;
        report.pass = report.pass && row.within;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace modlaw
