#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modlaw/elimination.hpp"
#include "modlaw/graph.hpp"
#include "modlaw/pattern.hpp"

namespace modlaw {

/// Counts of observed vectors over Z_q^length.
struct EmpiricalDistribution {
    int q = 2;
    int length = 0;
    std::map<std::vector<int>, std::uint64_t> counts;
    std::uint64_t total = 0;
    std::uint64_t seed = 0;

    void add(const std::vector<int>& x, std::uint64_t times = 1);
    void merge(const EmpiricalDistribution& other);
    double frequency(const std::vector<int>& x) const;
};

/// Half the L1 distance to the uniform distribution on `reference`.
double statistical_distance(const EmpiricalDistribution& e, const std::vector<std::vector<int>>& reference);
/// Half the L1 distance between two empirical distributions.
double statistical_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// All of Z_q^length in encode_point order.
std::vector<std::vector<int>> full_space(int q, int length);

struct SamplingOptions {
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Distance gate; no gate when empty.
    std::optional<double> threshold;
};

struct ExperimentReport {
    std::string kind;
    nlohmann::ordered_json parameters;
    EmpiricalDistribution distribution;
    std::vector<std::vector<int>> reference;
    double distance = 0.0;
    /// (observed - expected)^2 / expected per reference cell.
    std::vector<double> chi_square;
    double chi_square_total = 0.0;
    std::optional<double> threshold;
    bool pass = true;

    nlohmann::ordered_json to_json() const;
};

/// <F> in g for an unlabelled pattern, with bitset loops for K2, P3 and K3.
std::uint64_t count_copies_fast(const LabelledGraph& f, const Graph& g);
/// [F] in g for an unlabelled pattern (copies times aut).
std::uint64_t count_inj_fast(const LabelledGraph& f, const Graph& g);

/// Joint law of (<F_1>, ..., <F_l>) mod q over G(n, p) against uniform on
/// Z_q^l. Patterns must be unlabelled, connected and have an edge.
ExperimentReport equidist_copies(const std::vector<LabelledGraph>& patterns, int n, double p, int q,
                                 const SamplingOptions& options);

/// freq_G(empty root, a) mod q over G(n, p) against uniform on the feasible set.
ExperimentReport freq_distribution(int n, double p, int q, int a, const SamplingOptions& options);

struct LabelledSetup {
    /// Roots w are vertices 0..k-1; extra roots u_1..u_s are k..k+s-1.
    int k = 1;
    int s = 1;
    /// k-labelled label-connected patterns F_i, counted at w.
    std::vector<LabelledGraph> base;
    /// (k+1)-labelled patterns H dependent on label k, counted at (w, u_j).
    std::vector<LabelledGraph> extensions;
    /// Fixed subgraph on anchor vertices; may cover any of the roots.
    Anchor anchor;
};

/// Joint law of (<F_i>(G,w), <H_i'>(G,w,u_j)) mod q over G(n, p | anchor)
/// against uniform on Z_q^(l + s l').
ExperimentReport labelled_equidist(const LabelledSetup& setup, int n, double p, int q, const SamplingOptions& options);

struct ConvergenceRow {
    int n = 0;
    std::uint64_t satisfied = 0;
    double empirical = 0.0;
    Fraction limit;
    double difference = 0.0;
    double sigma = 0.0;
    bool within = true;
};

struct ConvergenceReport {
    std::string formula;
    int q = 2;
    double p = 0.5;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    LimitProfile profile;
    std::vector<ConvergenceRow> rows;
    double sigmas = 3.0;
    bool pass = true;

    nlohmann::ordered_json to_json() const;
};

/// Empirical Pr[G |= phi] for each n against a_{n mod q}; a row passes when
/// |difference| <= sigmas * sqrt(a (1 - a) / samples).
ConvergenceReport convergence_experiment(const Formula& phi, int q, double p, const std::vector<int>& n_list,
                                         const SamplingOptions& options, const EliminationOptions& elimination = {},
                                         double sigmas = 3.0);

} // namespace modlaw
