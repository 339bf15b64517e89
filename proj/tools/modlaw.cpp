#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modlaw/count.hpp"
#include "modlaw/elimination.hpp"
#include "modlaw/experiments.hpp"
#include "modlaw/logic.hpp"
#include "modlaw/polybias.hpp"

using namespace modlaw;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kGateFailure = 2;

struct Common {
    std::string json_out;
    unsigned workers = 1;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--json-out", c.json_out, "Also write the JSON result to this path");
    cmd->add_option("--workers", c.workers, "Worker threads (output does not depend on it)")->check(CLI::Range(1u, 256u));
}

int emit(const ojson& j, const Common& c, int code)
{
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!c.json_out.empty()) {
        std::ofstream out(c.json_out, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + c.json_out);
        out << text;
    }
    return code;
}

// Separators inside {...} do not split.
std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    int depth = 0;
    for (char c : s) {
        depth += (c == '{') - (c == '}');
        if (c == sep && depth == 0) {
            if (!item.empty())
                out.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty())
        out.push_back(item);
    return out;
}

std::vector<int> int_list(const std::string& s)
{
    std::vector<int> out;
    for (const auto& item : split(s, ','))
        out.push_back(std::stoi(item));
    return out;
}

/// Named shapes (K2, K3, K4, P3, P4, C4, S3) or "L<k>/V<n>{a-b,...}".
LabelledGraph pattern_from_string(const std::string& s)
{
    static const std::map<std::string, std::pair<int, std::vector<Edge>>> named{
        {"K2", {2, {{0, 1}}}},
        {"K3", {3, {{0, 1}, {0, 2}, {1, 2}}}},
        {"K4", {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}}},
        {"P3", {3, {{0, 1}, {1, 2}}}},
        {"P4", {4, {{0, 1}, {1, 2}, {2, 3}}}},
        {"C4", {4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}}},
        {"S3", {4, {{0, 1}, {0, 2}, {0, 3}}}},
    };
    if (auto it = named.find(s); it != named.end())
        return LabelledGraph::from_edges(0, it->second.first, it->second.second);
    static const std::regex form(R"(L(\d+)/V(\d+)\{([0-9,\-]*)\})");
    std::smatch m;
    if (!std::regex_match(s, m, form))
        throw std::invalid_argument("unrecognised pattern '" + s + "' (use K2, K3, P3, ... or L<k>/V<n>{a-b,...})");
    std::vector<Edge> edges;
    for (const auto& e : split(m[3].str(), ',')) {
        const auto ends = split(e, '-');
        if (ends.size() != 2)
            throw std::invalid_argument("bad edge '" + e + "' in pattern '" + s + "'");
        edges.push_back({std::stoi(ends[0]), std::stoi(ends[1])});
    }
    return LabelledGraph::from_edges(std::stoi(m[1].str()), std::stoi(m[2].str()), edges);
}

Graph read_graph(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot read graph file " + path);
    return graph_from_json(nlohmann::json::parse(in));
}

/// "v1,v2,...:a-b,c-d" (edges optional).
Anchor anchor_from_string(const std::string& s)
{
    Anchor a;
    if (s.empty())
        return a;
    const auto colon = s.find(':');
    a.vertices = int_list(s.substr(0, colon));
    if (colon != std::string::npos)
        for (const auto& e : split(s.substr(colon + 1), ',')) {
            const auto ends = split(e, '-');
            if (ends.size() != 2)
                throw std::invalid_argument("bad anchor edge '" + e + "'");
            int u = std::stoi(ends[0]), v = std::stoi(ends[1]);
            if (u > v)
                std::swap(u, v);
            a.edges.push_back({u, v});
        }
    return a;
}

ojson fraction_list(const std::vector<Fraction>& a)
{
    ojson out = ojson::array();
    for (const auto& f : a)
        out.push_back(f.to_string());
    return out;
}

ZqPolynomial read_polynomial(const std::string& poly, const std::string& gip_spec, int q, int m)
{
    if (!gip_spec.empty()) {
        const auto rd = int_list(gip_spec);
        if (rd.size() != 2)
            throw std::invalid_argument("--gip expects r,d");
        return gip(rd[0], rd[1], std::vector<int>(rd[0], 1), q);
    }
    if (m < 0)
        throw std::invalid_argument("--m is required with --poly");
    return ZqPolynomial::parse(poly, q, m);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"modlaw: subgraph frequencies mod q and FO[Mod_q] on random graphs"};
    app.require_subcommand(1);

    Common common;
    std::string formula, graph_path, roots, assign, patterns = "K3", n_list = "20,21,22,23,24,25";
    std::string base, exts, anchor, poly, gip_spec, measure = "uniform";
    int q = 2, n = 30, a = 3, k = 1, s = 2, d = 2, m = -1;
    double p = 0.5;
    std::uint64_t samples = 100000, seed = 1;
    std::optional<double> threshold;
    std::optional<int> c_cap;
    std::uint64_t enumeration_cap = std::uint64_t{1} << 20;
    bool force_mc = false;
    double sigmas = 3.0;

    auto* eval = app.add_subcommand("eval", "Evaluate a formula on a graph");
    eval->add_option("--graph", graph_path, "Graph JSON {n, edges}")->required();
    eval->add_option("--formula", formula)->required();
    eval->add_option("--assign", assign, "Free variables, e.g. x=0,y=3");

    auto* limit = app.add_subcommand("limit", "Limiting probabilities a_0..a_{q-1} of a sentence");
    limit->add_option("--formula", formula)->required();
    limit->add_option("--q", q);
    limit->add_option("--c-cap", c_cap, "Largest pattern size psi may read");
    limit->add_option("--enumeration-cap", enumeration_cap);

    auto* freq = app.add_subcommand("freq", "Frequency vector of a graph at a root tuple");
    freq->add_option("--graph", graph_path)->required();
    freq->add_option("--a", a);
    freq->add_option("--q", q);
    freq->add_option("--roots", roots, "Comma-separated root vertices");

    auto sampling = [&](CLI::App* cmd) {
        cmd->add_option("--n", n);
        cmd->add_option("--p", p);
        cmd->add_option("--q", q);
        cmd->add_option("--samples", samples);
        cmd->add_option("--seed", seed);
        cmd->add_option("--threshold", threshold, "Distance gate; exit 2 when not met");
    };
    auto* equidist = app.add_subcommand("equidist", "Joint copy counts mod q versus uniform");
    sampling(equidist);
    equidist->add_option("--patterns", patterns, "Comma-separated patterns, e.g. K3,P3");

    auto* freqdist = app.add_subcommand("freqdist", "Frequency vectors versus uniform on the feasible set");
    sampling(freqdist);
    freqdist->add_option("--a", a);

    auto* labelled = app.add_subcommand("labelled", "Rooted counts under a conditioned random graph");
    sampling(labelled);
    labelled->add_option("--k", k);
    labelled->add_option("--s", s);
    labelled->add_option("--base", base, "k-labelled patterns counted at w (semicolon-separated)");
    labelled->add_option("--ext", exts, "(k+1)-labelled patterns counted at (w,u_j) (semicolon-separated)");
    labelled->add_option("--anchor", anchor, "Anchor as v1,v2,...:a-b,c-d");

    auto* gowers = app.add_subcommand("gowers", "mu-Gowers norm of omega^Q");
    gowers->add_option("--poly", poly, "Polynomial such as Z0*Z1 + 2*Z2");
    gowers->add_option("--gip", gip_spec, "Use gip(r,d) with unit coefficients");
    gowers->add_option("--m", m, "Variable count for --poly");
    gowers->add_option("--q", q);
    gowers->add_option("--d", d);
    gowers->add_option("--measure", measure, "uniform or pbiased")->check(CLI::IsMember({"uniform", "pbiased"}));
    gowers->add_option("--p", p);
    gowers->add_option("--samples", samples);
    gowers->add_option("--seed", seed);

    auto* bias = app.add_subcommand("bias", "|E omega^Q| under p-biased bits");
    bias->add_option("--poly", poly);
    bias->add_option("--gip", gip_spec);
    bias->add_option("--m", m);
    bias->add_option("--q", q);
    bias->add_option("--p", p);
    bias->add_flag("--mc", force_mc, "Force Monte Carlo");
    bias->add_option("--samples", samples);
    bias->add_option("--seed", seed);

    auto* convergence = app.add_subcommand("convergence", "Empirical Pr[G |= phi] against the limit profile");
    convergence->add_option("--formula", formula)->required();
    convergence->add_option("--q", q);
    convergence->add_option("--p", p);
    convergence->add_option("--n-list", n_list);
    convergence->add_option("--samples", samples);
    convergence->add_option("--seed", seed);
    convergence->add_option("--sigmas", sigmas);
    convergence->add_option("--c-cap", c_cap);

    for (auto* cmd : {eval, limit, freq, equidist, freqdist, labelled, gowers, bias, convergence})
        add_common(cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        SamplingOptions so{samples, seed, common.workers, threshold};
        EliminationOptions eo;
        eo.c_cap = c_cap;
        eo.enumeration_cap = enumeration_cap;

        if (*eval) {
            const auto phi = parse(formula);
            const Graph g = read_graph(graph_path);
            Assignment env;
            for (const auto& item : split(assign, ',')) {
                const auto eq = item.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("bad assignment '" + item + "'");
                env[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
            }
            ojson j{{"formula", to_string(*phi)}, {"n", g.order()}, {"satisfied", evaluate(*phi, g, env)}};
            return emit(j, common, kPass);
        }
        if (*limit) {
            const auto phi = parse(formula);
            const auto profile = limit_probabilities(*phi, q, eo);
            ojson j{{"formula", to_string(*phi)},
                    {"q", q},
                    {"a", fraction_list(profile.a)},
                    {"c_used", profile.c_used},
                    {"support_size", profile.support_size},
                    {"feasible_set_sizes", profile.feasible_set_sizes}};
            return emit(j, common, kPass);
        }
        if (*freq) {
            const Graph g = read_graph(graph_path);
            const auto w = int_list(roots);
            const auto f = freq_vector(g, w, a, q);
            ojson j{{"type", type_of(g, w).to_string()}, {"a", a}, {"freq", f.to_json()}};
            return emit(j, common, kPass);
        }
        if (*equidist) {
            std::vector<LabelledGraph> fs;
            for (const auto& name : split(patterns, ','))
                fs.push_back(pattern_from_string(name));
            const auto r = equidist_copies(fs, n, p, q, so);
            return emit(r.to_json(), common, r.pass ? kPass : kGateFailure);
        }
        if (*freqdist) {
            const auto r = freq_distribution(n, p, q, a, so);
            return emit(r.to_json(), common, r.pass ? kPass : kGateFailure);
        }
        if (*labelled) {
            LabelledSetup setup;
            setup.k = k;
            setup.s = s;
            for (const auto& f : split(base, ';'))
                setup.base.push_back(pattern_from_string(f));
            if (exts.empty())
                exts = "L" + std::to_string(k + 1) + "/V" + std::to_string(k + 2) + "{" + std::to_string(k) + "-" +
                       std::to_string(k + 1) + "}";
            for (const auto& h : split(exts, ';'))
                setup.extensions.push_back(pattern_from_string(h));
            setup.anchor = anchor_from_string(anchor);
            const auto r = labelled_equidist(setup, n, p, q, so);
            return emit(r.to_json(), common, r.pass ? kPass : kGateFailure);
        }
        if (*gowers) {
            const auto Q = read_polynomial(poly, gip_spec, q, m);
            const int dim = Q.variables();
            const Measure mu = measure == "uniform" ? Measure::uniform(q, dim) : Measure::p_biased(q, dim, p);
            const auto f = PhaseFunction::from_polynomial(Q);
            const auto r = gowers_norm(f, mu, d, samples, seed, common.workers);
            ojson j{{"polynomial", Q.to_string()}, {"q", q}, {"d", d}, {"measure", measure}};
            if (measure == "pbiased")
                j["p"] = p;
            j["value"] = r.value;
            j["mode"] = r.exact ? "exact" : "mc";
            if (!r.exact)
                j["stderr"] = r.stderr_;
            return emit(j, common, kPass);
        }
        if (*bias) {
            const auto Q = read_polynomial(poly, gip_spec, q, m);
            ojson j{{"polynomial", Q.to_string()}, {"q", q}, {"p", p}};
            if (!force_mc && Q.variables() <= 24) {
                j["value"] = bias_exact(Q, p);
                j["mode"] = "exact";
            } else {
                const auto r = bias_mc(Q, p, samples, seed, common.workers);
                j["value"] = r.value;
                j["mode"] = "mc";
                j["stderr"] = r.stderr_;
                j["samples"] = r.samples;
            }
            return emit(j, common, kPass);
        }
        if (*convergence) {
            const auto phi = parse(formula);
            const auto r = convergence_experiment(*phi, q, p, int_list(n_list), so, eo, sigmas);
            return emit(r.to_json(), common, r.pass ? kPass : kGateFailure);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: formula: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
