#pragma once

// End-to-end runs on two feature sets: optional top-T selection, graph
// construction, then GSSPPF, the point-matching baseline or the exhaustive
// oracle on the same node sets.

#include "gmatch/baseline.hpp"
#include "gmatch/discretize.hpp"
#include "gmatch/graph_model.hpp"
#include "gmatch/io.hpp"
#include "gmatch/metrics.hpp"
#include "gmatch/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmatch {

struct RunConfig {
    SolverConfig solver;
    Index select_top = 0;  // T; 0 disables feature selection
    Index k = 2;           // baseline candidates per query
    std::optional<double> ratio;
    bool normalize_descriptors = true;  // applied when files are parsed
    GraphOptions graph;

    void validate() const
    {
        solver.validate();
        detail::require(select_top >= 0, "select_top must be >= 0");
        detail::require(k >= 1, "k must be >= 1");
        if (ratio) detail::require(*ratio > 0.0, "ratio must be > 0");
    }
};

/// Node sets and graphs shared by every method in one run.
struct Prepared {
    FeatureSet a;
    FeatureSet b;
    std::vector<Index> kept_a;  // original indices of the retained nodes
    std::vector<Index> kept_b;
    GraphRep ga;
    GraphRep gb;
    Matrix k;
    std::string digest_a;
    std::string digest_b;
};

namespace detail {

inline std::vector<Index> iota_indices(Index n)
{
    std::vector<Index> v(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

}  // namespace detail

inline Prepared prepare(const FeatureSet& fa, const FeatureSet& fb, const RunConfig& cfg)
{
    cfg.validate();
    fa.validate();
    fb.validate();
    detail::require(fa.dim() == fb.dim(),
                    "descriptor dimension mismatch (" + std::to_string(fa.dim()) + " vs "
                        + std::to_string(fb.dim()) + ")");
    Prepared p;
    if (cfg.select_top > 0) {
        auto sel = feature_select(fa, fb, cfg.select_top);
        p.a = std::move(sel.a);
        p.b = std::move(sel.b);
        p.kept_a = std::move(sel.kept_a);
        p.kept_b = std::move(sel.kept_b);
    } else {
        p.a = fa;
        p.b = fb;
        p.kept_a = detail::iota_indices(fa.size());
        p.kept_b = detail::iota_indices(fb.size());
    }
    p.ga = build_graph(p.a, cfg.graph);
    p.gb = build_graph(p.b, cfg.graph);
    p.k = affinity(p.ga, p.gb);
    p.digest_a = digest(p.a);
    p.digest_b = digest(p.b);
    return p;
}

struct MethodRun {
    MatchReport report;
    std::string digest_a;  // node sets this method consumed
    std::string digest_b;
};

inline MethodRun run_gsspf(const Prepared& p, const RunConfig& cfg,
                           const IterateObserver& observer = {})
{
    auto solved = solve_matching(p.ga.adjacency, p.gb.adjacency, p.k, cfg.solver, observer);
    MethodRun run{matching_error(p.ga, p.gb, solved.assignment, Method::gsspf), digest(p.a),
                  digest(p.b)};
    run.report.trace = std::move(solved.trace);
    run.report.objective = assignment_objective(solved.assignment, p.ga.adjacency,
                                                p.gb.adjacency, p.k, cfg.solver.lambda);
    return run;
}

inline MethodRun run_baseline(const Prepared& p, const RunConfig& cfg)
{
    const auto cands = knn_candidates(p.a, p.b, cfg.k);
    const auto assignment = baseline_assignment(cands, cfg.ratio);
    return {matching_error(p.ga, p.gb, assignment, Method::baseline), digest(p.a), digest(p.b)};
}

inline MethodRun run_oracle(const Prepared& p, const RunConfig& cfg)
{
    const auto best = brute_force_match(p.ga.adjacency, p.gb.adjacency, p.k, cfg.solver.lambda);
    MethodRun run{matching_error(p.ga, p.gb, best.assignment, Method::oracle), digest(p.a),
                  digest(p.b)};
    run.report.objective = best.objective;
    return run;
}

struct CompareResult {
    Prepared prepared;
    MatchReport gsspf;
    MatchReport baseline;
};

/// GSSPPF and the baseline on identical node sets.
inline CompareResult run_compare(const FeatureSet& fa, const FeatureSet& fb, const RunConfig& cfg)
{
    CompareResult out{prepare(fa, fb, cfg), {}, {}};
    auto g = run_gsspf(out.prepared, cfg);
    auto b = run_baseline(out.prepared, cfg);
    if (g.digest_a != b.digest_a || g.digest_b != b.digest_b)
        throw std::logic_error("run_compare: methods consumed different node sets");
    out.gsspf = std::move(g.report);
    out.baseline = std::move(b.report);
    return out;
}

}  // namespace gmatch
