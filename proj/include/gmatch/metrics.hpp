#pragma once

#include "gmatch/discretize.hpp"
#include "gmatch/graph_model.hpp"
#include "gmatch/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gmatch {

enum class Method { gsspf, baseline, oracle };

inline const char* to_string(Method m)
{
    switch (m) {
    case Method::gsspf: return "gsspf";
    case Method::baseline: return "baseline";
    case Method::oracle: return "oracle";
    }
    return "unknown";
}

/// Matching error ||A1 - M A2 M^T||_F + ||F1 - M F2||_F of one assignment,
/// split into its edge (pixel) and node (descriptor) parts.
struct MatchReport {
    Method method = Method::gsspf;
    Assignment assignment;
    double edge_error = 0.0;
    double node_error = 0.0;
    double total_error = 0.0;
    std::optional<SolveTrace> trace;
    std::optional<double> objective;
};

namespace detail {

struct Residuals {
    double edge_sq = 0.0;
    double node_sq = 0.0;
};

// Residuals restricted to the matched nodes; unmatched nodes contribute
// nothing.
inline Residuals residuals(const GraphRep& g1, const GraphRep& g2, const Assignment& m)
{
    require(m.n1 == g1.size() && m.n2 == g2.size(),
            "matching_error: assignment is " + std::to_string(m.n1) + "x" + std::to_string(m.n2)
                + " but graphs have " + std::to_string(g1.size()) + " and "
                + std::to_string(g2.size()) + " nodes");
    require(g1.features.cols() == g2.features.cols(),
            "matching_error: descriptor dimension mismatch");
    m.validate();

    Residuals r;
    for (const auto& [i, j] : m.pairs) {
        for (const auto& [p, q] : m.pairs) {
            const double d = g1.adjacency(i, p) - g2.adjacency(j, q);
            r.edge_sq += d * d;
        }
        r.node_sq += (g1.features.row(i) - g2.features.row(j)).squaredNorm();
    }
    return r;
}

}  // namespace detail

inline MatchReport matching_error(const GraphRep& g1, const GraphRep& g2, const Assignment& m,
                                  Method method = Method::gsspf)
{
    const auto r = detail::residuals(g1, g2, m);
    MatchReport rep;
    rep.method = method;
    rep.assignment = m;
    rep.edge_error = std::sqrt(r.edge_sq);
    rep.node_error = std::sqrt(r.node_sq);
    rep.total_error = rep.edge_error + rep.node_error;
    return rep;
}

/// 1/4 ||A1 - M A2 M^T||_F^2 + lambda ||F1 - M F2||_F^2.
///
/// Over permutations this equals const - f(M) with f's node weight 2*lambda,
/// so pass lambda/2 here to rank permutations exactly opposite to
/// objective(..., lambda).
inline double discrepancy(const GraphRep& g1, const GraphRep& g2, const Assignment& m,
                          double lambda)
{
    const auto r = detail::residuals(g1, g2, m);
    return 0.25 * r.edge_sq + lambda * r.node_sq;
}

}  // namespace gmatch
