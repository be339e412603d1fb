#pragma once

// Local-feature point matching: exact k-nearest-neighbour descriptor search
// followed by a greedy one-to-one selection. Ignores graph structure.

#include "gmatch/discretize.hpp"
#include "gmatch/graph_model.hpp"

#include <algorithm>
#include <optional>
#include <tuple>
#include <vector>

namespace gmatch {

struct Candidate {
    Index index = 0;
    double distance = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Per query feature, up to k candidates ascending by descriptor distance.
struct CandidateSet {
    Index n_query = 0;
    Index n_target = 0;
    std::vector<std::vector<Candidate>> per_query;
};

inline CandidateSet knn_candidates(const FeatureSet& queries, const FeatureSet& targets, Index k)
{
    detail::require(k >= 1, "knn_candidates: k must be >= 1");
    detail::require(queries.dim() == targets.dim(),
                    "knn_candidates: descriptor dimension mismatch (" + std::to_string(queries.dim())
                        + " vs " + std::to_string(targets.dim()) + ")");
    const Index nq = queries.size();
    const Index nt = targets.size();
    const Index keep = std::min(k, nt);

    CandidateSet cs{nq, nt, {}};
    cs.per_query.resize(static_cast<std::size_t>(nq));
    std::vector<Candidate> all(static_cast<std::size_t>(nt));
    for (Index i = 0; i < nq; ++i) {
        for (Index j = 0; j < nt; ++j) {
            all[static_cast<std::size_t>(j)] = {
                j, (queries.descriptors.row(i) - targets.descriptors.row(j)).norm()};
        }
        auto closer = [](const Candidate& l, const Candidate& r) {
            return std::tie(l.distance, l.index) < std::tie(r.distance, r.index);
        };
        std::partial_sort(all.begin(), all.begin() + keep, all.end(), closer);
        cs.per_query[static_cast<std::size_t>(i)].assign(all.begin(), all.begin() + keep);
    }
    return cs;
}

/// Greedy one-to-one selection from the candidate lists in ascending
/// distance order (ties: lower query, then lower target). With `ratio`,
/// queries whose best/second-best distance ratio is not below it are dropped
/// first; queries with a single candidate always pass.
inline Assignment baseline_assignment(const CandidateSet& cs, std::optional<double> ratio = {})
{
    struct Edge {
        double distance;
        Index query;
        Index target;
    };
    std::vector<Edge> edges;
    for (Index i = 0; i < cs.n_query; ++i) {
        const auto& list = cs.per_query[static_cast<std::size_t>(i)];
        if (list.empty()) continue;
        if (ratio && list.size() >= 2 && !(list[0].distance < *ratio * list[1].distance)) continue;
        for (const auto& c : list) edges.push_back({c.distance, i, c.index});
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
        return std::tie(l.distance, l.query, l.target) < std::tie(r.distance, r.query, r.target);
    });

    Assignment a{cs.n_query, cs.n_target, {}};
    std::vector<char> used_q(static_cast<std::size_t>(cs.n_query), 0);
    std::vector<char> used_t(static_cast<std::size_t>(cs.n_target), 0);
    for (const auto& e : edges) {
        auto& uq = used_q[static_cast<std::size_t>(e.query)];
        auto& ut = used_t[static_cast<std::size_t>(e.target)];
        if (uq || ut) continue;
        uq = ut = 1;
        a.pairs.emplace_back(e.query, e.target);
    }
    std::sort(a.pairs.begin(), a.pairs.end());
    return a;
}

}  // namespace gmatch
