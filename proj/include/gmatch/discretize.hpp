#pragma once

// Hard assignments: Hungarian discretization of a relaxed match matrix and
// an exhaustive enumeration oracle for small problems.

#include "gmatch/common.hpp"
#include "gmatch/objective.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace gmatch {

/// One-to-one correspondence between nodes of graph 1 (first) and graph 2
/// (second). Pairs are kept sorted by the graph-1 index. Solver output is
/// complete (min(n1, n2) pairs); the point-matching baseline may be partial.
struct Assignment {
    Index n1 = 0;
    Index n2 = 0;
    std::vector<std::pair<Index, Index>> pairs;

    std::size_t size() const { return pairs.size(); }
    bool complete() const { return static_cast<Index>(pairs.size()) == std::min(n1, n2); }

    void validate() const
    {
        std::vector<char> used1(static_cast<std::size_t>(n1), 0);
        std::vector<char> used2(static_cast<std::size_t>(n2), 0);
        for (const auto& [i, j] : pairs) {
            detail::require(i >= 0 && i < n1 && j >= 0 && j < n2,
                            "assignment pair (" + std::to_string(i) + ", " + std::to_string(j)
                                + ") out of range for " + std::to_string(n1) + "x"
                                + std::to_string(n2));
            detail::require(!used1[static_cast<std::size_t>(i)] && !used2[static_cast<std::size_t>(j)],
                            "assignment is not injective at (" + std::to_string(i) + ", "
                                + std::to_string(j) + ")");
            used1[static_cast<std::size_t>(i)] = 1;
            used2[static_cast<std::size_t>(j)] = 1;
        }
    }

    Matrix to_matrix() const
    {
        Matrix m = Matrix::Zero(n1, n2);
        for (const auto& [i, j] : pairs) m(i, j) = 1.0;
        return m;
    }

    /// Same correspondence with the roles of the two graphs exchanged.
    Assignment transposed() const
    {
        Assignment t{n2, n1, {}};
        t.pairs.reserve(pairs.size());
        for (const auto& [i, j] : pairs) t.pairs.emplace_back(j, i);
        std::sort(t.pairs.begin(), t.pairs.end());
        return t;
    }

    static Assignment from_permutation(const std::vector<Index>& perm, Index n2)
    {
        Assignment a{static_cast<Index>(perm.size()), n2, {}};
        for (std::size_t i = 0; i < perm.size(); ++i)
            a.pairs.emplace_back(static_cast<Index>(i), perm[i]);
        return a;
    }

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Sum of the selected entries, accumulated in pair order.
inline double assignment_value(const Matrix& scores, const Assignment& a)
{
    double v = 0.0;
    for (const auto& [i, j] : a.pairs) v += scores(i, j);
    return v;
}

/// Maximum-weight assignment on an n1 x n2 score matrix (Kuhn-Munkres with
/// row/column potentials, O(n^3)). Rectangular inputs are squared by padding
/// with a value below every real score; padded pairs are dropped. Rows are
/// inserted in increasing order and column scans keep the first strict
/// minimum, so ties resolve toward lower indices and the result is
/// deterministic.
inline Assignment hungarian(const Matrix& scores)
{
    detail::require(scores.rows() > 0 && scores.cols() > 0, "hungarian: empty score matrix");
    detail::require(detail::all_finite(scores), "hungarian: score matrix has non-finite entries");

    const Index n1 = scores.rows();
    const Index n2 = scores.cols();
    const Index n = std::max(n1, n2);
    const double pad = scores.minCoeff() - 1.0;
    auto cost = [&](Index i, Index j) {
        return (i < n1 && j < n2) ? -scores(i, j) : -pad;
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto sz = static_cast<std::size_t>(n + 1);
    // 1-based; column 0 is a virtual source.
    std::vector<double> u(sz, 0.0), v(sz, 0.0), minv(sz);
    std::vector<Index> match_col(sz, 0), way(sz, 0);
    std::vector<char> used(sz);

    for (Index row = 1; row <= n; ++row) {
        match_col[0] = row;
        Index j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = match_col[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[ju];
                if (cur < minv[ju]) {
                    minv[ju] = cur;
                    way[ju] = j0;
                }
                if (minv[ju] < delta) {
                    delta = minv[ju];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) {
                    u[static_cast<std::size_t>(match_col[ju])] += delta;
                    v[ju] -= delta;
                } else {
                    minv[ju] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            match_col[static_cast<std::size_t>(j0)] = match_col[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment a{n1, n2, {}};
    for (Index j = 1; j <= n; ++j) {
        const Index i = match_col[static_cast<std::size_t>(j)] - 1;
        if (i < n1 && j - 1 < n2) a.pairs.emplace_back(i, j - 1);
    }
    std::sort(a.pairs.begin(), a.pairs.end());
    return a;
}

/// Objective of a hard assignment, evaluated pairwise without forming M.
inline double assignment_objective(const Assignment& a, const Matrix& a1, const Matrix& a2,
                                   const Matrix& k, double lambda)
{
    double quad = 0.0;
    double lin = 0.0;
    for (const auto& [i, j] : a.pairs) {
        for (const auto& [p, q] : a.pairs) quad += a1(i, p) * a2(q, j);
        lin += k(i, j);
    }
    return 0.5 * quad + lambda * lin;
}

struct OracleResult {
    Assignment assignment;
    double objective = 0.0;
    std::size_t evaluated = 0;
};

inline constexpr Index kBruteForceMaxNodes = 8;
inline constexpr std::size_t kBruteForceMaxCandidates = 20'000'000;

/// Exhaustive maximizer of the objective over all complete assignments
/// (injections of the smaller graph into the larger one). First maximum in
/// lexicographic enumeration order wins.
inline OracleResult brute_force_match(const Matrix& a1, const Matrix& a2, const Matrix& k,
                                      double lambda)
{
    detail::check_problem(k, a1, a2, k, "brute_force_match");
    const Index n1 = a1.rows();
    const Index n2 = a2.rows();
    const Index small = std::min(n1, n2);
    const Index large = std::max(n1, n2);
    detail::require(small >= 1, "brute_force_match: empty graph");
    detail::require(small <= kBruteForceMaxNodes,
                    "brute_force_match: " + std::to_string(small) + " nodes exceeds enumeration cap "
                        + std::to_string(kBruteForceMaxNodes));
    double count = 1.0;
    for (Index t = 0; t < small; ++t) count *= static_cast<double>(large - t);
    detail::require(count <= static_cast<double>(kBruteForceMaxCandidates),
                    "brute_force_match: " + std::to_string(static_cast<long long>(count))
                        + " candidate assignments exceeds enumeration cap");

    const bool rows_small = n1 <= n2;
    OracleResult best;
    best.objective = -std::numeric_limits<double>::infinity();

    // image[t] is the large-side node assigned to small-side node t.
    std::vector<Index> image(static_cast<std::size_t>(small));
    std::vector<char> taken(static_cast<std::size_t>(large), 0);
    Assignment cand{n1, n2, {}};
    cand.pairs.resize(static_cast<std::size_t>(small));

    auto evaluate = [&] {
        for (Index t = 0; t < small; ++t) {
            const Index o = image[static_cast<std::size_t>(t)];
            cand.pairs[static_cast<std::size_t>(t)] = rows_small ? std::pair{t, o} : std::pair{o, t};
        }
        const double f = assignment_objective(cand, a1, a2, k, lambda);
        ++best.evaluated;
        if (f > best.objective) {
            best.objective = f;
            best.assignment = cand;
        }
    };

    auto recurse = [&](auto&& self, Index depth) -> void {
        if (depth == small) {
            evaluate();
            return;
        }
        for (Index o = 0; o < large; ++o) {
            if (taken[static_cast<std::size_t>(o)]) continue;
            taken[static_cast<std::size_t>(o)] = 1;
            image[static_cast<std::size_t>(depth)] = o;
            self(self, depth + 1);
            taken[static_cast<std::size_t>(o)] = 0;
        }
    };
    recurse(recurse, 0);

    std::sort(best.assignment.pairs.begin(), best.assignment.pairs.end());
    return best;
}

}  // namespace gmatch
