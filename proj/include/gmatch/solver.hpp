#pragma once

// Graduated Softmax-Sinkhorn Projected Fixed-Point matching.
//
// The relaxed iterate lives on the Birkhoff polytope of size n1 x n1 (the
// slack matrix); its leading n1 x n2 block is the match matrix N. Each
// inner iteration is
//
//     S <- (1 - alpha) S + alpha * Sinkhorn(exp(beta * [grad f(N) | 0]))
//
// and the outer loop multiplies beta by beta_r until it reaches beta_m,
// carrying S over between stages. The final N is discretized with the
// Hungarian method.

#include "gmatch/common.hpp"
#include "gmatch/discretize.hpp"
#include "gmatch/objective.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace gmatch {

struct SolverConfig {
    double alpha = 0.5;    // fixed-point step fraction, (0, 1]
    double lambda = 1.0;   // weight of the node-affinity term
    double beta0 = 1e-6;   // initial softmax sharpness
    double beta_r = 1.2;   // sharpness growth per stage
    double beta_m = 5e-6;  // stages run while beta < beta_m
    double eps1 = 1e-4;    // inner loop: max |N_{t+1} - N_t|
    double eps2 = 1e-6;    // Sinkhorn: ||S_{t+1} - S_t||_F
    int max_iters = 30;    // inner iterations per stage
    int sinkhorn_max_iters = 1000;

    /// Settings for large inputs (hundreds of keypoints on full-size photos).
    static SolverConfig large() { return {}; }

    /// Settings for small crops: ten times sharper.
    static SolverConfig small()
    {
        SolverConfig c;
        c.beta0 = 1e-5;
        c.beta_m = 5e-5;
        return c;
    }

    void validate() const
    {
        detail::require(alpha > 0.0 && alpha <= 1.0, "solver: alpha must lie in (0, 1]");
        detail::require(lambda >= 0.0 && std::isfinite(lambda), "solver: lambda must be >= 0");
        detail::require(beta0 > 0.0 && std::isfinite(beta0), "solver: beta0 must be > 0");
        detail::require(beta_r > 1.0 && std::isfinite(beta_r), "solver: beta_r must be > 1");
        detail::require(beta_m > beta0 && std::isfinite(beta_m), "solver: beta_m must exceed beta0");
        detail::require(eps1 > 0.0, "solver: eps1 must be > 0");
        detail::require(eps2 > 0.0, "solver: eps2 must be > 0");
        detail::require(max_iters >= 1, "solver: max_iters must be >= 1");
        detail::require(sinkhorn_max_iters >= 1, "solver: sinkhorn_max_iters must be >= 1");
    }
};

struct SinkhornStats {
    int sweeps = 0;
    int newton_steps = 0;
    double last_change = 0.0;
    bool converged = false;
};

/// Largest deviation of any row or column sum from 1.
inline double marginal_deviation(const Matrix& m)
{
    const double rows = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double cols = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
    return std::max(rows, cols);
}

inline bool is_doubly_stochastic(const Matrix& m, double tol = 1e-6)
{
    return m.rows() == m.cols() && m.allFinite() && m.minCoeff() >= 0.0
           && marginal_deviation(m) <= tol;
}

// exp(-700) is still a normal double; clamping keeps every row and column
// strictly positive so the normalizations never divide by zero.
inline constexpr double kMinExponent = -700.0;

namespace detail {

// Damped Newton on the log-scalings (u, v) of P_ij exp(u_i + v_j), which
// minimizes the convex potential sum_ij P_ij exp(u_i + v_j) - sum u - sum v.
// Its minimizer is the same doubly stochastic scaling that Sinkhorn sweeps
// approach; Newton keeps converging where the sweeps crawl (limits close to
// a permutation). The gauge v_0 = 0 removes the (1, -1) null direction.
inline int newton_balance(Matrix& p, double tol, int max_steps = 60)
{
    const Index m = p.rows();
    if (m < 2) {
        p.setOnes();
        return 0;
    }
    int steps = 0;
    for (; steps < max_steps; ++steps) {
        const Vector rs = p.rowwise().sum();
        const Vector cs = p.colwise().sum().transpose();
        const Vector r = rs.array() - 1.0;
        const Vector c = cs.array() - 1.0;
        if (std::max(r.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()) < tol) break;

        // Schur complement on v: (diag(cs) - P^T diag(rs)^-1 P) v = P^T diag(rs)^-1 r - c.
        const Matrix scaled = rs.cwiseInverse().asDiagonal() * p;
        Matrix schur = -p.transpose() * scaled;
        schur.diagonal() += cs;
        // Ridge for blocks that are numerically disconnected (each carries its
        // own gauge direction).
        schur.diagonal().array() += 1e-12 * cs.maxCoeff();
        const Vector rhs = scaled.transpose() * r - c;
        Vector v = Vector::Zero(m);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(schur.bottomRightCorner(m - 1, m - 1));
        v.tail(m - 1) = ldlt.solve(rhs.tail(m - 1));
        const Vector u = -rs.cwiseInverse().cwiseProduct(r + p * v);
        if (!u.allFinite() || !v.allFinite()) break;

        // Backtracking on the potential (its value at the current point is
        // sum(P) with u = v = 0).
        const double f0 = p.sum();
        const double slope = r.dot(u) + c.dot(v);
        double t = 1.0;
        Matrix trial;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            const Vector eu = (t * u).array().exp();
            const Vector ev = (t * v).array().exp();
            trial = eu.asDiagonal() * p * ev.asDiagonal();
            const double f1 = trial.sum() - t * (u.sum() + v.sum());
            if (trial.allFinite() && f1 <= f0 + 1e-4 * t * slope) break;
        }
        if (!trial.allFinite()) break;
        p.swap(trial);
    }
    return steps;
}

}  // namespace detail

/// Softmax followed by alternating row/column normalization. The softmax is
/// taken relative to the largest entry and without the global denominator;
/// both are positive scalings that Sinkhorn normalization removes. Stops
/// once a sweep changes the matrix by less than eps2 (Frobenius) and every
/// row sum is within eps2 of 1. When max_iters sweeps are not enough the
/// result is finished by Newton balancing toward the same limit.
inline Matrix softmax_sinkhorn(const Matrix& n, double beta, double eps2, int max_iters,
                               SinkhornStats* stats = nullptr)
{
    detail::require(n.rows() == n.cols() && n.rows() > 0,
                    "softmax_sinkhorn: expected a non-empty square matrix, got " + detail::shape(n));
    detail::require(detail::all_finite(n), "softmax_sinkhorn: input has non-finite entries");
    detail::require(beta > 0.0 && std::isfinite(beta), "softmax_sinkhorn: beta must be > 0");
    detail::require(max_iters >= 1, "softmax_sinkhorn: max_iters must be >= 1");

    const double top = n.maxCoeff();
    Matrix s = (beta * (n.array() - top)).max(kMinExponent).exp().matrix();
    Matrix prev(s.rows(), s.cols());

    SinkhornStats st;
    for (st.sweeps = 1; st.sweeps <= max_iters; ++st.sweeps) {
        prev = s;
        s.array().colwise() /= s.rowwise().sum().array();
        s.array().rowwise() /= s.colwise().sum().array();
        st.last_change = (s - prev).norm();
        // Columns are exact after the last half-sweep; rows carry the residual.
        if (st.last_change < eps2
            && (s.rowwise().sum().array() - 1.0).abs().maxCoeff() < eps2) {
            st.converged = true;
            break;
        }
    }
    st.sweeps = std::min(st.sweeps, max_iters);
    if (!st.converged) {
        prev = s;
        st.newton_steps = detail::newton_balance(s, 1e-3 * eps2);
        s.array().colwise() /= s.rowwise().sum().array();
        s.array().rowwise() /= s.colwise().sum().array();
        st.last_change = (s - prev).norm();
        st.converged = marginal_deviation(s) < eps2;
    }
    if (stats) *stats = st;
    return s;
}

/// One projected fixed-point update (1 - alpha) N + alpha P(grad).
inline Matrix fixed_point_step(const Matrix& n, const Matrix& grad, double alpha, double beta,
                               double eps2, int max_iters, SinkhornStats* stats = nullptr)
{
    detail::require(n.rows() == grad.rows() && n.cols() == grad.cols(),
                    "fixed_point_step: iterate is " + detail::shape(n) + " but gradient is "
                        + detail::shape(grad));
    detail::require(alpha >= 0.0 && alpha <= 1.0, "fixed_point_step: alpha must lie in [0, 1]");
    if (alpha == 0.0) return n;
    const Matrix projected = softmax_sinkhorn(grad, beta, eps2, max_iters, stats);
    if (alpha == 1.0) return projected;
    return (1.0 - alpha) * n + alpha * projected;
}

struct SolveTrace {
    int outer_stages = 0;
    std::vector<int> inner_iterations;  // per stage
    std::vector<double> stage_beta;     // per stage
    std::vector<char> converged;        // per stage: eps1 reached before max_iters
    double final_beta = 0.0;            // sharpness of the last stage run
    std::vector<double> objective_history;  // f(N) after every inner iteration
    long sinkhorn_sweeps = 0;
    double max_marginal_deviation = 0.0;  // over every slack iterate

    int total_iterations() const
    {
        int t = 0;
        for (int it : inner_iterations) t += it;
        return t;
    }
};

/// Observer called after every inner iteration with the slack iterate.
using IterateObserver = std::function<void(int stage, int iteration, const Matrix& slack)>;

struct SolveResult {
    Assignment assignment;
    Matrix relaxed;  // final n1 x n2 block N
    SolveTrace trace;
};

/// Graduated solve for n1 >= n2 >= 2. Use solve_matching() when the larger
/// graph may come second.
inline SolveResult gsspf(const Matrix& a1, const Matrix& a2, const Matrix& k,
                         const SolverConfig& cfg, const IterateObserver& observer = {})
{
    cfg.validate();
    const Index n1 = a1.rows();
    const Index n2 = a2.rows();
    detail::check_problem(k, a1, a2, k, "gsspf");
    detail::require(n2 >= 2, "gsspf: the smaller graph needs at least 2 nodes");
    detail::require(n1 >= n2, "gsspf: expected n1 >= n2, got " + std::to_string(n1) + " < "
                                  + std::to_string(n2));
    detail::require(detail::is_symmetric(a1), "gsspf: A1 is not symmetric");
    detail::require(detail::is_symmetric(a2), "gsspf: A2 is not symmetric");
    detail::require(detail::all_finite(a1) && detail::all_finite(a2) && detail::all_finite(k),
                    "gsspf: non-finite problem data");

    SolveResult out;
    SolveTrace& tr = out.trace;

    Matrix slack = Matrix::Constant(n1, n1, 1.0 / static_cast<double>(n1));
    Matrix padded = Matrix::Zero(n1, n1);
    Matrix next(n1, n1);

    int stage = 0;
    for (double beta = cfg.beta0; beta < cfg.beta_m; beta *= cfg.beta_r, ++stage) {
        int it = 0;
        bool done = false;
        while (!done && it < cfg.max_iters) {
            ++it;
            auto fail = [&](const char* what) {
                return numerical_error(std::string("gsspf: non-finite ") + what + " at stage "
                                       + std::to_string(stage) + " (beta="
                                       + std::to_string(beta) + "), iteration "
                                       + std::to_string(it));
            };
            padded.leftCols(n2) = a1 * slack.leftCols(n2) * a2 + cfg.lambda * k;
            if (!padded.allFinite()) throw fail("gradient");

            SinkhornStats st;
            next = fixed_point_step(slack, padded, cfg.alpha, beta, cfg.eps2,
                                    cfg.sinkhorn_max_iters, &st);
            tr.sinkhorn_sweeps += st.sweeps;
            if (!next.allFinite()) throw fail("iterate");
            const double change =
                (next.leftCols(n2) - slack.leftCols(n2)).cwiseAbs().maxCoeff();
            slack.swap(next);
            done = change < cfg.eps1;

            tr.max_marginal_deviation = std::max(tr.max_marginal_deviation, marginal_deviation(slack));
            tr.objective_history.push_back(objective(slack.leftCols(n2), a1, a2, k, cfg.lambda));
            if (observer) observer(stage, it, slack);
        }
        tr.inner_iterations.push_back(it);
        tr.stage_beta.push_back(beta);
        tr.converged.push_back(done ? 1 : 0);
        tr.final_beta = beta;
    }
    tr.outer_stages = stage;

    out.relaxed = slack.leftCols(n2);
    out.assignment = hungarian(out.relaxed);
    return out;
}

/// gsspf() for graphs of any order: swaps the inputs when graph 2 is larger
/// and maps the assignment back to (graph 1, graph 2) indices.
inline SolveResult solve_matching(const Matrix& a1, const Matrix& a2, const Matrix& k,
                                  const SolverConfig& cfg, const IterateObserver& observer = {})
{
    if (a1.rows() >= a2.rows()) return gsspf(a1, a2, k, cfg, observer);
    SolveResult r = gsspf(a2, a1, k.transpose(), cfg, observer);
    r.assignment = r.assignment.transposed();
    r.relaxed.transposeInPlace();
    return r;
}

/// max |grad f| at the uniform starting point. beta times this value is the
/// spread of the first softmax; useful for sanity-checking presets.
inline double initial_gradient_scale(const Matrix& a1, const Matrix& a2, const Matrix& k,
                                     double lambda)
{
    const Index big = std::max(a1.rows(), a2.rows());
    const Matrix uniform = Matrix::Constant(a1.rows(), a2.rows(), 1.0 / static_cast<double>(big));
    return gradient(uniform, a1, a2, k, lambda).cwiseAbs().maxCoeff();
}

}  // namespace gmatch
