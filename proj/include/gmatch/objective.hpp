#pragma once

// Relaxed graph-matching score
//
//     f(M) = 1/2 tr(M^T A1 M A2) + lambda tr(M^T K)
//
// and its gradient A1 M A2 + lambda K (A1, A2 symmetric). Maximizing f over
// permutations minimizes 1/4 ||A1 - M A2 M^T||^2 + lambda/2 ||F1 - M F2||^2.

#include "gmatch/common.hpp"

namespace gmatch {

namespace detail {

inline void check_problem(const Matrix& m, const Matrix& a1, const Matrix& a2, const Matrix& k,
                          const char* who)
{
    require(a1.rows() == a1.cols(), std::string(who) + ": A1 must be square, got " + shape(a1));
    require(a2.rows() == a2.cols(), std::string(who) + ": A2 must be square, got " + shape(a2));
    require(k.rows() == a1.rows() && k.cols() == a2.rows(),
            std::string(who) + ": K is " + shape(k) + ", expected " + std::to_string(a1.rows())
                + "x" + std::to_string(a2.rows()));
    require(m.rows() == k.rows() && m.cols() == k.cols(),
            std::string(who) + ": M is " + shape(m) + ", expected " + shape(k));
}

}  // namespace detail

inline double objective(const Matrix& m, const Matrix& a1, const Matrix& a2, const Matrix& k,
                        double lambda)
{
    detail::check_problem(m, a1, a2, k, "objective");
    // tr(M^T A1 M A2) = <M, A1 M A2> for symmetric A2.
    const Matrix am = a1 * m * a2;
    return 0.5 * m.cwiseProduct(am).sum() + lambda * m.cwiseProduct(k).sum();
}

inline Matrix gradient(const Matrix& m, const Matrix& a1, const Matrix& a2, const Matrix& k,
                       double lambda)
{
    detail::check_problem(m, a1, a2, k, "gradient");
    Matrix g = a1 * m * a2;
    g += lambda * k;
    return g;
}

}  // namespace gmatch
