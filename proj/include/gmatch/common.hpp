#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmatch {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed or invariant-violating input (files, dimensions, ranges).
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A solve produced a non-finite value or otherwise broke down.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw input_error(what);
}

inline std::string shape(const Matrix& m)
{
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline bool all_finite(const Matrix& m)
{
    return m.allFinite();
}

// Max |m - m^T| relative to max |m|; requires square input.
inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-9)
{
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace detail
}  // namespace gmatch
