#pragma once

// Keypoint graphs: complete, self-loop-free graphs whose edge weights are
// pairwise Euclidean distances between keypoints and whose node attributes
// are the keypoint descriptors.

#include "gmatch/common.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gmatch {

struct KeyPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
};

/// Keypoints and descriptors extracted from one image. Row i of
/// `descriptors` describes `keypoints[i]`.
struct FeatureSet {
    std::string image_id;
    std::optional<int> image_width;
    std::optional<int> image_height;
    std::vector<KeyPoint> keypoints;
    Matrix descriptors;

    Index size() const { return static_cast<Index>(keypoints.size()); }
    Index dim() const { return descriptors.cols(); }

    /// Throws input_error naming the first violated invariant.
    void validate() const
    {
        detail::require(keypoints.size() >= 2,
                        "feature set '" + image_id + "': need at least 2 keypoints, got "
                            + std::to_string(keypoints.size()));
        detail::require(descriptors.rows() == size(),
                        "feature set '" + image_id + "': descriptor row count "
                            + std::to_string(descriptors.rows()) + " != keypoint count "
                            + std::to_string(keypoints.size()));
        detail::require(descriptors.cols() >= 1,
                        "feature set '" + image_id + "': descriptor dimension must be >= 1");
        for (std::size_t i = 0; i < keypoints.size(); ++i) {
            detail::require(std::isfinite(keypoints[i].x) && std::isfinite(keypoints[i].y),
                            "feature set '" + image_id + "': keypoint " + std::to_string(i)
                                + " is not finite");
        }
        detail::require(detail::all_finite(descriptors),
                        "feature set '" + image_id + "': descriptors contain non-finite values");
        if (image_width) detail::require(*image_width > 0, "image width must be positive");
        if (image_height) detail::require(*image_height > 0, "image height must be positive");
    }

    /// Subset of nodes in the given order.
    FeatureSet subset(const std::vector<Index>& rows) const
    {
        FeatureSet out;
        out.image_id = image_id;
        out.image_width = image_width;
        out.image_height = image_height;
        out.descriptors.resize(static_cast<Index>(rows.size()), dim());
        out.keypoints.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.keypoints.push_back(keypoints.at(static_cast<std::size_t>(rows[r])));
            out.descriptors.row(static_cast<Index>(r)) = descriptors.row(rows[r]);
        }
        return out;
    }
};

/// Scale each descriptor to unit L2 norm. All-zero rows are left as they are.
inline void normalize_descriptors(FeatureSet& fs)
{
    for (Index i = 0; i < fs.descriptors.rows(); ++i) {
        const double norm = fs.descriptors.row(i).norm();
        if (norm > 0.0) fs.descriptors.row(i) /= norm;
    }
}

struct GraphRep {
    Matrix adjacency;  // n x n, symmetric, zero diagonal
    Matrix features;   // n x p

    Index size() const { return adjacency.rows(); }
};

struct GraphOptions {
    // Divide the adjacency by its largest entry (scale-free experiments).
    // Off by default: the graduated sharpness presets assume pixel units.
    bool normalize_adjacency = false;
};

inline GraphRep build_graph(const FeatureSet& fs, const GraphOptions& opts = {})
{
    fs.validate();
    const Index n = fs.size();
    GraphRep g;
    g.adjacency = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto& pi = fs.keypoints[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < n; ++j) {
            const auto& pj = fs.keypoints[static_cast<std::size_t>(j)];
            const double d = std::hypot(pi.x - pj.x, pi.y - pj.y);
            g.adjacency(i, j) = d;
            g.adjacency(j, i) = d;
        }
    }
    if (opts.normalize_adjacency) {
        const double mx = g.adjacency.maxCoeff();
        if (mx > 0.0) g.adjacency /= mx;
    }
    g.features = fs.descriptors;
    return g;
}

/// Cross-graph node similarity K = F_a * F_b^T.
inline Matrix affinity(const GraphRep& a, const GraphRep& b)
{
    detail::require(a.features.cols() == b.features.cols(),
                    "affinity: descriptor dimension mismatch (" + std::to_string(a.features.cols())
                        + " vs " + std::to_string(b.features.cols()) + ")");
    return a.features * b.features.transpose();
}

struct Selection {
    FeatureSet a;
    FeatureSet b;
    std::vector<Index> kept_a;  // original indices, ascending
    std::vector<Index> kept_b;
};

namespace detail {

// Indices of the `count` largest scores (ties to the lower index), returned
// in ascending index order.
inline std::vector<Index> top_indices(const Vector& score, Index count)
{
    std::vector<Index> order(static_cast<std::size_t>(score.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index l, Index r) { return score(l) > score(r); });
    order.resize(static_cast<std::size_t>(count));
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace detail

/// Keep the `top` features of each image whose best inner product against
/// the other image is largest. Applied symmetrically to both sets.
inline Selection feature_select(const FeatureSet& fa, const FeatureSet& fb, Index top)
{
    detail::require(fa.dim() == fb.dim(), "feature_select: descriptor dimension mismatch");
    detail::require(top >= 1 && top <= std::min(fa.size(), fb.size()),
                    "feature_select: T=" + std::to_string(top) + " outside [1, "
                        + std::to_string(std::min(fa.size(), fb.size())) + "]");
    const Matrix k = fa.descriptors * fb.descriptors.transpose();
    const Vector score_a = k.rowwise().maxCoeff();
    const Vector score_b = k.colwise().maxCoeff().transpose();

    Selection s;
    s.kept_a = detail::top_indices(score_a, top);
    s.kept_b = detail::top_indices(score_b, top);
    s.a = fa.subset(s.kept_a);
    s.b = fb.subset(s.kept_b);
    return s;
}

}  // namespace gmatch
