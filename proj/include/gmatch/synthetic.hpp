#pragma once

// Seeded synthetic feature sets for experiments and tests: random keypoints
// with unit descriptors, permuted copies, descriptor noise, near-duplicate
// descriptor clusters and rigid motions.

#include "gmatch/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace gmatch::synthetic {

using Rng = std::mt19937_64;

inline FeatureSet random_features(Rng& rng, Index n, Index dim = 128, int width = 640,
                                  int height = 480, std::string id = "synthetic")
{
    std::uniform_real_distribution<double> ux(0.0, width);
    std::uniform_real_distribution<double> uy(0.0, height);
    std::normal_distribution<double> gauss(0.0, 1.0);
    FeatureSet fs;
    fs.image_id = std::move(id);
    fs.image_width = width;
    fs.image_height = height;
    fs.descriptors.resize(n, dim);
    for (Index i = 0; i < n; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        fs.keypoints.push_back({x, y});
        for (Index c = 0; c < dim; ++c) fs.descriptors(i, c) = gauss(rng);
    }
    normalize_descriptors(fs);
    return fs;
}

inline std::vector<Index> random_permutation(Rng& rng, Index n)
{
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

/// Node j of the result is node perm[j] of the input, so the ground-truth
/// correspondence is (perm[j], j).
inline FeatureSet permuted_copy(const FeatureSet& fs, const std::vector<Index>& perm,
                                std::string id = "permuted")
{
    FeatureSet out = fs.subset(perm);
    out.image_id = std::move(id);
    return out;
}

/// Adds isotropic Gaussian noise of expected norm rel_sigma * ||d|| to every
/// descriptor d, then restores unit length.
inline void add_descriptor_noise(FeatureSet& fs, Rng& rng, double rel_sigma)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double per_component = rel_sigma / std::sqrt(static_cast<double>(fs.dim()));
    for (Index i = 0; i < fs.size(); ++i) {
        const double norm = fs.descriptors.row(i).norm();
        for (Index c = 0; c < fs.dim(); ++c)
            fs.descriptors(i, c) += gauss(rng) * per_component * norm;
    }
    normalize_descriptors(fs);
}

/// Overwrites `clusters * per_cluster` randomly chosen descriptors so that
/// each cluster shares one base descriptor up to relative noise `spread`.
inline void make_descriptor_clusters(FeatureSet& fs, Rng& rng, Index clusters, Index per_cluster,
                                     double spread)
{
    detail::require(clusters * per_cluster <= fs.size(), "make_descriptor_clusters: too many members");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto members = random_permutation(rng, fs.size());
    const double per_component = spread / std::sqrt(static_cast<double>(fs.dim()));
    for (Index c = 0; c < clusters; ++c) {
        Vector base(fs.dim());
        for (Index d = 0; d < fs.dim(); ++d) base(d) = gauss(rng);
        base.normalize();
        for (Index m = 0; m < per_cluster; ++m) {
            const Index node = members[static_cast<std::size_t>(c * per_cluster + m)];
            for (Index d = 0; d < fs.dim(); ++d)
                fs.descriptors(node, d) = base(d) + gauss(rng) * per_component;
        }
    }
    normalize_descriptors(fs);
}

/// Rotation by `angle` radians about the origin followed by a translation.
inline FeatureSet rigid_motion(const FeatureSet& fs, double angle, double tx, double ty)
{
    FeatureSet out = fs;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (auto& kp : out.keypoints) {
        const double x = kp.x;
        const double y = kp.y;
        kp.x = c * x - s * y + tx;
        kp.y = s * x + c * y + ty;
    }
    out.image_width.reset();
    out.image_height.reset();
    return out;
}

}  // namespace gmatch::synthetic
