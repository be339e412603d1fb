// gmatch-fixture: seeded synthetic feature files for tests and demos.
//
//   gmatch-fixture --n 40 --seed 7 --out-a a.json --out-b b.json --noise 0.05
//
// The second file is a node-permuted copy of the first, optionally with
// descriptor noise and a rigid motion of the keypoints. The ground-truth
// pairs (index in a, index in b) go to --truth when given.

#include "gmatch/gmatch.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <string>

using namespace gmatch;

int main(int argc, char** argv)
{
    CLI::App app{"Write a pair of synthetic feature files"};
    Index n = 20;
    Index dim = 128;
    int width = 640;
    int height = 480;
    std::uint64_t seed = 1;
    double noise = 0.0;
    Index clusters = 0;
    Index cluster_size = 0;
    double spread = 0.01;
    double angle_deg = 0.0;
    double tx = 0.0;
    double ty = 0.0;
    bool identity = false;
    std::string out_a, out_b, truth;

    app.add_option("--n", n, "points per file")->check(CLI::Range(1, 100000));
    app.add_option("--dim", dim, "descriptor length")->check(CLI::Range(1, 4096));
    app.add_option("--width", width, "image width")->check(CLI::PositiveNumber);
    app.add_option("--height", height, "image height")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed");
    app.add_option("--noise", noise, "relative descriptor noise on the copy")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--clusters", clusters, "groups of near-identical descriptors")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--cluster-size", cluster_size, "members per group")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--spread", spread, "relative noise within a group")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--rotate", angle_deg, "rotation of the copy in degrees");
    app.add_option("--tx", tx, "translation of the copy along x");
    app.add_option("--ty", ty, "translation of the copy along y");
    app.add_flag("--identity", identity, "keep node order in the copy");
    app.add_option("--out-a", out_a, "first feature file")->required();
    app.add_option("--out-b", out_b, "second feature file")->required();
    app.add_option("--truth", truth, "file receiving the ground-truth pairs");
    CLI11_PARSE(app, argc, argv);

    try {
        synthetic::Rng rng(seed);
        FeatureSet a = synthetic::random_features(rng, n, dim, width, height, "fixture-a");
        if (clusters > 0) synthetic::make_descriptor_clusters(a, rng, clusters, cluster_size, spread);
        std::vector<Index> perm(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        if (!identity) perm = synthetic::random_permutation(rng, n);
        FeatureSet b = synthetic::permuted_copy(a, perm, "fixture-b");
        if (noise > 0.0) synthetic::add_descriptor_noise(b, rng, noise);
        if (angle_deg != 0.0 || tx != 0.0 || ty != 0.0) {
            b = synthetic::rigid_motion(b, angle_deg * std::acos(-1.0) / 180.0, tx, ty);
            b.image_id = "fixture-b";
        }
        write_text_file(out_a, serialize_features(a));
        write_text_file(out_b, serialize_features(b));
        if (!truth.empty()) {
            std::string text;
            for (Index j = 0; j < n; ++j)
                text += std::to_string(perm[static_cast<std::size_t>(j)]) + " " + std::to_string(j)
                        + "\n";
            write_text_file(truth, text);
        }
    } catch (const std::exception& e) {
        std::cerr << "gmatch-fixture: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
