#include <catch_amalgamated.hpp>

#include "gmatch/metrics.hpp"
#include "gmatch/synthetic.hpp"
#include "oracles.hpp"

#include <random>

using namespace gmatch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Assignment truth_of(const std::vector<Index>& perm)
{
    Assignment t{static_cast<Index>(perm.size()), static_cast<Index>(perm.size()), {}};
    for (std::size_t j = 0; j < perm.size(); ++j) t.pairs.emplace_back(perm[j], static_cast<Index>(j));
    std::sort(t.pairs.begin(), t.pairs.end());
    return t;
}

}  // namespace

TEST_CASE("matching_error: self match is zero", "[metrics]")
{
    synthetic::Rng rng(61);
    const auto g = build_graph(synthetic::random_features(rng, 8));
    const auto r = matching_error(g, g, Assignment::from_permutation({0, 1, 2, 3, 4, 5, 6, 7}, 8));
    CHECK(r.edge_error == 0.0);
    CHECK(r.node_error == 0.0);
    CHECK(r.total_error == 0.0);
}

TEST_CASE("matching_error: permuted copy with the inverse permutation is zero", "[metrics]")
{
    synthetic::Rng rng(62);
    const auto fa = synthetic::random_features(rng, 9);
    const auto perm = synthetic::random_permutation(rng, 9);
    const auto ga = build_graph(fa);
    const auto gb = build_graph(synthetic::permuted_copy(fa, perm));
    CHECK(matching_error(ga, gb, truth_of(perm)).total_error == 0.0);
}

TEST_CASE("matching_error: equals dense Frobenius norms", "[metrics]")
{
    synthetic::Rng rng(63);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ga = build_graph(synthetic::random_features(rng, 6, 8));
        const auto gb = build_graph(synthetic::random_features(rng, 6, 8));
        const auto p = synthetic::random_permutation(rng, 6);
        const auto asg = Assignment::from_permutation(p, 6);
        const Matrix m = asg.to_matrix();
        const auto r = matching_error(ga, gb, asg);
        CHECK_THAT(r.edge_error, WithinRel((ga.adjacency - m * gb.adjacency * m.transpose()).norm(), 1e-12));
        CHECK_THAT(r.node_error, WithinRel((ga.features - m * gb.features).norm(), 1e-12));
        CHECK(r.total_error == r.edge_error + r.node_error);
    }
}

TEST_CASE("matching_error: partial assignments use matched nodes only", "[metrics]")
{
    synthetic::Rng rng(64);
    const auto fa = synthetic::random_features(rng, 6, 4);
    const auto ga = build_graph(fa);
    const auto gb = build_graph(fa.subset({0, 1, 2}));
    const auto r = matching_error(ga, gb, Assignment{6, 3, {{0, 0}, {1, 1}, {2, 2}}});
    CHECK(r.total_error == 0.0);

    const auto empty = matching_error(ga, gb, Assignment{6, 3, {}});
    CHECK(empty.total_error == 0.0);

    CHECK_THROWS_AS(matching_error(ga, gb, Assignment{6, 3, {{0, 3}}}), input_error);
    CHECK_THROWS_AS(matching_error(ga, gb, Assignment{5, 3, {}}), input_error);
}

TEST_CASE("matching_error: invariant under consistent relabeling", "[metrics][property]")
{
    synthetic::Rng rng(65);
    for (int trial = 0; trial < 10; ++trial) {
        const auto fa = synthetic::random_features(rng, 7, 8);
        const auto fb = synthetic::random_features(rng, 7, 8);
        const auto asg = Assignment::from_permutation(synthetic::random_permutation(rng, 7), 7);
        const auto s1 = synthetic::random_permutation(rng, 7);
        const auto s2 = synthetic::random_permutation(rng, 7);
        std::vector<Index> inv1(7), inv2(7);
        for (Index t = 0; t < 7; ++t) {
            inv1[static_cast<std::size_t>(s1[static_cast<std::size_t>(t)])] = t;
            inv2[static_cast<std::size_t>(s2[static_cast<std::size_t>(t)])] = t;
        }
        Assignment moved{7, 7, {}};
        for (const auto& [i, j] : asg.pairs)
            moved.pairs.emplace_back(inv1[static_cast<std::size_t>(i)], inv2[static_cast<std::size_t>(j)]);
        std::sort(moved.pairs.begin(), moved.pairs.end());
        const double before = matching_error(build_graph(fa), build_graph(fb), asg).total_error;
        const double after = matching_error(build_graph(fa.subset(s1)), build_graph(fb.subset(s2)), moved).total_error;
        CHECK_THAT(after, WithinRel(before, 1e-12));
    }
}

TEST_CASE("matching_error: edge term ignores rigid motion", "[metrics][property]")
{
    synthetic::Rng rng(66);
    const auto fa = synthetic::random_features(rng, 20);
    const auto fb = synthetic::rigid_motion(fa, 0.7, -120.0, 45.0);
    std::vector<Index> id(20);
    std::iota(id.begin(), id.end(), Index{0});
    CHECK(matching_error(build_graph(fa), build_graph(fb), Assignment::from_permutation(id, 20)).total_error < 1e-6);
}

TEST_CASE("discrepancy: closed cases", "[discrepancy]")
{
    synthetic::Rng rng(67);
    const auto g = build_graph(synthetic::random_features(rng, 4, 4));
    CHECK(discrepancy(g, g, Assignment::from_permutation({0, 1, 2, 3}, 4), 1.0) == 0.0);

    // Zero adjacency: only the feature residual remains.
    GraphRep a, b;
    a.adjacency = Matrix::Zero(3, 3);
    b.adjacency = Matrix::Zero(3, 3);
    a.features = Matrix::Identity(3, 3);
    b.features = Matrix{{0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    oracle::for_each_permutation(3, [&](const std::vector<Index>& p) {
        const auto asg = Assignment::from_permutation(p, 3);
        const double expect = (a.features - asg.to_matrix() * b.features).squaredNorm();
        CHECK_THAT(discrepancy(a, b, asg, 1.0), WithinAbs(expect, 1e-15));
    });
}

TEST_CASE("discrepancy: argmin over permutations is objective argmax", "[discrepancy]")
{
    synthetic::Rng rng(68);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ga = build_graph(synthetic::random_features(rng, 3, 8, 20, 20));
        const auto gb = build_graph(synthetic::random_features(rng, 3, 8, 20, 20));
        const Matrix k = affinity(ga, gb);
        double best_obj = -1e300, best_disc = 1e300;
        std::vector<Index> arg_obj, arg_disc;
        oracle::for_each_permutation(3, [&](const std::vector<Index>& p) {
            const auto asg = Assignment::from_permutation(p, 3);
            const double o = objective(asg.to_matrix(), ga.adjacency, gb.adjacency, k, 1.0);
            const double d = discrepancy(ga, gb, asg, 0.5);
            if (o > best_obj) { best_obj = o; arg_obj = p; }
            if (d < best_disc) { best_disc = d; arg_disc = p; }
        });
        CHECK(arg_obj == arg_disc);
    }
}

TEST_CASE("discrepancy: matches the dense formula", "[discrepancy]")
{
    synthetic::Rng rng(69);
    const auto ga = build_graph(synthetic::random_features(rng, 5, 8));
    const auto gb = build_graph(synthetic::random_features(rng, 5, 8));
    const auto asg = Assignment::from_permutation(synthetic::random_permutation(rng, 5), 5);
    CHECK_THAT(discrepancy(ga, gb, asg, 0.3),
               WithinRel(oracle::discrepancy_dense(asg.to_matrix(), ga.adjacency, gb.adjacency,
                                                   ga.features, gb.features, 0.3),
                         1e-12));
}
