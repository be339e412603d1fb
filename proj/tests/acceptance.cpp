// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "gmatch/gmatch.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace gmatch;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Assignment truth_of(const std::vector<Index>& perm)
{
    Assignment t{static_cast<Index>(perm.size()), static_cast<Index>(perm.size()), {}};
    for (std::size_t j = 0; j < perm.size(); ++j) t.pairs.emplace_back(perm[j], static_cast<Index>(j));
    std::sort(t.pairs.begin(), t.pairs.end());
    return t;
}

// 1. Sinkhorn projection on 200 random matrices.
Outcome sinkhorn_projection()
{
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<Index> size(2, 50);
    const double betas[] = {1e-6, 1.0, 100.0};
    const SolverConfig cfg;
    double worst_dev = 0.0, worst_ms = 0.0, min_entry = 1.0;
    for (int t = 0; t < 200; ++t) {
        const Index m = size(rng);
        const Matrix n = oracle::random_matrix(rng, m, m, -1.0, 1.0);
        const auto t0 = Clock::now();
        const Matrix s = softmax_sinkhorn(n, betas[t % 3], cfg.eps2, cfg.sinkhorn_max_iters);
        worst_ms = std::max(worst_ms, ms_since(t0));
        worst_dev = std::max(worst_dev, marginal_deviation(s));
        min_entry = std::min(min_entry, s.minCoeff());
    }
    return {worst_dev <= 1e-6 && min_entry >= 0.0 && worst_ms < 100.0,
            fmt("max |sum-1| = %.3g, min entry = %.3g, slowest = %.2f ms", worst_dev, min_entry, worst_ms)};
}

// 2. Hungarian equals exhaustive maximum, 100 matrices per n = 2..7.
Outcome hungarian_exactness()
{
    std::mt19937_64 rng(1002);
    const auto t0 = Clock::now();
    int exact = 0, total = 0;
    for (Index n = 2; n <= 7; ++n) {
        for (int t = 0; t < 100; ++t) {
            const Matrix s = oracle::random_matrix(rng, n, n, -10.0, 10.0);
            exact += assignment_value(s, hungarian(s)) == oracle::max_permutation_sum(s);
            ++total;
        }
    }
    const double ms = ms_since(t0);
    return {exact == total && ms < 5000.0, fmt("%d/%d exact, %.0f ms", exact, total, ms)};
}

// 3. Gradient vs central finite differences.
Outcome gradient_correctness()
{
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Matrix a = oracle::random_symmetric(rng, 5);
        const Matrix b = oracle::random_symmetric(rng, 5);
        const Matrix k = oracle::random_matrix(rng, 5, 5);
        const Matrix m = oracle::random_matrix(rng, 5, 5, 0.0, 1.0);
        const Matrix g = gradient(m, a, b, k, 1.0);
        const Matrix fd = oracle::finite_difference(
            [&](const Matrix& x) { return objective(x, a, b, k, 1.0); }, m, 1e-5);
        for (Index i = 0; i < 5; ++i)
            for (Index j = 0; j < 5; ++j)
                worst = std::max(worst, std::abs(g(i, j) - fd(i, j)) / std::abs(fd(i, j)));
    }
    return {worst <= 1e-5, fmt("max relative error %.3g", worst)};
}

// 4. Exhaustive ranking by the objective is the reverse of ranking by the
// discrepancy (node weight lambda/2, see metrics.hpp).
Outcome objective_discrepancy_equivalence()
{
    int reversed = 0, same_lambda_reversed = 0;
    double worst_const = 0.0;
    for (int seed = 0; seed < 50; ++seed) {
        synthetic::Rng rng(2000 + static_cast<std::uint64_t>(seed));
        const Index n = 3 + seed % 3;
        // Small image so edge and node terms have comparable weight.
        const auto fa = synthetic::random_features(rng, n, 8, 4, 3);
        const auto fb = synthetic::random_features(rng, n, 8, 4, 3);
        const auto ga = build_graph(fa), gb = build_graph(fb);
        const Matrix k = affinity(ga, gb);
        const double lambda = 1.0;

        std::vector<double> obj, disc, disc_same;
        oracle::for_each_permutation(n, [&](const std::vector<Index>& p) {
            const auto asg = Assignment::from_permutation(p, n);
            obj.push_back(objective(asg.to_matrix(), ga.adjacency, gb.adjacency, k, lambda));
            disc.push_back(discrepancy(ga, gb, asg, lambda / 2.0));
            disc_same.push_back(discrepancy(ga, gb, asg, lambda));
        });
        const double c0 = obj[0] + disc[0];
        for (std::size_t p = 0; p < obj.size(); ++p)
            worst_const = std::max(worst_const, std::abs(obj[p] + disc[p] - c0) / std::abs(c0));

        auto reverse_of = [&](const std::vector<double>& d) {
            const double tol = 1e-9 * std::abs(c0);
            for (std::size_t p = 0; p < obj.size(); ++p)
                for (std::size_t q = 0; q < obj.size(); ++q) {
                    const double dobj = obj[p] - obj[q];
                    const double ddisc = d[p] - d[q];
                    if (std::abs(dobj) <= tol) continue;
                    if ((dobj > 0) != (ddisc < 0)) return false;
                }
            return true;
        };
        reversed += reverse_of(disc);
        same_lambda_reversed += reverse_of(disc_same);
    }
    return {reversed == 50 && worst_const < 1e-9,
            fmt("%d/50 seeds reversed (objective lambda=1 vs discrepancy node weight 1/2), "
                "|obj+disc-const| <= %.2g rel; same-weight pairing reverses %d/50",
                reversed, worst_const, same_lambda_reversed)};
}

// 5. Isomorphic recovery at n = 10.
Outcome isomorphic_recovery()
{
    int recovered = 0;
    double slowest = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        synthetic::Rng rng(3000 + static_cast<std::uint64_t>(seed));
        const auto fa = synthetic::random_features(rng, 10);
        const auto perm = synthetic::random_permutation(rng, 10);
        const auto fb = synthetic::permuted_copy(fa, perm);
        const auto ga = build_graph(fa), gb = build_graph(fb);
        const auto t0 = Clock::now();
        const auto r = solve_matching(ga.adjacency, gb.adjacency, affinity(ga, gb), SolverConfig{});
        slowest = std::max(slowest, ms_since(t0));
        const double err = matching_error(ga, gb, r.assignment).total_error;
        recovered += (err < 1e-6 && r.assignment == truth_of(perm));
    }
    return {recovered >= 18 && slowest < 1000.0,
            fmt("%d/20 exact inverse permutations (need 18), slowest %.2f ms", recovered, slowest)};
}

// 6. Near-optimality against brute force at n = 6. Six-node graphs have a
// gradient scale far below the hundreds-of-points regime the large preset
// targets, so the small-image preset is the setting under test; the large
// preset's count is reported alongside.
Outcome oracle_near_optimality()
{
    auto count_within = [](const SolverConfig& cfg, std::string* failures) {
        int within = 0;
        for (int seed = 0; seed < 20; ++seed) {
            synthetic::Rng rng(4000 + static_cast<std::uint64_t>(seed));
            const auto ga = build_graph(synthetic::random_features(rng, 6));
            const auto gb = build_graph(synthetic::random_features(rng, 6));
            const Matrix k = affinity(ga, gb);
            const auto r = solve_matching(ga.adjacency, gb.adjacency, k, cfg);
            const double got = assignment_objective(r.assignment, ga.adjacency, gb.adjacency, k, cfg.lambda);
            const auto best = brute_force_match(ga.adjacency, gb.adjacency, k, cfg.lambda);
            const double gap = (best.objective - got) / std::abs(best.objective);
            if (gap <= 0.05) {
                ++within;
            } else if (failures) {
                *failures += fmt(" [seed %d gap %.3f, %d stages, %d iterations]", seed, gap,
                                 r.trace.outer_stages, r.trace.total_iterations());
            }
        }
        return within;
    };
    std::string failures;
    const int within = count_within(SolverConfig::small(), &failures);
    const int within_large = count_within(SolverConfig::large(), nullptr);
    return {within >= 16, fmt("%d/20 within 5%% of the optimum with the small preset (need 16); "
                              "large preset %d/20%s",
                              within, within_large, failures.c_str())};
}

// 7. Rigid-motion invariance at n = 20.
Outcome rigid_motion_invariance()
{
    synthetic::Rng rng(5000);
    const auto fa = synthetic::random_features(rng, 20);
    const auto fb = synthetic::rigid_motion(fa, 1.1, 250.0, -75.0);
    const auto ga = build_graph(fa), gb = build_graph(fb);
    const double adj = (ga.adjacency - gb.adjacency).cwiseAbs().maxCoeff();
    std::vector<Index> id(20);
    std::iota(id.begin(), id.end(), Index{0});
    const double identity_err = matching_error(ga, gb, Assignment::from_permutation(id, 20)).total_error;
    const auto r = solve_matching(ga.adjacency, gb.adjacency, affinity(ga, gb), SolverConfig{});
    const double solved_err = matching_error(ga, gb, r.assignment).total_error;
    return {adj <= 1e-9 && identity_err < 1e-6 && solved_err < 1e-6,
            fmt("max |dA| = %.3g, identity error %.3g, solver error %.3g", adj, identity_err, solved_err)};
}

// 8. GSSPPF vs point matching on ambiguous descriptors.
Outcome baseline_comparison()
{
    const auto t0 = Clock::now();
    int wins = 0;
    std::string rows;
    for (int f = 0; f < 10; ++f) {
        synthetic::Rng rng(6000 + static_cast<std::uint64_t>(f));
        auto fa = synthetic::random_features(rng, 50, 128, 640, 480, "fixture");
        synthetic::make_descriptor_clusters(fa, rng, 3, 8, 0.01);
        auto fb = synthetic::permuted_copy(fa, synthetic::random_permutation(rng, 50), "copy");
        synthetic::add_descriptor_noise(fb, rng, 0.05);
        const auto r = run_compare(fa, fb, RunConfig{});
        wins += r.gsspf.total_error <= r.baseline.total_error;
        rows += fmt(" %.4g/%.4g", r.gsspf.total_error, r.baseline.total_error);
    }
    const double ms = ms_since(t0);
    return {wins >= 9 && ms < 30000.0,
            fmt("GSSPPF <= baseline in %d/10 (need 9), %.0f ms; gsspf/baseline totals:%s", wins, ms,
                rows.c_str())};
}

// 9. Every inner slack iterate stays doubly stochastic.
Outcome doubly_stochastic_trajectory()
{
    synthetic::Rng rng(7000);
    const auto fa = synthetic::random_features(rng, 30);
    auto fb = synthetic::permuted_copy(fa, synthetic::random_permutation(rng, 30));
    synthetic::add_descriptor_noise(fb, rng, 0.05);
    const auto ga = build_graph(fa), gb = build_graph(fb);
    double worst = 0.0, min_entry = 1.0;
    int recorded = 0;
    const auto r = solve_matching(ga.adjacency, gb.adjacency, affinity(ga, gb), SolverConfig{},
                                  [&](int, int, const Matrix& s) {
                                      worst = std::max(worst, marginal_deviation(s));
                                      min_entry = std::min(min_entry, s.minCoeff());
                                      ++recorded;
                                  });
    return {worst < 1e-6 && min_entry >= 0.0 && recorded == r.trace.total_iterations(),
            fmt("%d iterates over %d stages, max |sum-1| = %.3g", recorded, r.trace.outer_stages, worst)};
}

// 10. compare is deterministic.
Outcome determinism()
{
    synthetic::Rng rng(8000);
    auto fa = synthetic::random_features(rng, 40, 128, 640, 480, "left");
    synthetic::make_descriptor_clusters(fa, rng, 3, 5, 0.01);
    auto fb = synthetic::permuted_copy(fa, synthetic::random_permutation(rng, 40), "right");
    synthetic::add_descriptor_noise(fb, rng, 0.05);
    // Through the file format, as the CLI sees it.
    const auto pa = parse_features(serialize_features(fa));
    const auto pb = parse_features(serialize_features(fb));
    auto run = [&] {
        RunConfig cfg;
        const auto r = run_compare(pa, pb, cfg);
        return std::array<std::string, 3>{
            render_report("compare", r.prepared, cfg, {r.gsspf, r.baseline}),
            render_svg(r.prepared.a, r.prepared.b, r.gsspf.assignment),
            render_svg(r.prepared.a, r.prepared.b, r.baseline.assignment)};
    };
    const auto first = run();
    const auto second = run();
    return {first == second, fmt("report %zu bytes, SVGs %zu + %zu bytes, identical: %s", first[0].size(),
                                 first[1].size(), first[2].size(), first == second ? "yes" : "no")};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"C1 sinkhorn projection", sinkhorn_projection},
        {"C2 hungarian exactness", hungarian_exactness},
        {"C3 gradient correctness", gradient_correctness},
        {"C4 objective/discrepancy equivalence", objective_discrepancy_equivalence},
        {"C5 isomorphic recovery", isomorphic_recovery},
        {"C6 oracle near-optimality", oracle_near_optimality},
        {"C7 rigid-motion invariance", rigid_motion_invariance},
        {"C8 baseline comparison", baseline_comparison},
        {"C9 doubly stochastic trajectory", doubly_stochastic_trajectory},
        {"C10 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                criteria.size());
    return failed == 0 ? 0 : 1;
}
