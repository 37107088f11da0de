#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qmkl/error.hpp"
#include "qmkl/mkl.hpp"

using namespace qmkl;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<GramMatrix> random_grams(std::uint64_t seed, Eigen::Index m) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    Matrix X(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) X.row(i) << u(rng), u(rng);
    return {prepared_gram(KernelSpec(KernelKind::RX, 2), X),
            prepared_gram(KernelSpec(KernelKind::RBF, 2, {0.5}), X)};
}

} // namespace

TEST_CASE("bi-simplex projection") {
    const std::vector<int> y{1, -1};
    const auto p = project_bisimplex(Vector{{0.8, 0.8}}, y);
    CHECK_THAT(p(0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(p(1), WithinAbs(1.0, 1e-15));

    const std::vector<int> y4{1, 1, -1, -1};
    const auto q = project_bisimplex(Vector{{0.8, 0.8, 3.0, -1.0}}, y4);
    CHECK_THAT(q(0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(q(1), WithinAbs(0.5, 1e-15));
    CHECK_THAT(q(2), WithinAbs(1.0, 1e-15));
    CHECK(q(3) == 0.0);
    CHECK_THROWS_AS(project_bisimplex(Vector{{0.1, 0.2}}, std::vector{1, 1}), Error);
}

TEST_CASE("projection is idempotent and lands on the feasible set") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 2);
    const std::vector<int> y{1, -1, 1, 1, -1, -1, 1};
    for (int t = 0; t < 100; ++t) {
        Vector v(7);
        for (auto &x : v) x = n(rng);
        const Vector p = project_bisimplex(v, y);
        double sp = 0, sn = 0;
        for (int i = 0; i < 7; ++i) {
            CHECK(p(i) >= 0.0);
            (y[static_cast<std::size_t>(i)] > 0 ? sp : sn) += p(i);
        }
        CHECK_THAT(sp, WithinAbs(1.0, 1e-12));
        CHECK_THAT(sn, WithinAbs(1.0, 1e-12));
        CHECK((project_bisimplex(p, y) - p).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("weights from the distance vector") {
    const auto w = optimal_weights(Vector{{3.0, 4.0}});
    CHECK_THAT(w.l2(0), WithinAbs(0.6, 1e-15));
    CHECK_THAT(w.l2(1), WithinAbs(0.8, 1e-15));
    CHECK_THAT(w.l1(0), WithinAbs(3.0 / 7.0, 1e-15));
    CHECK_THAT(w.l1(1), WithinAbs(4.0 / 7.0, 1e-15));
    CHECK_THROWS_AS(optimal_weights(Vector::Zero(2)), Error);
}

TEST_CASE("distance vector") {
    GramMatrix I;
    I.entries = Matrix::Identity(2, 2);
    const std::vector<GramMatrix> grams{I};
    const auto d = distance_vector(grams, std::vector{1, -1}, Vector{{1.0, 1.0}});
    CHECK(d(0) == 2.0);
}

TEST_CASE("solver agrees with brute force on small instances") {
    const std::vector<double> lambdas{0.0, 0.2, 0.5};
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Eigen::Index m = 3 + static_cast<Eigen::Index>(seed % 3);
        const auto grams = random_grams(seed, m);
        std::vector<int> y(static_cast<std::size_t>(m));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2 == 0 ? 1 : -1;
        const auto grid = oracle::easymkl_grid({grams[0].entries, grams[1].entries}, y, lambdas, 0.01);
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            const auto sol = solve_easymkl({grams, y, lambdas[l]});
            CHECK(sol.loss <= grid[l].objective + 1e-9);
            CHECK(std::abs(sol.loss - grid[l].objective) < 1e-3);
            CHECK_THAT(sol.loss, WithinAbs(easymkl_objective(grams, y, sol.phi, lambdas[l]), 1e-12));
        }
    }
}

TEST_CASE("solution invariants") {
    const auto grams = random_grams(99, 20);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = i < 9 ? 1 : -1;
    SolverOptions opts;
    opts.record_history = true;
    const auto sol = solve_easymkl({grams, y, 0.2}, opts);
    CHECK(sol.converged);
    CHECK_FALSE(sol.degenerate);
    CHECK_THAT(sol.gamma_l1.sum(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(sol.gamma_l2.norm(), WithinAbs(1.0, 1e-12));
    CHECK((sol.gamma_l1.array() >= 0).all());
    CHECK((project_bisimplex(sol.phi, y) - sol.phi).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t k = 1; k < sol.objective_history.size(); ++k) {
        CHECK(sol.objective_history[k] <= sol.objective_history[k - 1] + 1e-15);
    }
    // warm start from the optimum stays put
    SolverOptions warm;
    warm.initial_phi = sol.phi;
    const auto again = solve_easymkl({grams, y, 0.2}, warm);
    CHECK_THAT(again.loss, WithinAbs(sol.loss, 1e-9));
}

TEST_CASE("identical base kernels get equal weights") {
    const auto grams = random_grams(7, 10);
    std::vector<GramMatrix> twice{grams[0], grams[0]};
    std::vector<int> y(10);
    for (std::size_t i = 0; i < 10; ++i) y[i] = i % 2 == 0 ? 1 : -1;
    const auto sol = solve_easymkl({twice, y, 0.2});
    CHECK(sol.gamma_l1(0) == 0.5);
    CHECK(sol.gamma_l1(1) == 0.5);
}

TEST_CASE("argument errors") {
    const auto grams = random_grams(1, 4);
    CHECK_THROWS_AS(solve_easymkl({grams, std::vector{1, 1, 1, 1}, 0.2}), Error);
    CHECK_THROWS_AS(solve_easymkl({grams, std::vector{1, -1, 1}, 0.2}), Error);
    CHECK_THROWS_AS(solve_easymkl({grams, std::vector{1, -1, 2, -1}, 0.2}), Error);
    CHECK_THROWS_AS(solve_easymkl({{}, std::vector{1, -1}, 0.2}), Error);
}
