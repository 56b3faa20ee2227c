#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "sddip/mip.hpp"
#include "sddip/stats.hpp"

using namespace sddip;

namespace {

// Second stage of the worked two-stage example as a MILP: min 4y subject to
// 0.25 z1 + 0.5 z2 + y >= 2.6, z pinned to x_hat, y integer in [0,4].
MilpInstance example_stage_milp(double z1, double z2) {
    MilpInstance inst;
    LinearProgram& lp = inst.lp;
    lp.add_col(0.0, 0.0, 1.0);
    lp.add_col(0.0, 0.0, 1.0);
    lp.add_col(4.0, 0.0, 4.0);
    inst.is_integer = {1, 1, 1};
    const int r1 = lp.add_row(z1, RowSense::E, RowTag::copy);
    const int r2 = lp.add_row(z2, RowSense::E, RowTag::copy);
    const int r3 = lp.add_row(2.6, RowSense::G, RowTag::body);
    lp.add_coeff(r1, 0, 1.0);
    lp.add_coeff(r2, 1, 1.0);
    lp.add_coeff(r3, 0, 0.25);
    lp.add_coeff(r3, 1, 0.5);
    lp.add_coeff(r3, 2, 1.0);
    return inst;
}

// Random always-feasible mixed instance: binary x, one penalized continuous
// slack per row.  The closed-form optimum enumerates binary assignments with
// s_i = max(0, b_i - (Ax)_i).
struct SlackInstance {
    MilpInstance inst;
    int n = 0;
    std::vector<std::vector<double>> A;  // dense rows over the binaries
    std::vector<double> b, c;
    double rho = 7.0;

    double value_of(unsigned mask) const {
        double v = 0.0;
        for (int j = 0; j < n; ++j)
            if (mask >> j & 1u) v += c[j];
        for (std::size_t i = 0; i < b.size(); ++i) {
            double ax = 0.0;
            for (int j = 0; j < n; ++j)
                if (mask >> j & 1u) ax += A[i][j];
            v += rho * std::max(0.0, b[i] - ax);
        }
        return v;
    }

    double enumerate() const {
        double best = kInf;
        for (unsigned mask = 0; mask < (1u << n); ++mask) best = std::min(best, value_of(mask));
        return best;
    }
};

SlackInstance random_slack_instance(std::mt19937_64& rng, int n, int m) {
    SlackInstance s;
    s.n = n;
    LinearProgram& lp = s.inst.lp;
    for (int j = 0; j < n; ++j) {
        s.c.push_back(std::round(20.0 * (uniform01(rng) - 0.5)));
        lp.add_col(s.c.back(), 0.0, 1.0);
        s.inst.is_integer.push_back(1);
    }
    s.A.assign(m, std::vector<double>(n, 0.0));
    for (int i = 0; i < m; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (uniform01(rng) < 0.4) continue;
            s.A[i][j] = std::round(1.0 + 4.0 * uniform01(rng));
            rowsum += s.A[i][j];
        }
        s.b.push_back(std::round(0.6 * rowsum));
    }
    for (int i = 0; i < m; ++i) {
        const int sc = lp.add_col(s.rho, 0.0, kInf);
        s.inst.is_integer.push_back(0);
        const int r = lp.add_row(s.b[i], RowSense::G);
        for (int j = 0; j < n; ++j)
            if (s.A[i][j] != 0.0) lp.add_coeff(r, j, s.A[i][j]);
        lp.add_coeff(r, sc, 1.0);
    }
    return s;
}

}  // namespace

TEST_CASE("worked example subproblem values") {
    const MipSolution at00 = solve_milp(example_stage_milp(0.0, 0.0));
    REQUIRE(at00.status == MipStatus::optimal);
    REQUIRE(at00.objective == Catch::Approx(12.0).margin(1e-6));
    REQUIRE(at00.primal[2] == Catch::Approx(3.0).margin(1e-6));

    const MipSolution at11 = solve_milp(example_stage_milp(1.0, 1.0));
    REQUIRE(at11.objective == Catch::Approx(8.0).margin(1e-6));
    REQUIRE(at11.primal[2] == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("relaxation drops integrality and lower-bounds the MILP") {
    const MilpInstance inst = example_stage_milp(0.0, 0.0);
    const LpSolution rel = solve_lp_relaxation(inst);
    REQUIRE(rel.status == LpStatus::optimal);
    REQUIRE(rel.objective == Catch::Approx(10.4).margin(1e-7));
    const MipSolution exact = solve_milp(inst);
    REQUIRE(rel.objective <= exact.objective + 1e-6);
}

TEST_CASE("LP-integral instance branches nowhere") {
    MilpInstance inst;
    inst.lp.add_col(-1.0, 0.0, 1.0);
    inst.is_integer = {1};
    const MipSolution s = solve_milp(inst);
    REQUIRE(s.status == MipStatus::optimal);
    REQUIRE(s.node_count == 0);
    REQUIRE(s.objective == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("pure LP instance equals its relaxation") {
    MilpInstance inst;
    inst.lp.add_col(2.0, 0.5, 3.0);
    inst.is_integer = {0};
    REQUIRE(solve_milp(inst).objective ==
            Catch::Approx(solve_lp_relaxation(inst).objective).margin(1e-9));
}

TEST_CASE("infeasible MILP reported") {
    MilpInstance inst;
    inst.lp.add_col(1.0, 0.0, 1.0);
    const int r = inst.lp.add_row(2.0, RowSense::G);
    inst.lp.add_coeff(r, 0, 1.0);
    inst.is_integer = {1};
    const MipSolution s = solve_milp(inst);
    REQUIRE(s.status == MipStatus::infeasible);
    REQUIRE(s.objective == kInf);
}

TEST_CASE("integrality marks on unbounded columns are rejected") {
    MilpInstance inst;
    inst.lp.add_col(1.0, 0.0, kInf);
    inst.is_integer = {1};
    REQUIRE_THROWS_AS(solve_milp(inst), ModelError);
}

TEST_CASE("node limit returns a valid bound") {
    std::mt19937_64 rng(7);
    const SlackInstance s = random_slack_instance(rng, 10, 6);
    const double exact = s.enumerate();
    MipLimits lim;
    lim.max_nodes = 1;
    const MipSolution capped = solve_milp(s.inst, lim);
    if (capped.status == MipStatus::hit_limit) {
        REQUIRE(capped.bound <= exact + 1e-6);
    } else {
        REQUIRE(capped.objective == Catch::Approx(exact).margin(1e-6));
    }
    const MipSolution full = solve_milp(s.inst);
    REQUIRE(full.objective == Catch::Approx(exact).margin(1e-6));
}

TEST_CASE("branch-and-bound equals enumeration on random mixed instances") {
    std::mt19937_64 rng(20240818);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 4 + static_cast<int>(uniform01(rng) * 9.0);
        const int m = 2 + static_cast<int>(uniform01(rng) * 5.0);
        const SlackInstance s = random_slack_instance(rng, n, m);
        const double exact = s.enumerate();
        const MipSolution got = solve_milp(s.inst);
        REQUIRE(got.status == MipStatus::optimal);
        REQUIRE(got.objective == Catch::Approx(exact).margin(1e-6 * (1.0 + std::abs(exact))));
        REQUIRE(got.objective - got.bound <= 1e-6 * (1.0 + std::abs(got.objective)));
        // primal is integral and reproduces the objective
        double v = 0.0;
        unsigned mask = 0;
        for (int j = 0; j < s.n; ++j) {
            REQUIRE(std::abs(got.primal[j] - std::round(got.primal[j])) <= 1e-6);
            if (got.primal[j] > 0.5) mask |= 1u << j;
        }
        v = s.value_of(mask);
        REQUIRE(v == Catch::Approx(exact).margin(1e-6 * (1.0 + std::abs(exact))));
    }
}

TEST_CASE("adding a row never decreases the optimum") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        SlackInstance s = random_slack_instance(rng, 8, 4);
        const double before = solve_milp(s.inst).objective;
        // a redundant-ish covering row: sum of binaries >= 0 stays neutral,
        // >= 1 may tighten
        const int r = s.inst.lp.add_row(trial % 2 == 0 ? 0.0 : 1.0, RowSense::G);
        for (int j = 0; j < s.n; ++j) s.inst.lp.add_coeff(r, j, 1.0);
        const double after = solve_milp(s.inst).objective;
        REQUIRE(after >= before - 1e-7);
    }
}

TEST_CASE("deterministic across repeated solves") {
    std::mt19937_64 rng(5);
    const SlackInstance s = random_slack_instance(rng, 9, 5);
    const MipSolution a = solve_milp(s.inst);
    const MipSolution b = solve_milp(s.inst);
    REQUIRE(a.objective == b.objective);
    REQUIRE(a.node_count == b.node_count);
    REQUIRE(a.primal == b.primal);
}
