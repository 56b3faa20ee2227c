#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "sddip/simplex.hpp"
#include "sddip/stats.hpp"

using namespace sddip;

namespace {

// The LP relaxation of the two-stage example's second stage at incoming
// state x_hat: min 4y s.t. 0.25 z1 + 0.5 z2 + y >= 2.6, z = x_hat, y in [0,4].
LinearProgram example_stage_lp(double z1, double z2) {
    LinearProgram lp;
    const int cz1 = lp.add_col(0.0, 0.0, 1.0);
    const int cz2 = lp.add_col(0.0, 0.0, 1.0);
    const int cy = lp.add_col(4.0, 0.0, 4.0);
    const int r1 = lp.add_row(z1, RowSense::E, RowTag::copy);
    const int r2 = lp.add_row(z2, RowSense::E, RowTag::copy);
    const int r3 = lp.add_row(2.6, RowSense::G, RowTag::body);
    lp.add_coeff(r1, cz1, 1.0);
    lp.add_coeff(r2, cz2, 1.0);
    lp.add_coeff(r3, cz1, 0.25);
    lp.add_coeff(r3, cz2, 0.5);
    lp.add_coeff(r3, cy, 1.0);
    return lp;
}

double dual_objective(const LinearProgram& lp, const LpSolution& s) {
    double obj = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) obj += s.duals[i] * lp.rhs[i];
    // complementarity terms: reduced costs times primal values at bounds
    for (int j = 0; j < lp.num_cols(); ++j) {
        double d = lp.obj[j];
        for (const auto& e : lp.cols[j]) d -= s.duals[e.row] * e.val;
        const double x = s.primal[j];
        const bool at_lo = lp.lo[j] > -kInf && std::abs(x - lp.lo[j]) <= 1e-6;
        const bool at_up = lp.up[j] < kInf && std::abs(x - lp.up[j]) <= 1e-6;
        if (at_lo || at_up) obj += d * x;
    }
    return obj;
}

}  // namespace

TEST_CASE("bound optimum with no rows") {
    LinearProgram lp;
    lp.add_col(-1.0, 0.0, 1.0);
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE(s.objective == Catch::Approx(-1.0).margin(1e-9));
    REQUIRE(s.primal[0] == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(s.duals.empty());
}

TEST_CASE("example stage LP at (0,0): value and copy duals") {
    const LinearProgram lp = example_stage_lp(0.0, 0.0);
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE(s.objective == Catch::Approx(10.4).margin(1e-7));
    REQUIRE(s.primal[2] == Catch::Approx(2.6).margin(1e-7));
    const std::vector<double> pi = extract_copy_duals(s, lp);
    REQUIRE(pi.size() == 2);
    REQUIRE(pi[0] == Catch::Approx(-1.0).margin(1e-7));
    REQUIRE(pi[1] == Catch::Approx(-2.0).margin(1e-7));
}

TEST_CASE("copy duals are local sensitivities (finite differences)") {
    const double eps = 1e-3;
    const LpSolution base = solve_lp(example_stage_lp(0.25, 0.5));
    const std::vector<double> pi = extract_copy_duals(base, example_stage_lp(0.25, 0.5));
    const double d1 = solve_lp(example_stage_lp(0.25 + eps, 0.5)).objective - base.objective;
    const double d2 = solve_lp(example_stage_lp(0.25, 0.5 + eps)).objective - base.objective;
    REQUIRE(d1 == Catch::Approx(pi[0] * eps).margin(1e-9));
    REQUIRE(d2 == Catch::Approx(pi[1] * eps).margin(1e-9));
}

TEST_CASE("copy rows with no objective influence get zero duals") {
    LinearProgram lp;
    const int cz = lp.add_col(0.0, 0.0, 1.0);
    const int cy = lp.add_col(1.0, 0.0, 10.0);
    const int r1 = lp.add_row(0.3, RowSense::E, RowTag::copy);
    const int r2 = lp.add_row(1.0, RowSense::G, RowTag::body);
    lp.add_coeff(r1, cz, 1.0);
    lp.add_coeff(r2, cy, 1.0);
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    const std::vector<double> pi = extract_copy_duals(s, lp);
    REQUIRE(pi.size() == 1);
    REQUIRE(pi[0] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("infeasible box system") {
    LinearProgram lp;
    const int cx = lp.add_col(0.0, 0.0, 5.0);
    const int r1 = lp.add_row(1.0, RowSense::G);
    const int r2 = lp.add_row(0.0, RowSense::L);
    lp.add_coeff(r1, cx, 1.0);
    lp.add_coeff(r2, cx, 1.0);
    REQUIRE(solve_lp(lp).status == LpStatus::infeasible);
}

TEST_CASE("crossed bounds are reported infeasible") {
    LinearProgram lp;
    lp.add_col(1.0, 2.0, 1.0);
    REQUIRE(solve_lp(lp).status == LpStatus::infeasible);
}

TEST_CASE("unbounded ray detected") {
    LinearProgram lp;
    const int cx = lp.add_col(-1.0, 0.0, kInf);
    const int r = lp.add_row(0.0, RowSense::G);
    lp.add_coeff(r, cx, 1.0);
    REQUIRE(solve_lp(lp).status == LpStatus::unbounded);
}

TEST_CASE("free variable enters at the right value") {
    LinearProgram lp;
    const int cx = lp.add_col(1.0, -kInf, kInf);
    const int cy = lp.add_col(0.0, 0.0, 1.0);
    const int r = lp.add_row(2.0, RowSense::G);
    lp.add_coeff(r, cx, 1.0);
    lp.add_coeff(r, cy, 1.0);
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE(s.objective == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("equality row needing a negative artificial") {
    LinearProgram lp;
    const int cx = lp.add_col(1.0, 0.0, 3.0);
    const int cy = lp.add_col(0.0, 0.0, 3.0);
    const int r = lp.add_row(-1.0, RowSense::E);
    lp.add_coeff(r, cx, 1.0);
    lp.add_coeff(r, cy, -1.0);
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE(s.objective == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(s.primal[1] == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("objective offset is carried through") {
    LinearProgram lp;
    lp.add_col(2.0, 1.0, 4.0);
    lp.obj_offset = 7.5;
    REQUIRE(solve_lp(lp).objective == Catch::Approx(9.5).margin(1e-9));
}

TEST_CASE("extract_copy_duals rejects non-optimal solutions") {
    LinearProgram lp = example_stage_lp(0.0, 0.0);
    LpSolution s;
    s.status = LpStatus::infeasible;
    REQUIRE_THROWS_AS(extract_copy_duals(s, lp), ContractError);
}

TEST_CASE("bound overrides act like branching") {
    const LinearProgram lp = example_stage_lp(0.0, 0.0);
    std::vector<double> lo = lp.lo, up = lp.up;
    lo[2] = 3.0;  // force y >= 3
    const LpSolution s = solve_lp(lp, lo, up);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE(s.objective == Catch::Approx(12.0).margin(1e-7));
}

TEST_CASE("random feasible LPs satisfy feasibility and strong duality") {
    std::mt19937_64 rng(20240817);
    const auto uint_in = [&](int lo, int hi) {
        return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
    };
    for (int trial = 0; trial < 200; ++trial) {
        const int n = uint_in(1, 8);
        const int m = uint_in(0, 6);
        LinearProgram lp;
        std::vector<double> xt(n);
        for (int j = 0; j < n; ++j) {
            const double ub = 1.0 + 4.0 * uniform01(rng);
            lp.add_col(std::round(20.0 * (uniform01(rng) - 0.5)) / 2.0, 0.0, ub);
            xt[j] = ub * uniform01(rng);
        }
        for (int i = 0; i < m; ++i) {
            double ax = 0.0;
            std::vector<std::pair<int, double>> entries;
            for (int j = 0; j < n; ++j) {
                if (uniform01(rng) < 0.6) continue;
                const double a = std::round(10.0 * (uniform01(rng) - 0.5));
                if (a == 0.0) continue;
                entries.emplace_back(j, a);
                ax += a * xt[j];
            }
            const double u = uniform01(rng);
            int r;
            if (u < 0.4)
                r = lp.add_row(ax - uniform01(rng), RowSense::G);
            else if (u < 0.8)
                r = lp.add_row(ax + uniform01(rng), RowSense::L);
            else
                r = lp.add_row(ax, RowSense::E);
            for (const auto& [j, a] : entries) lp.add_coeff(r, j, a);
        }
        const LpSolution s = solve_lp(lp);
        REQUIRE(s.status == LpStatus::optimal);  // xt is feasible by construction
        // primal feasibility
        for (int i = 0; i < lp.num_rows(); ++i) {
            double ax = 0.0;
            for (int j = 0; j < n; ++j)
                for (const auto& e : lp.cols[j])
                    if (e.row == i) ax += e.val * s.primal[j];
            switch (lp.sense[i]) {
                case RowSense::G: REQUIRE(ax >= lp.rhs[i] - 1e-7); break;
                case RowSense::L: REQUIRE(ax <= lp.rhs[i] + 1e-7); break;
                case RowSense::E: REQUIRE(std::abs(ax - lp.rhs[i]) <= 1e-7); break;
            }
        }
        for (int j = 0; j < n; ++j) {
            REQUIRE(s.primal[j] >= lp.lo[j] - 1e-7);
            REQUIRE(s.primal[j] <= lp.up[j] + 1e-7);
        }
        // strong duality
        const double gap = std::abs(s.objective - dual_objective(lp, s));
        REQUIRE(gap <= 1e-7 * (1.0 + std::abs(s.objective)));
    }
}

TEST_CASE("degenerate duplicated rows still terminate") {
    LinearProgram lp;
    const int cx = lp.add_col(1.0, 0.0, 10.0);
    const int cy = lp.add_col(1.0, 0.0, 10.0);
    for (int k = 0; k < 6; ++k) {
        const int r = lp.add_row(4.0, RowSense::G);
        lp.add_coeff(r, cx, 1.0);
        lp.add_coeff(r, cy, 1.0);
    }
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE(s.objective == Catch::Approx(4.0).margin(1e-7));
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram lp;
    lp.add_col(std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0);
    REQUIRE_THROWS_AS(solve_lp(lp), ModelError);
}
