#pragma once

#include <cmath>
#include <vector>

#include "sddip/cut_pool.hpp"
#include "sddip/errors.hpp"
#include "sddip/model.hpp"

namespace sddip {

struct LagrangianConfig {
    int max_iters = 100;
    double tol = 1e-4;  // relative gap to the exact subproblem value
    double step = 1.0;  // initial Polyak scale eta
    int patience = 5;   // consecutive non-improvements before eta halves
};

/// One realization's LP relaxation at the incumbent: probability, value and
/// copy-row duals.  Shared by the alternating criterion and the Benders cut.
struct RealizationLp {
    double q = 0.0;
    double q_lp = 0.0;
    std::vector<double> copy_duals;
};

namespace detail {

inline const CutPool& pool_at(const MsipModel& m, const std::vector<CutPool>& pools, int t) {
    static const CutPool empty{};
    if (t + 1 >= m.T) return empty;  // leaf stages carry no epigraph
    if (t >= static_cast<int>(pools.size()))
        throw ContractError("cut pool list is shorter than the stage count requires");
    return pools[t];
}

inline void check_cut_stage(const MsipModel& m, int t) {
    if (t < 1 || t >= m.T)
        throw ContractError("cuts are generated from stages 1..T-1 into the stage below");
}

inline void check_probs(const MsipModel& m, int t, const std::vector<double>& q) {
    if (static_cast<int>(q.size()) != m.num_realizations(t))
        throw ModelError("probability vector length differs from the realization count");
}

inline double exact_value(const MsipModel& m, int t, int j, const std::vector<double>& x_hat,
                          const std::vector<CutPool>& pools) {
    const MipSolution sol = solve_milp(instantiate_subproblem(m, t, j, x_hat, pool_at(m, pools, t)));
    if (sol.status != MipStatus::optimal)
        throw RecourseViolation("stage subproblem has no optimum at the incumbent state");
    return sol.objective;
}

}  // namespace detail

inline std::vector<RealizationLp> solve_stage_relaxations(const MsipModel& m, int t,
                                                          const std::vector<double>& x_hat,
                                                          const std::vector<CutPool>& pools) {
    const CutPool& pool = detail::pool_at(m, pools, t);
    std::vector<RealizationLp> out;
    out.reserve(m.num_realizations(t));
    for (int j = 0; j < m.num_realizations(t); ++j) {
        const MilpInstance inst = instantiate_subproblem(m, t, j, x_hat, pool);
        const LpSolution rel = solve_lp_relaxation(inst);
        if (rel.status != LpStatus::optimal)
            throw RecourseViolation("stage LP relaxation infeasible or unbounded");
        RealizationLp r;
        r.q = m.realizations[t][j].prob;
        r.q_lp = rel.objective;
        r.copy_duals = extract_copy_duals(rel, inst.lp);
        out.push_back(std::move(r));
    }
    return out;
}

/// Benders cut from already-computed relaxations (the alternating criterion
/// reuses its test solves here).
inline Cut benders_from_relaxations(const MsipModel& m, int t, const std::vector<double>& x_hat,
                                    const std::vector<RealizationLp>& rels,
                                    const std::vector<double>& probabilities) {
    detail::check_cut_stage(m, t);
    std::vector<CutPart> parts;
    parts.reserve(rels.size());
    for (std::size_t j = 0; j < rels.size(); ++j) {
        CutPart p;
        p.q = probabilities[j];
        p.pi = rels[j].copy_duals;
        p.v = rels[j].q_lp;
        for (std::size_t r = 0; r < p.pi.size(); ++r) p.v -= p.pi[r] * x_hat[r];
        parts.push_back(std::move(p));
    }
    Cut c = aggregate_cuts(parts);
    c.stage = t - 1;
    c.kind = CutKind::benders;
    return c;
}

inline Cut benders_cut(const MsipModel& m, int t, const std::vector<double>& x_hat,
                       const std::vector<CutPool>& pools,
                       const std::vector<double>& probabilities) {
    detail::check_cut_stage(m, t);
    detail::check_probs(m, t, probabilities);
    return benders_from_relaxations(m, t, x_hat, solve_stage_relaxations(m, t, x_hat, pools),
                                    probabilities);
}

struct LagrangianValue {
    double value = 0.0;
    std::vector<double> z;
};

/// Exact value of the Lagrangian relaxation L_t(pi; omega_j): the stage MILP
/// with copy rows dropped and the objective reduced by pi . z.
inline LagrangianValue evaluate_lagrangian(const MsipModel& m, int t, int j,
                                           const std::vector<double>& pi,
                                           const std::vector<CutPool>& pools) {
    const MilpInstance inst = instantiate_lagrangian(m, t, j, pi, detail::pool_at(m, pools, t));
    const MipSolution sol = solve_milp(inst);
    if (sol.status != MipStatus::optimal)
        throw RecourseViolation("Lagrangian subproblem has no optimum");
    LagrangianValue lv;
    lv.value = sol.objective;
    lv.z.assign(sol.primal.begin(), sol.primal.begin() + m.incoming_dim(t));
    return lv;
}

/// LP-relaxation copy duals with exact Lagrangian intercepts: dominates the
/// plain Benders cut at every point.
inline Cut strengthened_benders_cut(const MsipModel& m, int t, const std::vector<double>& x_hat,
                                    const std::vector<CutPool>& pools,
                                    const std::vector<double>& probabilities) {
    detail::check_cut_stage(m, t);
    detail::check_probs(m, t, probabilities);
    const std::vector<RealizationLp> rels = solve_stage_relaxations(m, t, x_hat, pools);
    std::vector<CutPart> parts;
    parts.reserve(rels.size());
    for (std::size_t j = 0; j < rels.size(); ++j) {
        CutPart p;
        p.q = probabilities[j];
        p.pi = rels[j].copy_duals;
        p.v = evaluate_lagrangian(m, t, static_cast<int>(j), p.pi, pools).value;
        parts.push_back(std::move(p));
    }
    Cut c = aggregate_cuts(parts);
    c.stage = t - 1;
    c.kind = CutKind::strengthened;
    return c;
}

/// Exact-evaluation cut for binary incumbents, tight at x_hat and loose
/// elsewhere.  The per-realization lower bound is the destination stage's
/// configured floor.
inline Cut integer_lshaped_cut(const MsipModel& m, int t, const std::vector<double>& x_hat,
                               const std::vector<CutPool>& pools,
                               const std::vector<double>& probabilities) {
    detail::check_cut_stage(m, t);
    detail::check_probs(m, t, probabilities);
    const double L = pools[t - 1].lower_bound;
    double ones = 0.0;
    for (double v : x_hat) ones += std::round(v);
    std::vector<CutPart> parts;
    for (int j = 0; j < m.num_realizations(t); ++j) {
        const double Q = detail::exact_value(m, t, j, x_hat, pools);
        CutPart p;
        p.q = probabilities[j];
        p.pi = intL_multipliers(Q, L, x_hat);
        p.v = Q - (Q - L) * ones;
        parts.push_back(std::move(p));
    }
    Cut c = aggregate_cuts(parts);
    c.stage = t - 1;
    c.kind = CutKind::integer_l;
    c.tight = true;
    return c;
}

/// Projected supergradient ascent on g(pi) = L(pi) + pi . x_hat with a Polyak
/// step towards the exact value Q_hat.  Emits the best multipliers seen; the
/// cut is always valid and flagged tight only when the gap closed.
inline Cut lagrangian_cut(const MsipModel& m, int t, const std::vector<double>& x_hat,
                          const std::vector<CutPool>& pools,
                          const std::vector<double>& probabilities,
                          const LagrangianConfig& cfg = LagrangianConfig{}) {
    detail::check_cut_stage(m, t);
    detail::check_probs(m, t, probabilities);
    const CutPool& pool = detail::pool_at(m, pools, t);
    std::vector<CutPart> parts;
    bool all_tight = true;
    for (int j = 0; j < m.num_realizations(t); ++j) {
        const double target = detail::exact_value(m, t, j, x_hat, pools);
        const MilpInstance inst = instantiate_subproblem(m, t, j, x_hat, pool);
        const LpSolution rel = solve_lp_relaxation(inst);
        if (rel.status != LpStatus::optimal)
            throw RecourseViolation("stage LP relaxation infeasible at Lagrangian start");
        std::vector<double> pi = extract_copy_duals(rel, inst.lp);

        double eta = cfg.step;
        int stalled = 0;
        LagrangianValue lv = evaluate_lagrangian(m, t, j, pi, pools);
        auto dot_xhat = [&](const std::vector<double>& p) {
            double s = 0.0;
            for (std::size_t r = 0; r < p.size(); ++r) s += p[r] * x_hat[r];
            return s;
        };
        double best_g = lv.value + dot_xhat(pi);
        double best_v = lv.value;
        std::vector<double> best_pi = pi;
        const double tol = cfg.tol * (1.0 + std::abs(target));
        for (int it = 0; it < cfg.max_iters && target - best_g > tol; ++it) {
            double norm2 = 0.0;
            std::vector<double> sub(x_hat.size());
            for (std::size_t r = 0; r < x_hat.size(); ++r) {
                sub[r] = x_hat[r] - lv.z[r];
                norm2 += sub[r] * sub[r];
            }
            if (norm2 <= 1e-18) break;  // z* == x_hat: g already equals the target
            const double g_now = lv.value + dot_xhat(pi);
            const double scale = eta * std::max(target - g_now, 0.0) / norm2;
            for (std::size_t r = 0; r < x_hat.size(); ++r) pi[r] += scale * sub[r];
            lv = evaluate_lagrangian(m, t, j, pi, pools);
            const double g = lv.value + dot_xhat(pi);
            if (g > best_g + 1e-12) {
                best_g = g;
                best_v = lv.value;
                best_pi = pi;
                stalled = 0;
            } else if (++stalled >= cfg.patience) {
                eta *= 0.5;
                stalled = 0;
            }
        }
        all_tight = all_tight && (target - best_g <= tol);
        CutPart p;
        p.q = probabilities[j];
        p.v = best_v;
        p.pi = std::move(best_pi);
        parts.push_back(std::move(p));
    }
    Cut c = aggregate_cuts(parts);
    c.stage = t - 1;
    c.kind = CutKind::lagrangian;
    c.tight = all_tight;
    return c;
}

}  // namespace sddip
