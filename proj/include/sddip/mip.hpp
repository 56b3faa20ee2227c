#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <vector>

#include "sddip/errors.hpp"
#include "sddip/simplex.hpp"

namespace sddip {

struct MilpInstance {
    LinearProgram lp;
    std::vector<char> is_integer;  // one flag per column
};

enum class MipStatus { optimal, infeasible, hit_limit };

struct MipSolution {
    MipStatus status = MipStatus::infeasible;
    double objective = kInf;  // incumbent value (+inf when none found)
    std::vector<double> primal;
    double bound = -kInf;  // valid lower bound on the true optimum
    long node_count = 0;   // nodes that were branched (0 when the root LP is integral)
};

struct MipLimits {
    long max_nodes = -1;        // < 0: unlimited
    double time_limit_s = -1.0; // < 0: unlimited
};

inline LpSolution solve_lp_relaxation(const MilpInstance& inst) { return solve_lp(inst.lp); }

namespace detail {

inline void validate_milp(const MilpInstance& inst) {
    if (inst.is_integer.size() != inst.lp.cols.size())
        throw ModelError("milp: integrality mark count does not match column count");
    for (int j = 0; j < inst.lp.num_cols(); ++j)
        if (inst.is_integer[j] && !(inst.lp.lo[j] > -kInf && inst.lp.up[j] < kInf))
            throw ModelError("milp: integrality mark on an unbounded variable");
}

constexpr double kIntTol = 1e-6;
constexpr double kPruneEps = 1e-9;

// most-fractional variable, ties broken by lowest index; -1 when integral
inline int pick_branch_var(const MilpInstance& inst, const std::vector<double>& x) {
    int best = -1;
    double best_score = kIntTol;
    for (int j = 0; j < inst.lp.num_cols(); ++j) {
        if (!inst.is_integer[j]) continue;
        const double f = x[j] - std::floor(x[j]);
        const double score = std::min(f, 1.0 - f);
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    return best;
}

}  // namespace detail

/// Best-bound branch-and-bound over the revised simplex core.  Deterministic:
/// node order is (bound, insertion id) and branching is most-fractional with
/// lowest-index tie-breaks.
inline MipSolution solve_milp(const MilpInstance& inst, const MipLimits& limits = {}) {
    detail::validate_milp(inst);
    const auto t0 = std::chrono::steady_clock::now();
    const auto out_of_time = [&] {
        if (limits.time_limit_s < 0) return false;
        const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t0;
        return el.count() >= limits.time_limit_s;
    };

    struct Node {
        int parent = -1;
        int var = -1;
        bool is_upper = false;  // which side of the bound the change tightens
        double value = 0.0;
        double bound = -kInf;  // LP value of the parent: a valid lower bound here
    };
    std::vector<Node> nodes;
    // (bound, node index) min-ordered; index ties keep insertion order
    using Key = std::pair<double, int>;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> open;

    std::vector<double> lo = inst.lp.lo, up = inst.lp.up;
    const auto materialize_bounds = [&](int node_id) {
        lo = inst.lp.lo;
        up = inst.lp.up;
        for (int id = node_id; id >= 0; id = nodes[id].parent) {
            const Node& nd = nodes[id];
            if (nd.var < 0) continue;
            if (nd.is_upper)
                up[nd.var] = std::min(up[nd.var], nd.value);
            else
                lo[nd.var] = std::max(lo[nd.var], nd.value);
        }
    };

    MipSolution best;
    best.status = MipStatus::infeasible;
    long branched = 0;
    bool hit_limit = false;
    bool any_feasible_lp = false;

    // exact incumbent: re-solve with integers pinned to their rounded values
    const auto try_incumbent = [&](const std::vector<double>& x) {
        std::vector<double> flo = lo, fup = up;
        for (int j = 0; j < inst.lp.num_cols(); ++j)
            if (inst.is_integer[j]) flo[j] = fup[j] = std::round(x[j]);
        const LpSolution fixed = solve_lp(inst.lp, flo, fup);
        if (fixed.status == LpStatus::optimal) {
            if (fixed.objective < best.objective) {
                best.objective = fixed.objective;
                best.primal = fixed.primal;
                for (int j = 0; j < inst.lp.num_cols(); ++j)
                    if (inst.is_integer[j]) best.primal[j] = std::round(best.primal[j]);
            }
        } else if (best.primal.empty()) {
            // tolerance-integral vertex whose rounding is infeasible: keep the
            // LP point, staying within the declared 1e-6 relative mip gap
            double obj = inst.lp.obj_offset;
            for (int j = 0; j < inst.lp.num_cols(); ++j) obj += inst.lp.obj[j] * x[j];
            if (obj < best.objective) {
                best.objective = obj;
                best.primal = x;
            }
        }
    };

    nodes.push_back({});
    open.emplace(-kInf, 0);
    while (!open.empty()) {
        if (out_of_time() || (limits.max_nodes >= 0 && branched >= limits.max_nodes)) {
            hit_limit = true;
            break;
        }
        const auto [node_bound, id] = open.top();
        open.pop();
        if (node_bound >= best.objective - detail::kPruneEps) continue;
        materialize_bounds(id);
        const LpSolution rel = solve_lp(inst.lp, lo, up);
        if (rel.status == LpStatus::infeasible) continue;
        if (rel.status == LpStatus::unbounded) {
            if (id == 0) throw SolverFailure("milp: unbounded relaxation");
            throw SolverFailure("milp: child relaxation unbounded under tighter bounds");
        }
        any_feasible_lp = true;
        if (rel.objective >= best.objective - detail::kPruneEps) continue;
        const int bv = detail::pick_branch_var(inst, rel.primal);
        if (bv < 0) {
            try_incumbent(rel.primal);
            continue;
        }
        ++branched;
        const double v = rel.primal[bv];
        const int down = static_cast<int>(nodes.size());
        nodes.push_back({id, bv, true, std::floor(v), rel.objective});
        open.emplace(rel.objective, down);
        const int up_child = static_cast<int>(nodes.size());
        nodes.push_back({id, bv, false, std::ceil(v), rel.objective});
        open.emplace(rel.objective, up_child);
    }

    best.node_count = branched;
    if (hit_limit) {
        best.status = MipStatus::hit_limit;
        best.bound = best.objective;
        while (!open.empty()) {
            best.bound = std::min(best.bound, open.top().first);
            open.pop();
        }
        if (best.bound <= -kInf && any_feasible_lp)
            throw SolverFailure("milp: no finite bound at limit");
        return best;
    }
    if (best.primal.empty()) {
        best.status = MipStatus::infeasible;
        best.objective = kInf;
        best.bound = kInf;
        return best;
    }
    best.status = MipStatus::optimal;
    best.bound = best.objective;
    return best;
}

}  // namespace sddip
