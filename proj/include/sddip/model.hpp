#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sddip/cut_pool.hpp"
#include "sddip/errors.hpp"
#include "sddip/mip.hpp"
#include "sddip/stats.hpp"

namespace sddip {

enum class VarKind : char { binary, integer, continuous };

struct VarSpec {
    VarKind kind = VarKind::continuous;
    double lo = 0.0;
    double hi = 0.0;
};

struct Triplet {
    int row = 0;
    int col = 0;
    double val = 0.0;
};

/// Realization overrides replace a base coefficient outright.
struct Override {
    enum class Target : char { objective_x, objective_y, rhs };
    Target target = Target::rhs;
    int position = 0;
    double value = 0.0;
};

struct Realization {
    double prob = 1.0;
    std::vector<Override> overrides;
};

/// One stage of the MSIP.  Constraints read
///   B z + A x + C y  (sense)  b
/// where z copies the previous stage's state, x is this stage's state and
/// y are the locals.  L floors this stage's epigraph variable theta.
struct StageTemplate {
    std::vector<VarSpec> state;
    std::vector<VarSpec> locals;
    std::vector<double> c_x, c_y;
    std::vector<Triplet> B, A, C;
    std::vector<double> b;
    std::vector<RowSense> sense;
    double L = 0.0;
};

/// Stage-wise independent MSIP.  Stages are indexed 0..T-1 in code; stage 0
/// is deterministic (exactly one realization of probability 1).
struct MsipModel {
    int T = 0;
    std::vector<double> x0;
    std::vector<StageTemplate> stages;
    std::vector<std::vector<Realization>> realizations;

    int state_dim(int t) const { return static_cast<int>(stages[t].state.size()); }
    int incoming_dim(int t) const {
        return t == 0 ? static_cast<int>(x0.size()) : state_dim(t - 1);
    }
    int num_realizations(int t) const { return static_cast<int>(realizations[t].size()); }
};

/// Realization indices along one sampled scenario, one per stage ([0] == 0).
using ScenarioPath = std::vector<int>;

inline std::vector<std::string> validate_model(const MsipModel& m) {
    std::vector<std::string> out;
    const auto bad = [&](int t, const std::string& what) {
        out.push_back("stage " + std::to_string(t) + ": " + what);
    };
    if (m.T < 1) {
        out.push_back("model: T must be >= 1");
        return out;
    }
    if (static_cast<int>(m.stages.size()) != m.T ||
        static_cast<int>(m.realizations.size()) != m.T) {
        out.push_back("model: stage/realization list length differs from T");
        return out;
    }
    for (double v : m.x0)
        if (!std::isfinite(v)) out.push_back("model: non-finite x0 entry");

    for (int t = 0; t < m.T; ++t) {
        const StageTemplate& st = m.stages[t];
        const int h = static_cast<int>(st.state.size());
        const int ld = static_cast<int>(st.locals.size());
        const int nr = static_cast<int>(st.b.size());
        if (static_cast<int>(st.c_x.size()) != h) bad(t, "c_x length differs from state dim");
        if (static_cast<int>(st.c_y.size()) != ld) bad(t, "c_y length differs from local dim");
        if (static_cast<int>(st.sense.size()) != nr) bad(t, "sense length differs from rhs length");
        if (!std::isfinite(st.L)) bad(t, "L not finite");
        for (const VarSpec& v : st.state) {
            if (v.kind == VarKind::binary && (v.lo != 0.0 || v.hi != 1.0))
                bad(t, "binary state component with bounds other than [0,1]");
            if (!(v.lo > -kInf && v.hi < kInf))
                bad(t, "state component with unbounded domain");
            if (!(v.lo <= v.hi)) bad(t, "state component with lo > hi");
        }
        for (const VarSpec& v : st.locals) {
            if (v.kind == VarKind::binary && (v.lo != 0.0 || v.hi != 1.0))
                bad(t, "binary local with bounds other than [0,1]");
            if (v.kind != VarKind::continuous && !(v.lo > -kInf && v.hi < kInf))
                bad(t, "integral local with unbounded domain");
            if (std::isnan(v.lo) || std::isnan(v.hi) || !(v.lo <= v.hi))
                bad(t, "local with inconsistent bounds");
        }
        const int hz = m.incoming_dim(t);
        const auto check_trip = [&](const std::vector<Triplet>& ts, int cols, const char* name) {
            for (const Triplet& e : ts) {
                if (e.row < 0 || e.row >= nr || e.col < 0 || e.col >= cols)
                    bad(t, std::string(name) + " triplet index out of range");
                else if (!std::isfinite(e.val))
                    bad(t, std::string(name) + " triplet value not finite");
            }
        };
        check_trip(st.B, hz, "B");
        check_trip(st.A, h, "A");
        check_trip(st.C, ld, "C");
        for (double v : st.b)
            if (!std::isfinite(v)) bad(t, "non-finite rhs entry");

        const auto& rzs = m.realizations[t];
        if (rzs.empty()) {
            bad(t, "no realizations");
            continue;
        }
        if (t == 0 && (rzs.size() != 1 || std::abs(rzs[0].prob - 1.0) > 1e-9))
            bad(t, "stage 0 must have exactly one realization of probability 1");
        double qsum = 0.0;
        for (const Realization& r : rzs) {
            if (!(r.prob >= 0.0 && r.prob <= 1.0)) bad(t, "probability outside [0,1]");
            qsum += r.prob;
            for (const Override& o : r.overrides) {
                const int limit = o.target == Override::Target::objective_x   ? h
                                  : o.target == Override::Target::objective_y ? ld
                                                                              : nr;
                if (o.position < 0 || o.position >= limit)
                    bad(t, "override position out of range");
                if (!std::isfinite(o.value)) bad(t, "override value not finite");
            }
        }
        if (std::abs(qsum - 1.0) > 1e-9)
            bad(t, "probabilities sum " + std::to_string(qsum) + " != 1");
    }
    return out;
}

/// Column/row offsets of an instantiated stage subproblem.  Columns are laid
/// out as [z | x | y | theta], rows as [copy | body | cut].
struct StageLayout {
    int z_dim = 0, x_dim = 0, y_dim = 0;
    int z_begin = 0, x_begin = 0, y_begin = 0;
    int theta_col = -1;  // -1 at the leaf stage
    int body_row_begin = 0, cut_row_begin = 0;
};

inline StageLayout stage_layout(const MsipModel& m, int t) {
    if (t < 0 || t >= m.T) throw ModelError("stage index out of range");
    StageLayout lay;
    lay.z_dim = m.incoming_dim(t);
    lay.x_dim = m.state_dim(t);
    lay.y_dim = static_cast<int>(m.stages[t].locals.size());
    lay.z_begin = 0;
    lay.x_begin = lay.z_dim;
    lay.y_begin = lay.x_begin + lay.x_dim;
    lay.theta_col = t + 1 < m.T ? lay.y_begin + lay.y_dim : -1;
    lay.body_row_begin = lay.z_dim;
    lay.cut_row_begin = lay.body_row_begin + static_cast<int>(m.stages[t].b.size());
    return lay;
}

namespace detail {

inline void apply_overrides(const StageTemplate& st, const Realization& rz,
                            std::vector<double>& cx, std::vector<double>& cy,
                            std::vector<double>& b) {
    cx = st.c_x;
    cy = st.c_y;
    b = st.b;
    for (const Override& o : rz.overrides) {
        switch (o.target) {
            case Override::Target::objective_x: cx[o.position] = o.value; break;
            case Override::Target::objective_y: cy[o.position] = o.value; break;
            case Override::Target::rhs: b[o.position] = o.value; break;
        }
    }
}

inline std::pair<double, double> var_bounds(const VarSpec& v) {
    if (v.kind == VarKind::binary) return {0.0, 1.0};
    return {v.lo, v.hi};
}

// Shared body of subproblem/Lagrangian instantiation.  When pin_state is
// null the copy rows are dropped and z_obj supplies the -pi objective on z.
inline MilpInstance build_stage_milp(const MsipModel& m, int t, int j,
                                     const std::vector<double>* pin_state,
                                     const std::vector<double>* z_obj, const CutPool& pool) {
    if (t < 0 || t >= m.T) throw ModelError("stage index out of range");
    if (j < 0 || j >= m.num_realizations(t)) throw ModelError("realization index out of range");
    const StageTemplate& st = m.stages[t];
    const StageLayout lay = stage_layout(m, t);
    const bool leaf = lay.theta_col < 0;
    if (leaf && !pool.cuts.empty())
        throw ContractError("leaf stage cannot carry a cut pool");
    if (pin_state && static_cast<int>(pin_state->size()) != lay.z_dim)
        throw ModelError("x_hat dimension differs from incoming state dimension");
    if (z_obj && static_cast<int>(z_obj->size()) != lay.z_dim)
        throw ModelError("multiplier dimension differs from incoming state dimension");

    std::vector<double> cx, cy, b;
    apply_overrides(st, m.realizations[t][j], cx, cy, b);

    MilpInstance inst;
    LinearProgram& lp = inst.lp;
    // z columns: the previous stage's state domain (stage 0 copies x0 exactly)
    for (int r = 0; r < lay.z_dim; ++r) {
        double zlo, zhi;
        bool integral = false;
        if (t == 0) {
            zlo = zhi = m.x0[r];
        } else {
            const VarSpec& v = m.stages[t - 1].state[r];
            std::tie(zlo, zhi) = var_bounds(v);
            integral = v.kind != VarKind::continuous;
        }
        lp.add_col(z_obj ? -(*z_obj)[r] : 0.0, zlo, zhi);
        inst.is_integer.push_back(integral ? 1 : 0);
    }
    for (int r = 0; r < lay.x_dim; ++r) {
        const VarSpec& v = st.state[r];
        const auto [xlo, xhi] = var_bounds(v);
        lp.add_col(cx[r], xlo, xhi);
        inst.is_integer.push_back(v.kind != VarKind::continuous ? 1 : 0);
    }
    for (int r = 0; r < lay.y_dim; ++r) {
        const VarSpec& v = st.locals[r];
        const auto [ylo, yhi] = var_bounds(v);
        lp.add_col(cy[r], ylo, yhi);
        inst.is_integer.push_back(v.kind != VarKind::continuous ? 1 : 0);
    }
    if (!leaf) {
        lp.add_col(1.0, pool.lower_bound, kInf);
        inst.is_integer.push_back(0);
    }

    if (pin_state) {
        for (int r = 0; r < lay.z_dim; ++r) {
            const int row = lp.add_row((*pin_state)[r], RowSense::E, RowTag::copy);
            lp.add_coeff(row, lay.z_begin + r, 1.0);
        }
    }
    const int body0 = lp.num_rows();
    for (std::size_t i = 0; i < b.size(); ++i) lp.add_row(b[i], st.sense[i], RowTag::body);
    for (const Triplet& e : st.B) lp.add_coeff(body0 + e.row, lay.z_begin + e.col, e.val);
    for (const Triplet& e : st.A) lp.add_coeff(body0 + e.row, lay.x_begin + e.col, e.val);
    for (const Triplet& e : st.C) lp.add_coeff(body0 + e.row, lay.y_begin + e.col, e.val);

    for (const Cut& c : pool.cuts) {
        if (static_cast<int>(c.gradient.size()) != lay.x_dim)
            throw ContractError("pool cut gradient dimension differs from state dimension");
        const int row = lp.add_row(c.intercept, RowSense::G, RowTag::cut);
        lp.add_coeff(row, lay.theta_col, 1.0);
        for (int r = 0; r < lay.x_dim; ++r)
            if (c.gradient[r] != 0.0) lp.add_coeff(row, lay.x_begin + r, -c.gradient[r]);
    }
    return inst;
}

}  // namespace detail

/// Stage-t subproblem at incoming state x_hat under realization j: copy rows
/// z = x_hat (tagged), template rows with overrides applied, epigraph theta
/// floored at pool.lower_bound plus one row per pool cut.
inline MilpInstance instantiate_subproblem(const MsipModel& m, int t, int j,
                                           const std::vector<double>& x_hat,
                                           const CutPool& pool = CutPool{}) {
    return detail::build_stage_milp(m, t, j, &x_hat, nullptr, pool);
}

/// Lagrangian relaxation of the copy rows: z ranges over the previous state
/// domain and the objective picks up -pi . z.
inline MilpInstance instantiate_lagrangian(const MsipModel& m, int t, int j,
                                           const std::vector<double>& pi,
                                           const CutPool& pool = CutPool{}) {
    return detail::build_stage_milp(m, t, j, nullptr, &pi, pool);
}

/// Realized stage cost f_t(x, y) of a subproblem primal, theta excluded.
inline double stage_cost(const MsipModel& m, int t, int j, const std::vector<double>& primal) {
    const StageLayout lay = stage_layout(m, t);
    if (static_cast<int>(primal.size()) < lay.y_begin + lay.y_dim)
        throw ContractError("stage_cost: primal too short");
    std::vector<double> cx, cy, b;
    detail::apply_overrides(m.stages[t], m.realizations[t][j], cx, cy, b);
    double f = 0.0;
    for (int r = 0; r < lay.x_dim; ++r) f += cx[r] * primal[lay.x_begin + r];
    for (int r = 0; r < lay.y_dim; ++r) f += cy[r] * primal[lay.y_begin + r];
    return f;
}

/// One cut pool per non-leaf stage, floored at the template L.
inline std::vector<CutPool> make_pools(const MsipModel& m) {
    std::vector<CutPool> pools;
    for (int t = 0; t + 1 < m.T; ++t) {
        CutPool p;
        p.stage = t;
        p.lower_bound = m.stages[t].L;
        pools.push_back(std::move(p));
    }
    return pools;
}

inline ScenarioPath draw_scenario_path(const MsipModel& m, std::mt19937_64& rng) {
    ScenarioPath p(m.T, 0);
    for (int t = 1; t < m.T; ++t) {
        const double u = uniform01(rng);
        const auto& rzs = m.realizations[t];
        int pick = static_cast<int>(rzs.size()) - 1;
        double acc = 0.0;
        for (int j = 0; j < static_cast<int>(rzs.size()); ++j) {
            acc += rzs[j].prob;
            if (u < acc) {
                pick = j;
                break;
            }
        }
        p[t] = pick;
    }
    return p;
}

inline std::vector<ScenarioPath> sample_scenario_paths(const MsipModel& m, int M,
                                                       std::mt19937_64& rng) {
    if (M < 2) throw ConfigError("sample_scenario_paths: M must be >= 2");
    std::vector<ScenarioPath> out;
    out.reserve(M);
    for (int k = 0; k < M; ++k) out.push_back(draw_scenario_path(m, rng));
    return out;
}

inline std::vector<ScenarioPath> sample_scenario_paths(const MsipModel& m, int M,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_scenario_paths(m, M, rng);
}

/// Replaces every bounded-integer state component by its base-2 expansion
/// (ceil(log2(hi-lo+1)) binary components with weights 2^i), remapping A/B
/// triplets, objectives and overrides, and adding a range cap row when the
/// binary span overshoots hi-lo.  Binary components pass through unchanged.
inline MsipModel binarize_state(const MsipModel& m) {
    struct CompMap {
        int new_start = 0;
        int bits = 0;     // 0: passthrough binary component
        double lo = 0.0;  // offset of the expansion
    };
    std::vector<std::vector<CompMap>> maps(m.T);
    MsipModel out;
    out.T = m.T;
    out.x0 = m.x0;  // stage-0 B acts on x0, which is data and stays as-is
    out.stages.resize(m.T);
    out.realizations = m.realizations;

    for (int t = 0; t < m.T; ++t) {
        const StageTemplate& st = m.stages[t];
        StageTemplate& ns = out.stages[t];
        ns.locals = st.locals;
        ns.c_y = st.c_y;
        ns.C = st.C;
        ns.b = st.b;
        ns.sense = st.sense;
        ns.L = st.L;
        maps[t].resize(st.state.size());
        for (std::size_t r = 0; r < st.state.size(); ++r) {
            const VarSpec& v = st.state[r];
            CompMap& cm = maps[t][r];
            cm.new_start = static_cast<int>(ns.state.size());
            if (v.kind == VarKind::binary) {
                cm.bits = 0;
                ns.state.push_back(v);
                ns.c_x.push_back(st.c_x[r]);
                continue;
            }
            if (v.kind == VarKind::continuous)
                throw ConfigError("binarize_state: continuous state component is unsupported");
            const double span = v.hi - v.lo;
            int bits = 1;
            while ((std::exp2(bits) - 1.0) < span) ++bits;
            cm.bits = bits;
            cm.lo = v.lo;
            if (v.lo != 0.0 && st.c_x[r] != 0.0)
                throw ConfigError(
                    "binarize_state: costed integer state with nonzero lower bound would "
                    "shift the objective by a constant");
            for (int i = 0; i < bits; ++i) {
                ns.state.push_back({VarKind::binary, 0.0, 1.0});
                ns.c_x.push_back(st.c_x[r] * std::exp2(i));
            }
            if (std::exp2(bits) - 1.0 > span) {
                const int row = static_cast<int>(ns.b.size());
                ns.b.push_back(span);
                ns.sense.push_back(RowSense::L);
                for (int i = 0; i < bits; ++i)
                    ns.A.push_back({row, cm.new_start + i, std::exp2(i)});
            }
        }
    }

    // remap triplets; rhs shifts from nonzero lo fold into b and rhs overrides
    for (int t = 0; t < m.T; ++t) {
        const StageTemplate& st = m.stages[t];
        StageTemplate& ns = out.stages[t];
        std::vector<double> adj(st.b.size(), 0.0);
        const auto remap = [&](const std::vector<Triplet>& ts, const std::vector<CompMap>* cmap,
                               std::vector<Triplet>& dest) {
            for (const Triplet& e : ts) {
                if (!cmap) {
                    dest.push_back(e);
                    continue;
                }
                const CompMap& cm = (*cmap)[e.col];
                if (cm.bits == 0) {
                    dest.push_back({e.row, cm.new_start, e.val});
                } else {
                    for (int i = 0; i < cm.bits; ++i)
                        dest.push_back({e.row, cm.new_start + i, e.val * std::exp2(i)});
                    adj[e.row] += e.val * cm.lo;
                }
            }
        };
        remap(st.A, &maps[t], ns.A);
        remap(st.B, t == 0 ? nullptr : &maps[t - 1], ns.B);
        for (std::size_t i = 0; i < adj.size(); ++i) ns.b[i] -= adj[i];
        for (Realization& rz : out.realizations[t]) {
            std::vector<Override> expanded;
            for (const Override& o : rz.overrides) {
                if (o.target == Override::Target::rhs) {
                    expanded.push_back({o.target, o.position, o.value - adj[o.position]});
                } else if (o.target == Override::Target::objective_x) {
                    const CompMap& cm = maps[t][o.position];
                    if (cm.bits == 0) {
                        expanded.push_back({o.target, cm.new_start, o.value});
                    } else if (cm.lo != 0.0) {
                        throw ConfigError(
                            "binarize_state: objective override on integer state with nonzero "
                            "lower bound");
                    } else {
                        for (int i = 0; i < cm.bits; ++i)
                            expanded.push_back(
                                {o.target, cm.new_start + i, o.value * std::exp2(i)});
                    }
                } else {
                    expanded.push_back(o);
                }
            }
            rz.overrides = std::move(expanded);
        }
    }
    return out;
}

}  // namespace sddip
