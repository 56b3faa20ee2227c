#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "sddip/errors.hpp"

namespace sddip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { G, L, E };          // >=, <=, ==
enum class RowTag : char { copy, body, cut };    // copy rows carry the duals we harvest

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective = kInf;     // +inf when infeasible, -inf when unbounded
    std::vector<double> primal;  // structural variables only
    std::vector<double> duals;   // one per row: sensitivity of the optimum to that row's rhs
};

/// Minimization LP in column-major sparse form with per-variable bounds.
/// Rows are kept with their sense; a slack per row turns the system into
/// equalities internally.
struct LinearProgram {
    struct Entry {
        int row;
        double val;
    };

    std::vector<std::vector<Entry>> cols;
    std::vector<double> obj, lo, up;  // per column
    double obj_offset = 0.0;
    std::vector<double> rhs;
    std::vector<RowSense> sense;
    std::vector<RowTag> tag;

    int num_cols() const { return static_cast<int>(cols.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    int add_col(double c, double lb, double ub) {
        cols.emplace_back();
        obj.push_back(c);
        lo.push_back(lb);
        up.push_back(ub);
        return num_cols() - 1;
    }

    int add_row(double b, RowSense s, RowTag t = RowTag::body) {
        rhs.push_back(b);
        sense.push_back(s);
        tag.push_back(t);
        return num_rows() - 1;
    }

    /// Accumulates duplicate (row, col) entries, triplet-style.
    void add_coeff(int row, int col, double v) {
        if (row < 0 || row >= num_rows() || col < 0 || col >= num_cols())
            throw ModelError("add_coeff: index out of range");
        for (auto& e : cols[col])
            if (e.row == row) {
                e.val += v;
                return;
            }
        if (v != 0.0) cols[col].push_back({row, v});
    }
};

namespace detail {

inline void validate_lp(const LinearProgram& lp, const std::vector<double>& lo,
                        const std::vector<double>& up) {
    const int n = lp.num_cols(), m = lp.num_rows();
    if (static_cast<int>(lp.obj.size()) != n || static_cast<int>(lo.size()) != n ||
        static_cast<int>(up.size()) != n)
        throw ModelError("lp: column array sizes disagree");
    if (static_cast<int>(lp.sense.size()) != m || static_cast<int>(lp.tag.size()) != m)
        throw ModelError("lp: row array sizes disagree");
    for (int j = 0; j < n; ++j) {
        if (std::isnan(lo[j]) || std::isnan(up[j]) || !std::isfinite(lp.obj[j]))
            throw ModelError("lp: NaN bound or non-finite objective coefficient");
        for (const auto& e : lp.cols[j]) {
            if (e.row < 0 || e.row >= m || !std::isfinite(e.val))
                throw ModelError("lp: bad matrix entry");
        }
    }
    for (double b : lp.rhs)
        if (!std::isfinite(b)) throw ModelError("lp: non-finite rhs");
    if (!std::isfinite(lp.obj_offset)) throw ModelError("lp: non-finite objective offset");
}

/// Bounded-variable two-phase revised simplex with dense LU basis
/// factorization and product-form eta updates.  One instance per solve.
class Simplex {
  public:
    Simplex(const LinearProgram& lp, const std::vector<double>& lo, const std::vector<double>& up)
        : lp_(lp), n_(lp.num_cols()), m_(lp.num_rows()) {
        clo_.assign(lo.begin(), lo.end());
        cup_.assign(up.begin(), up.end());
        for (int i = 0; i < m_; ++i) {
            switch (lp_.sense[i]) {
                case RowSense::G: clo_.push_back(-kInf); cup_.push_back(0.0); break;
                case RowSense::L: clo_.push_back(0.0); cup_.push_back(kInf); break;
                case RowSense::E: clo_.push_back(0.0); cup_.push_back(0.0); break;
            }
        }
    }

    /// Runs both phases.  Returns nullopt when the optimum fails the KKT
    /// verification (caller retries with Bland's rule); throws SolverFailure
    /// on outright numerical breakdown.
    std::optional<LpSolution> run(bool bland_from_start) {
        bland_ = bland_from_start;
        refactor_limit_ = bland_from_start ? 32 : 64;
        setup_basis();
        if (!artif_row_.empty()) {
            set_phase_costs(1);
            if (optimize(1) != PhaseEnd::optimal)
                throw SolverFailure("lp: phase-1 breakdown (unbounded infeasibility measure)");
            if (phase1_objective() > 1e-7) {
                LpSolution s;
                s.status = LpStatus::infeasible;
                s.objective = kInf;
                return s;
            }
            for (std::size_t k = 0; k < artif_row_.size(); ++k) {
                const int col = n_ + m_ + static_cast<int>(k);
                clo_[col] = cup_[col] = 0.0;  // pin artificials for phase 2
            }
        }
        set_phase_costs(2);
        if (optimize(2) == PhaseEnd::unbounded) {
            LpSolution s;
            s.status = LpStatus::unbounded;
            s.objective = -kInf;
            return s;
        }
        return finalize();
    }

  private:
    enum class VS : char { Basic, Lower, Upper, Free };
    enum class PhaseEnd { optimal, unbounded };

    struct Eta {
        int slot;
        double pivot;
        std::vector<std::pair<int, double>> nz;  // entries of the pivot column, slot excluded
    };

    const LinearProgram& lp_;
    int n_, m_;
    std::vector<double> clo_, cup_;  // bounds: structurals, slacks, artificials
    std::vector<double> cost_;
    std::vector<VS> state_;
    std::vector<int> basis_;  // slot -> column
    std::vector<double> xB_;  // slot -> value
    std::vector<int> artif_row_;
    std::vector<double> artif_sig_;
    std::vector<double> lu_;
    std::vector<int> perm_;
    std::vector<Eta> etas_;
    double dtol_ = 1e-9;
    bool bland_ = false;
    int refactor_limit_ = 64;

    int total_cols() const { return static_cast<int>(state_.size()); }

    template <class F>
    void for_each_entry(int j, F&& f) const {
        if (j < n_) {
            for (const auto& e : lp_.cols[j]) f(e.row, e.val);
        } else if (j < n_ + m_) {
            f(j - n_, 1.0);
        } else {
            const int k = j - n_ - m_;
            f(artif_row_[k], artif_sig_[k]);
        }
    }

    double nonbasic_value(int j) const {
        switch (state_[j]) {
            case VS::Lower: return clo_[j];
            case VS::Upper: return cup_[j];
            default: return 0.0;
        }
    }

    void setup_basis() {
        state_.assign(n_ + m_, VS::Lower);
        for (int j = 0; j < n_; ++j) {
            if (clo_[j] > -kInf)
                state_[j] = VS::Lower;
            else if (cup_[j] < kInf)
                state_[j] = VS::Upper;
            else
                state_[j] = VS::Free;
        }
        std::vector<double> r(lp_.rhs);
        for (int j = 0; j < n_; ++j) {
            const double v = nonbasic_value(j);
            if (v != 0.0)
                for (const auto& e : lp_.cols[j]) r[e.row] -= e.val * v;
        }
        basis_.resize(m_);
        xB_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            const int sj = n_ + i;
            if (r[i] >= clo_[sj] && r[i] <= cup_[sj]) {
                basis_[i] = sj;
                state_[sj] = VS::Basic;
                xB_[i] = r[i];
            } else {
                // slack pinned at its nearest bound; an artificial absorbs the rest
                const bool high = r[i] > cup_[sj];
                state_[sj] = high ? VS::Upper : VS::Lower;
                const double resid = r[i] - nonbasic_value(sj);
                artif_row_.push_back(i);
                artif_sig_.push_back(resid > 0 ? 1.0 : -1.0);
                clo_.push_back(0.0);
                cup_.push_back(kInf);
                state_.push_back(VS::Basic);
                basis_[i] = static_cast<int>(state_.size()) - 1;
                xB_[i] = std::abs(resid);
            }
        }
        refactor();
    }

    void set_phase_costs(int phase) {
        cost_.assign(total_cols(), 0.0);
        double maxc = 1.0;
        if (phase == 1) {
            for (std::size_t k = 0; k < artif_row_.size(); ++k) cost_[n_ + m_ + k] = 1.0;
        } else {
            for (int j = 0; j < n_; ++j) {
                cost_[j] = lp_.obj[j];
                maxc = std::max(maxc, std::abs(lp_.obj[j]));
            }
        }
        dtol_ = 1e-9 * (1.0 + maxc);
    }

    double phase1_objective() const {
        double s = 0.0;
        for (std::size_t k = 0; k < artif_row_.size(); ++k) {
            const int col = n_ + m_ + static_cast<int>(k);
            s += (state_[col] == VS::Basic) ? xB_[pos_of(col)] : nonbasic_value(col);
        }
        return s;
    }

    int pos_of(int col) const {
        for (int i = 0; i < m_; ++i)
            if (basis_[i] == col) return i;
        throw ContractError("simplex: column not basic");
    }

    void refactor() {
        etas_.clear();
        lu_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        perm_.resize(m_);
        std::iota(perm_.begin(), perm_.end(), 0);
        for (int s = 0; s < m_; ++s)
            for_each_entry(basis_[s],
                           [&](int r, double v) { lu_[static_cast<std::size_t>(r) * m_ + s] += v; });
        for (int k = 0; k < m_; ++k) {
            int p = k;
            double best = std::abs(lu_[static_cast<std::size_t>(perm_[k]) * m_ + k]);
            for (int i = k + 1; i < m_; ++i) {
                const double a = std::abs(lu_[static_cast<std::size_t>(perm_[i]) * m_ + k]);
                if (a > best) {
                    best = a;
                    p = i;
                }
            }
            if (best < 1e-12) throw SolverFailure("lp: singular basis at refactorization");
            std::swap(perm_[k], perm_[p]);
            const std::size_t rk = static_cast<std::size_t>(perm_[k]) * m_;
            const double pivinv = 1.0 / lu_[rk + k];
            for (int i = k + 1; i < m_; ++i) {
                const std::size_t ri = static_cast<std::size_t>(perm_[i]) * m_;
                const double l = lu_[ri + k] * pivinv;
                if (l != 0.0) {
                    lu_[ri + k] = l;
                    for (int j = k + 1; j < m_; ++j) lu_[ri + j] -= l * lu_[rk + j];
                }
            }
        }
        recompute_basics();
    }

    void lu_solve(std::vector<double>& v) const {
        std::vector<double> z(m_);
        for (int k = 0; k < m_; ++k) {
            double s = v[perm_[k]];
            const std::size_t rk = static_cast<std::size_t>(perm_[k]) * m_;
            for (int j = 0; j < k; ++j) s -= lu_[rk + j] * z[j];
            z[k] = s;
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double s = z[k];
            const std::size_t rk = static_cast<std::size_t>(perm_[k]) * m_;
            for (int j = k + 1; j < m_; ++j) s -= lu_[rk + j] * z[j];
            z[k] = s / lu_[rk + k];
        }
        v = std::move(z);
    }

    void lu_solve_transpose(std::vector<double>& v) const {
        std::vector<double> z(m_);
        for (int k = 0; k < m_; ++k) {
            double s = v[k];
            for (int j = 0; j < k; ++j) s -= lu_[static_cast<std::size_t>(perm_[j]) * m_ + k] * z[j];
            z[k] = s / lu_[static_cast<std::size_t>(perm_[k]) * m_ + k];
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double s = z[k];
            for (int j = k + 1; j < m_; ++j)
                s -= lu_[static_cast<std::size_t>(perm_[j]) * m_ + k] * z[j];
            z[k] = s;
        }
        for (int k = 0; k < m_; ++k) v[perm_[k]] = z[k];
    }

    void ftran(std::vector<double>& v) const {
        lu_solve(v);
        for (const Eta& e : etas_) {
            const double vr = v[e.slot] / e.pivot;
            if (vr != 0.0)
                for (const auto& [i, wi] : e.nz) v[i] -= wi * vr;
            v[e.slot] = vr;
        }
    }

    void btran(std::vector<double>& v) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[it->slot];
            for (const auto& [i, wi] : it->nz) s -= wi * v[i];
            v[it->slot] = s / it->pivot;
        }
        lu_solve_transpose(v);
    }

    void recompute_basics() {
        std::vector<double> r(lp_.rhs);
        for (int j = 0; j < total_cols(); ++j) {
            if (state_[j] == VS::Basic) continue;
            const double v = nonbasic_value(j);
            if (v != 0.0) for_each_entry(j, [&](int row, double a) { r[row] -= a * v; });
        }
        ftran(r);
        xB_ = std::move(r);
    }

    void compute_duals(std::vector<double>& y) const {
        y.resize(m_);
        for (int i = 0; i < m_; ++i) y[i] = cost_[basis_[i]];
        btran(y);
    }

    double reduced_cost(int j, const std::vector<double>& y) const {
        double d = cost_[j];
        for_each_entry(j, [&](int row, double a) { d -= y[row] * a; });
        return d;
    }

    // entering column, its reduced cost, direction (+1 increase / -1 decrease)
    std::optional<std::tuple<int, double, int>> price(const std::vector<double>& y) const {
        int best = -1, bestdir = +1;
        double bestscore = dtol_, bestd = 0.0;
        for (int j = 0; j < total_cols(); ++j) {
            const VS s = state_[j];
            if (s == VS::Basic || clo_[j] == cup_[j]) continue;
            const double d = reduced_cost(j, y);
            double viol;
            int dir;
            if (s == VS::Lower) {
                viol = -d;
                dir = +1;
            } else if (s == VS::Upper) {
                viol = d;
                dir = -1;
            } else {
                viol = std::abs(d);
                dir = d < 0 ? +1 : -1;
            }
            if (viol <= dtol_) continue;
            if (bland_) return std::make_tuple(j, d, dir);
            if (viol > bestscore) {
                best = j;
                bestscore = viol;
                bestd = d;
                bestdir = dir;
            }
        }
        if (best < 0) return std::nullopt;
        return std::make_tuple(best, bestd, bestdir);
    }

    struct Ratio {
        enum Kind { pivot, flip, unbounded } kind;
        int slot = -1;
        double t = 0.0;
        int hit = 0;  // -1: leaving settles at lower bound, +1: at upper
    };

    Ratio ratio_test(int q, int dir, const std::vector<double>& w) const {
        const double t_own = (clo_[q] > -kInf && cup_[q] < kInf) ? cup_[q] - clo_[q] : kInf;
        for (const double piv_tol : {1e-8, 1e-11}) {
            double tmin = kInf, key = 0.0;
            int slot = -1, hit = 0;
            for (int i = 0; i < m_; ++i) {
                const double rate = -dir * w[i];
                double t, cand_hit;
                if (rate > piv_tol) {
                    if (cup_[basis_[i]] >= kInf) continue;
                    t = (cup_[basis_[i]] - xB_[i]) / rate;
                    cand_hit = +1;
                } else if (rate < -piv_tol) {
                    if (clo_[basis_[i]] <= -kInf) continue;
                    t = (clo_[basis_[i]] - xB_[i]) / rate;
                    cand_hit = -1;
                } else {
                    continue;
                }
                if (t < 0) t = 0;
                const bool better =
                    t < tmin - 1e-9 ||
                    (t < tmin + 1e-9 && (bland_ ? (slot < 0 || basis_[i] < basis_[slot])
                                                : std::abs(w[i]) > key));
                if (better) {
                    tmin = std::min(t, tmin);
                    slot = i;
                    hit = static_cast<int>(cand_hit);
                    key = std::abs(w[i]);
                }
            }
            if (t_own <= tmin) {
                if (t_own >= kInf) {
                    if (piv_tol > 1e-10) continue;  // one more sweep with a finer pivot floor
                    return {Ratio::unbounded, -1, 0.0, 0};
                }
                return {Ratio::flip, -1, t_own, 0};
            }
            return {Ratio::pivot, slot, tmin, hit};
        }
        return {Ratio::unbounded, -1, 0.0, 0};
    }

    void shift_basics(int dir, const std::vector<double>& w, double t) {
        if (t == 0.0) return;
        for (int i = 0; i < m_; ++i) xB_[i] -= dir * w[i] * t;
    }

    PhaseEnd optimize(int phase) {
        const long stall_limit = 2L * (m_ + total_cols());
        const long max_pivots = 20000L + 200L * (m_ + total_cols());
        long stall = 0;
        std::vector<double> y, w;
        for (long it = 0; it <= max_pivots; ++it) {
            compute_duals(y);
            const auto entering = price(y);
            if (!entering) return PhaseEnd::optimal;
            const auto [q, dq, dir] = *entering;
            w.assign(m_, 0.0);
            for_each_entry(q, [&](int row, double a) { w[row] += a; });
            ftran(w);
            const Ratio rr = ratio_test(q, dir, w);
            if (rr.kind == Ratio::unbounded) {
                if (phase == 1) throw SolverFailure("lp: phase-1 breakdown (ratio test)");
                return PhaseEnd::unbounded;
            }
            if (rr.kind == Ratio::flip) {
                shift_basics(dir, w, rr.t);
                state_[q] = state_[q] == VS::Lower ? VS::Upper : VS::Lower;
            } else {
                if (std::abs(w[rr.slot]) < 1e-7 && !etas_.empty()) {
                    refactor();  // stale factorization suspected; redo this iteration
                    --it;
                    continue;
                }
                if (std::abs(w[rr.slot]) < 1e-11) throw SolverFailure("lp: pivot too small");
                const int leave = basis_[rr.slot];
                shift_basics(dir, w, rr.t);
                state_[leave] = rr.hit > 0 ? VS::Upper : VS::Lower;
                basis_[rr.slot] = q;
                state_[q] = VS::Basic;
                xB_[rr.slot] = nonbasic_value_of_entering(q, dir) + dir * rr.t;
                Eta e;
                e.slot = rr.slot;
                e.pivot = w[rr.slot];
                for (int i = 0; i < m_; ++i)
                    if (i != rr.slot && std::abs(w[i]) > 1e-12) e.nz.emplace_back(i, w[i]);
                etas_.push_back(std::move(e));
                if (static_cast<int>(etas_.size()) >= refactor_limit_) refactor();
            }
            if (std::abs(dq) * rr.t > 1e-12)
                stall = 0;
            else if (++stall > stall_limit)
                bland_ = true;
        }
        throw SolverFailure("lp: pivot limit exceeded");
    }

    // bound value the entering variable moves away from (state already flipped to Basic)
    double nonbasic_value_of_entering(int q, int dir) const {
        if (clo_[q] > -kInf && cup_[q] < kInf) return dir > 0 ? clo_[q] : cup_[q];
        if (clo_[q] > -kInf) return clo_[q];
        if (cup_[q] < kInf) return cup_[q];
        return 0.0;
    }

    std::optional<LpSolution> finalize() {
        refactor();  // clean factorization and drift-free basic values
        std::vector<double> y;
        compute_duals(y);
        std::vector<double> val(total_cols());
        for (int j = 0; j < total_cols(); ++j)
            val[j] = state_[j] == VS::Basic ? 0.0 : nonbasic_value(j);
        for (int i = 0; i < m_; ++i) val[basis_[i]] = xB_[i];

        double obj = lp_.obj_offset;
        for (int j = 0; j < n_; ++j) obj += lp_.obj[j] * val[j];

        std::vector<double> res(lp_.rhs);
        for (int j = 0; j < total_cols(); ++j)
            if (val[j] != 0.0) for_each_entry(j, [&](int row, double a) { res[row] -= a * val[j]; });
        double maxres = 0.0;
        for (double r : res) maxres = std::max(maxres, std::abs(r));

        double maxbnd = 0.0;
        for (int j = 0; j < total_cols(); ++j) {
            if (clo_[j] > -kInf) maxbnd = std::max(maxbnd, clo_[j] - val[j]);
            if (cup_[j] < kInf) maxbnd = std::max(maxbnd, val[j] - cup_[j]);
        }

        double dualobj = 0.0;
        for (int i = 0; i < m_; ++i) dualobj += y[i] * lp_.rhs[i];
        for (int j = 0; j < total_cols(); ++j) {
            if (state_[j] == VS::Basic) continue;
            if (val[j] != 0.0) dualobj += reduced_cost(j, y) * val[j];
        }
        const double gap = std::abs((obj - lp_.obj_offset) - dualobj);

        if (maxres > 1e-7 || maxbnd > 1e-7 || gap > 1e-7 * (1.0 + std::abs(obj)))
            return std::nullopt;  // caller re-solves with Bland's rule

        LpSolution s;
        s.status = LpStatus::optimal;
        s.objective = obj;
        s.primal.assign(val.begin(), val.begin() + n_);
        s.duals = std::move(y);
        return s;
    }
};

}  // namespace detail

/// Solves the LP with the given bound overrides for structural variables
/// (used by branch-and-bound to tighten bounds without rebuilding the LP).
inline LpSolution solve_lp(const LinearProgram& lp, const std::vector<double>& lo,
                           const std::vector<double>& up) {
    detail::validate_lp(lp, lo, up);
    for (int j = 0; j < lp.num_cols(); ++j)
        if (lo[j] > up[j] + 1e-12) {
            LpSolution s;
            s.status = LpStatus::infeasible;
            s.objective = kInf;
            return s;
        }
    try {
        detail::Simplex first(lp, lo, up);
        if (auto r = first.run(false)) return std::move(*r);
    } catch (const SolverFailure&) {
        // fall through to the deterministic Bland's-rule retry
    }
    detail::Simplex second(lp, lo, up);
    if (auto r = second.run(true)) return std::move(*r);
    throw SolverFailure("lp: verification failed after Bland's-rule retry");
}

inline LpSolution solve_lp(const LinearProgram& lp) { return solve_lp(lp, lp.lo, lp.up); }

/// Duals of rows tagged copy, in the order the rows were added
/// (one per state component by construction).
inline std::vector<double> extract_copy_duals(const LpSolution& sol, const LinearProgram& lp) {
    if (sol.status != LpStatus::optimal)
        throw ContractError("extract_copy_duals: solution is not optimal");
    if (static_cast<int>(sol.duals.size()) != lp.num_rows())
        throw ContractError("extract_copy_duals: solution does not match lp");
    std::vector<double> out;
    for (int i = 0; i < lp.num_rows(); ++i)
        if (lp.tag[i] == RowTag::copy) out.push_back(sol.duals[i]);
    return out;
}

}  // namespace sddip
