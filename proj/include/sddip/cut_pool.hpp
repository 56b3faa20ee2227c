#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "sddip/errors.hpp"

namespace sddip {

enum class CutKind : char { benders, strengthened, integer_l, lagrangian };

inline const char* cut_kind_name(CutKind k) {
    switch (k) {
        case CutKind::benders: return "benders";
        case CutKind::strengthened: return "strengthened";
        case CutKind::integer_l: return "integer-L";
        case CutKind::lagrangian: return "lagrangian";
    }
    return "?";
}

/// Affine minorant theta >= intercept + gradient . x of an expected
/// cost-to-go function.  `stage` is the stage whose theta it bounds.
struct Cut {
    int stage = 0;
    double intercept = 0.0;
    std::vector<double> gradient;
    CutKind kind = CutKind::benders;
    int iteration = 0;
    bool tight = false;  // emitted with a tightness certificate at its incumbent

    double value_at(const std::vector<double>& x) const {
        if (x.size() != gradient.size()) throw ContractError("cut: state dimension mismatch");
        double v = intercept;
        for (std::size_t r = 0; r < x.size(); ++r) v += gradient[r] * x[r];
        return v;
    }
};

struct CutPool {
    int stage = 0;
    double lower_bound = 0.0;  // the stage floor L_t
    std::vector<Cut> cuts;

    /// Appends the cut unless an existing one matches within 1e-9 per
    /// coefficient.  Returns whether the cut was kept.
    bool add(Cut c) {
        for (const Cut& e : cuts) {
            if (e.gradient.size() != c.gradient.size()) continue;
            if (std::abs(e.intercept - c.intercept) > 1e-9) continue;
            bool same = true;
            for (std::size_t r = 0; r < c.gradient.size() && same; ++r)
                same = std::abs(e.gradient[r] - c.gradient[r]) <= 1e-9;
            if (same) return false;
        }
        cuts.push_back(std::move(c));
        return true;
    }

    double evaluate(const std::vector<double>& x) const {
        double best = lower_bound;
        for (const Cut& c : cuts) best = std::max(best, c.value_at(x));
        return best;
    }
};

inline double evaluate_pool(const CutPool& pool, const std::vector<double>& x) {
    return pool.evaluate(x);
}

/// One realization's contribution to an aggregated cut.
struct CutPart {
    double q = 0.0;
    double v = 0.0;
    std::vector<double> pi;
};

/// Probability-weighted aggregation of per-realization cut parts.
inline Cut aggregate_cuts(const std::vector<CutPart>& parts) {
    if (parts.empty()) throw ContractError("aggregate_cuts: no parts");
    double qsum = 0.0;
    for (const CutPart& p : parts) qsum += p.q;
    if (std::abs(qsum - 1.0) > 1e-9) throw ModelError("aggregate_cuts: probabilities do not sum to 1");
    Cut c;
    c.intercept = 0.0;
    c.gradient.assign(parts.front().pi.size(), 0.0);
    for (const CutPart& p : parts) {
        if (p.pi.size() != c.gradient.size())
            throw ContractError("aggregate_cuts: gradient dimension mismatch");
        c.intercept += p.q * p.v;
        for (std::size_t r = 0; r < p.pi.size(); ++r) c.gradient[r] += p.q * p.pi[r];
    }
    return c;
}

/// Closed-form optimal Lagrangian multipliers for a binary incumbent:
/// pi_r = Q_hat - L when x_hat_r = 1 and L - Q_hat otherwise.
inline std::vector<double> intL_multipliers(double Q_hat, double L,
                                            const std::vector<double>& x_hat) {
    double gap = Q_hat - L;
    if (gap < -1e-6) throw ContractError("intL_multipliers: Q_hat below the stage lower bound");
    if (gap < 0) gap = 0;
    std::vector<double> pi(x_hat.size());
    for (std::size_t r = 0; r < x_hat.size(); ++r) {
        const double v = x_hat[r];
        if (std::abs(v) <= 1e-6)
            pi[r] = -gap;
        else if (std::abs(v - 1.0) <= 1e-6)
            pi[r] = gap;
        else
            throw ContractError("intL_multipliers: x_hat is not binary");
    }
    return pi;
}

}  // namespace sddip
