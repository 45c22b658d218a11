#pragma once

#include "lts/instance.hpp"
#include "lts/relax.hpp"
#include "lts/types.hpp"

namespace lts {

struct BnbParams {
    Method formulation = Method::ConicPlus;  // BigM, Conic or ConicPlus
    double time_limit_s = 600.0;
    long node_limit = 50'000'000;
    double gap_tol = 1e-6;
    double integrality_tol = 1e-6;
    double big_m = 1000.0;
    bool parallel = false;
    bool node_retune = false;  // re-tune weights inside subtrees with fixed-retained rows
    bool warm_start = false;   // seed the incumbent with the alternating heuristic
};

enum class SolveStatus { Optimal, TimeLimit, NodeLimit, WarningNumerical };

struct SolveReport {
    Solution incumbent;
    double lower_bound = 0.0;
    double gap = 0.0;  // (UB - LB) / max(UB, 1e-12)
    long nodes = 0;
    double time_s = 0.0;
    SolveStatus status = SolveStatus::Optimal;
    int alg1_iterations = 0;  // conic-plus only
    Vector d_weights;         // conic-plus only (empty otherwise)
};

const char* status_name(SolveStatus s);

/// Best-bound branch and bound over the binary discard variables. Nodes are
/// pruned only on certified lower bounds; branching picks the most fractional
/// free variable (ties to the lowest index).
SolveReport solve_mio(const SolveInstance& inst, const BnbParams& params);

/// Exact optimum by enumerating every discard set within the budget and
/// refitting the ridge; refuses when C(m, budget) * (budget + 1) exceeds 1e6.
Solution enumerate_oracle(const SolveInstance& inst);

}  // namespace lts
