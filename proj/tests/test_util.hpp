#pragma once

#include "lts/core.hpp"
#include "lts/instance.hpp"
#include "lts/types.hpp"

#include <random>

namespace lts::test {

inline Matrix random_spd(Index k, std::mt19937& rng, double jitter = 0.1) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix B(k, k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) B(i, j) = dist(rng);
    }
    Matrix S = B.transpose() * B + jitter * Matrix::Identity(k, k);
    return 0.5 * (S + S.transpose());
}

inline Vector random_vector(Index k, std::mt19937& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Vector v(k);
    for (Index i = 0; i < k; ++i) v(i) = dist(rng);
    return v;
}

/// Standardized synthetic instance ready for the solvers.
inline SolveInstance make_test_instance(Index n, Index m, double tau, std::uint64_t seed,
                                        double lambda, int budget,
                                        Method method = Method::ConicPlus,
                                        InterceptMode mode = InterceptMode::Zero) {
    const auto [data, truth] = generate_synthetic(n, m, tau, seed);
    (void)truth;
    ProblemSpec spec;
    spec.lambda = lambda;
    spec.budget = budget;
    spec.method = method;
    spec.intercept_mode = mode;
    return make_solve_instance(standardize(data), spec);
}

/// Direct SolveInstance from raw pieces (no standardization), for hand-sized
/// fixtures whose exact numbers matter.
inline SolveInstance raw_instance(Matrix A, Vector y, double lambda, int budget,
                                  std::vector<std::uint8_t> flaggable = {}) {
    SolveInstance inst;
    const Index n = A.cols();
    inst.A = std::move(A);
    inst.y = std::move(y);
    inst.T_eff = Matrix::Identity(n, n);
    inst.lambda = lambda;
    inst.budget = budget;
    if (flaggable.empty()) {
        inst.flaggable.assign(static_cast<size_t>(inst.A.rows()), 1);
    } else {
        inst.flaggable = std::move(flaggable);
    }
    inst.flaggable_count = 0;
    Matrix q = lambda * Matrix::Identity(n, n);
    for (Index i = 0; i < inst.A.rows(); ++i) {
        if (inst.is_flaggable(i)) {
            ++inst.flaggable_count;
        } else {
            q.noalias() += inst.A.row(i).transpose() * inst.A.row(i);
        }
    }
    inst.Q_reg = q;
    inst.Q_reg_factor = factor_spd(inst.Q_reg);
    inst.R = inst.A.transpose() * inst.A + lambda * Matrix::Identity(n, n);
    inst.R = 0.5 * (inst.R + inst.R.transpose());
    return inst;
}

}  // namespace lts::test
