#pragma once

#include "lts/types.hpp"

#include <utility>

namespace lts {

/// Translates and scales every feature column and the response to zero sum and
/// unit square-sum. Throws DataError (naming the column) on constant input.
StandardizedInstance standardize(const Dataset& data);

/// Draws an instance with features N(0, variance 100), responses y = A 1 + eps
/// with eps N(0, variance 10), and floor(tau*m) randomly chosen responses
/// shifted by +1000. Deterministic for a fixed seed.
std::pair<Dataset, GroundTruth> generate_synthetic(Index n, Index m, double tau,
                                                   std::uint64_t seed);

/// Relative coefficient error ||x_star - x_hat||^2 / ||x_star||^2.
double risk(const Vector& x_hat, const GroundTruth& truth);

/// Fraction of planted outliers flagged by z_hat. Throws UndefinedMetricError
/// when no outliers were planted.
double recall(const Vector& z_hat, const GroundTruth& truth);

/// Maps standardized-coordinate coefficients back to original units.
/// Returns (coefficients, intercept) such that predictions agree row by row.
std::pair<Vector, double> unstandardize_solution(const Solution& sol,
                                                 const StandardizedInstance& inst);

}  // namespace lts
