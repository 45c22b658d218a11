#include "lts/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lts {

Index Dataset::reliable_count() const {
    return static_cast<Index>(std::count(reliable.begin(), reliable.end(), true));
}

Index StandardizedInstance::reliable_count() const {
    return static_cast<Index>(std::count(reliable.begin(), reliable.end(), true));
}

void Dataset::validate() const {
    const Index m = features.rows();
    const Index n = features.cols();
    if (m < 1 || n < 1) throw DataError("dataset must have at least one row and one column");
    if (response.size() != m) throw DataError("response length does not match feature rows");
    if (!reliable.empty() && static_cast<Index>(reliable.size()) != m) {
        throw DataError("reliable flag length does not match feature rows");
    }
    if (!column_names.empty() && static_cast<Index>(column_names.size()) != n) {
        throw DataError("column name count does not match feature columns");
    }
    if (!features.allFinite() || !response.allFinite()) {
        throw DataError("dataset contains non-finite entries");
    }
    if (reliable_count() >= m) {
        throw DataError("all rows marked reliable; nothing left to fit outliers against");
    }
}

std::string method_name(Method m) {
    switch (m) {
        case Method::BigM: return "big-m";
        case Method::Conic: return "conic";
        case Method::ConicPlus: return "conic-plus";
        case Method::AltOpt: return "alt-opt";
        case Method::Lad: return "lad";
        case Method::LsL2: return "ls-l2";
    }
    return "unknown";
}

namespace {

// Zero-sum / unit-square-sum transform of one column. Returns false when the
// column is (numerically) constant.
bool column_moments(const Eigen::Ref<const Vector>& v, ColumnTransform& t) {
    const Index m = v.size();
    const double mean = v.sum() / static_cast<double>(m);
    const double ss = (v.array() - mean).square().sum();
    const double scale = std::sqrt(ss);
    if (!(scale > 1e-12 * (1.0 + v.cwiseAbs().maxCoeff()))) return false;
    t.shift = mean;
    t.scale = scale;
    return true;
}

}  // namespace

StandardizedInstance standardize(const Dataset& data) {
    data.validate();
    const Index m = data.rows();
    const Index n = data.cols();

    StandardizedInstance out;
    out.A.resize(m, n);
    out.column_transform.resize(static_cast<size_t>(n));
    for (Index j = 0; j < n; ++j) {
        ColumnTransform t;
        if (!column_moments(data.features.col(j), t)) {
            const std::string name = data.column_names.empty()
                                         ? "column " + std::to_string(j)
                                         : data.column_names[static_cast<size_t>(j)];
            throw DataError("degenerate data: " + name + " is constant");
        }
        out.A.col(j) = (data.features.col(j).array() - t.shift) / t.scale;
        out.column_transform[static_cast<size_t>(j)] = t;
    }

    ColumnTransform ty;
    if (!column_moments(data.response, ty)) {
        throw DataError("degenerate data: response is constant");
    }
    out.y = (data.response.array() - ty.shift) / ty.scale;
    out.response_transform = ty;

    out.reliable = data.reliable;
    out.column_names = data.column_names;
    return out;
}

std::pair<Dataset, GroundTruth> generate_synthetic(Index n, Index m, double tau,
                                                   std::uint64_t seed) {
    if (n < 1 || m < 1) throw PreconditionError("generate_synthetic: n, m must be >= 1");
    if (!(tau >= 0.0 && tau < 1.0)) throw PreconditionError("generate_synthetic: tau must be in [0,1)");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> feature_dist(0.0, std::sqrt(100.0));
    std::normal_distribution<double> noise_dist(0.0, std::sqrt(10.0));

    Dataset data;
    data.features.resize(m, n);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) data.features(i, j) = feature_dist(rng);
    }

    GroundTruth truth;
    truth.x_star = Vector::Ones(n);

    data.response = data.features * truth.x_star;
    for (Index i = 0; i < m; ++i) data.response(i) += noise_dist(rng);

    const Index n_out = static_cast<Index>(std::floor(tau * static_cast<double>(m)));
    std::vector<Index> idx(static_cast<size_t>(m));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<size_t>(n_out));
    std::sort(idx.begin(), idx.end());
    for (Index i : idx) data.response(i) += 1000.0;
    truth.outlier_set = std::move(idx);

    data.column_names.resize(static_cast<size_t>(n));
    for (Index j = 0; j < n; ++j) {
        data.column_names[static_cast<size_t>(j)] = "x" + std::to_string(j + 1);
    }
    return {std::move(data), std::move(truth)};
}

double risk(const Vector& x_hat, const GroundTruth& truth) {
    if (x_hat.size() != truth.x_star.size()) {
        throw PreconditionError("risk: coefficient dimension mismatch");
    }
    return (truth.x_star - x_hat).squaredNorm() / truth.x_star.squaredNorm();
}

double recall(const Vector& z_hat, const GroundTruth& truth) {
    if (truth.outlier_set.empty()) {
        throw UndefinedMetricError("recall: no planted outliers");
    }
    Index hit = 0;
    for (Index i : truth.outlier_set) {
        if (i < z_hat.size() && z_hat(i) > 0.5) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(truth.outlier_set.size());
}

std::pair<Vector, double> unstandardize_solution(const Solution& sol,
                                                 const StandardizedInstance& inst) {
    const Index n = inst.cols();
    if (sol.x.size() != n) throw PreconditionError("unstandardize_solution: dimension mismatch");
    const double sy = inst.response_transform.scale;
    const double my = inst.response_transform.shift;

    Vector x_orig(n);
    double intercept = my + sy * sol.intercept;
    for (Index j = 0; j < n; ++j) {
        const ColumnTransform& t = inst.column_transform[static_cast<size_t>(j)];
        x_orig(j) = sy * sol.x(j) / t.scale;
        intercept -= x_orig(j) * t.shift;
    }
    return {std::move(x_orig), intercept};
}

}  // namespace lts
