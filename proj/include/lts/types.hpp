#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised on malformed or degenerate input data (constant columns, bad CSV, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a matrix expected to be positive definite is not; carries the
/// index of the first non-positive pivot.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    NotPositiveDefiniteError(const std::string& msg, Index pivot_index)
        : std::runtime_error(msg), pivot(pivot_index) {}
    Index pivot;
};

/// Raised when a rank-one update would make the matrix singular.
class SingularUpdateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a statistic has no defined value (e.g. recall with no planted outliers).
class UndefinedMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a weight vector fails its positive-semidefiniteness contract.
class InvalidWeightsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Regression data in original units. Rows marked reliable are exempt from
/// outlier flagging.
struct Dataset {
    Matrix features;                        // m x n
    Vector response;                        // m
    std::vector<bool> reliable;             // m, may be empty (= all false)
    std::vector<std::string> column_names;  // n

    Index rows() const { return features.rows(); }
    Index cols() const { return features.cols(); }
    bool is_reliable(Index i) const { return !reliable.empty() && reliable[static_cast<size_t>(i)]; }
    Index reliable_count() const;

    // Throws DataError if dimensions are inconsistent, entries are non-finite,
    // or every row is marked reliable.
    void validate() const;
};

struct ColumnTransform {
    double shift = 0.0;
    double scale = 1.0;
};

/// Data after translating/scaling every column (and the response) to zero sum
/// and unit square-sum, together with the transform needed to undo it.
struct StandardizedInstance {
    Matrix A;  // m x n, per-column sum 0 and square-sum 1
    Vector y;  // m, sum 0 and square-sum 1
    std::vector<ColumnTransform> column_transform;
    ColumnTransform response_transform;
    std::vector<bool> reliable;
    std::vector<std::string> column_names;

    Index rows() const { return A.rows(); }
    Index cols() const { return A.cols(); }
    bool is_reliable(Index i) const { return !reliable.empty() && reliable[static_cast<size_t>(i)]; }
    Index reliable_count() const;
};

enum class InterceptMode { Zero, Proxy, Reliable };
enum class Method { BigM, Conic, ConicPlus, AltOpt, Lad, LsL2 };

/// Fixed numeric knobs. Values are part of the solver contract, not tuning
/// parameters; tests pin behavior against them.
struct Tolerances {
    double gap_tol = 1e-6;          // terminal relative optimality gap
    double integrality_tol = 1e-6;  // |z - round(z)| below this counts as binary
    double relax_tol = 1e-8;        // relative tolerance of node relaxations
    double psd_tol = 1e-10;         // acceptable eigenvalue slack in PSD checks
    double z_floor = 1e-9;          // clamp for free z during relaxation iterations
    double u_floor = 1.001;         // lower bound on u in the weight-tuning SDP
    double eps_c = 1e-12;           // lift for degenerate SDP objective coefficients
    double big_m = 1000.0;          // default big-M constant
    int relax_max_iters = 600;      // iteration cap of one relaxation solve
    int alg1_max_iters = 200;       // outer iteration cap of the weight-tuning loop
    int alg1_stall_limit = 20;      // iterations with small gap improvement before stopping
    double alg1_stall_eps = 1e-6;   // gap improvement below this counts as a stall
};

struct ProblemSpec {
    double lambda = 0.1;     // regularization weight, > 0 for conic methods
    int budget = 0;          // maximum number of discarded observations (m - h)
    Matrix T;                // n x n regularization matrix, empty = identity
    InterceptMode intercept_mode = InterceptMode::Zero;
    Method method = Method::ConicPlus;
    double time_limit_s = 600.0;
    std::uint64_t seed = 0;
    Tolerances tol;
};

/// A feasible point of the trimmed-squares program, in standardized coordinates.
struct Solution {
    Vector x;              // coefficients
    double intercept = 0.0;
    Vector z;              // m, binary; z_i = 1 means row i discarded
    Vector w;              // m, residual absorption; z_i = 0 implies w_i = 0
    double objective = 0.0;
};

struct GroundTruth {
    Vector x_star;
    std::vector<Index> outlier_set;
};

std::string method_name(Method m);

}  // namespace lts
