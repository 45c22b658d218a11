#include "lts/core.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lts;

namespace {

Dataset two_point_dataset() {
    Dataset d;
    d.features.resize(2, 1);
    d.features << 1, -1;
    d.response.resize(2);
    d.response << 2, 0;
    d.column_names = {"a"};
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("standardize maps (1,-1) to the unit square-sum column") {
    const StandardizedInstance inst = standardize(two_point_dataset());
    CHECK(inst.A(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(inst.A(1, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(inst.column_transform[0].shift == doctest::Approx(0.0));
    CHECK(inst.column_transform[0].scale == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("standardize solves the moment equations for (0,1,2)") {
    Dataset d;
    d.features.resize(3, 1);
    d.features << 0, 1, 2;
    d.response.resize(3);
    d.response << 5, -1, 3;
    const StandardizedInstance inst = standardize(d);
    CHECK(inst.column_transform[0].shift == doctest::Approx(1.0));
    CHECK(inst.A(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(inst.A(1, 0) == doctest::Approx(0.0));
    CHECK(inst.A(2, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("standardized output satisfies the moment invariants and round-trips") {
    const auto [data, truth] = generate_synthetic(3, 40, 0.1, 99);
    (void)truth;
    const StandardizedInstance inst = standardize(data);
    const Index m = inst.rows();
    for (Index j = 0; j < inst.cols(); ++j) {
        CHECK(std::abs(inst.A.col(j).sum()) <= 1e-10 * static_cast<double>(m));
        CHECK(std::abs(inst.A.col(j).squaredNorm() - 1.0) <= 1e-10);
    }
    CHECK(std::abs(inst.y.sum()) <= 1e-10 * static_cast<double>(m));
    CHECK(std::abs(inst.y.squaredNorm() - 1.0) <= 1e-10);
    for (Index j = 0; j < inst.cols(); ++j) {
        const auto& t = inst.column_transform[static_cast<size_t>(j)];
        const Vector back = (inst.A.col(j).array() * t.scale + t.shift).matrix();
        CHECK((back - data.features.col(j)).norm() <=
              1e-10 * (1.0 + data.features.col(j).norm()));
    }
}

TEST_CASE("standardize is idempotent") {
    const auto [data, truth] = generate_synthetic(2, 25, 0.2, 4);
    (void)truth;
    const StandardizedInstance once = standardize(data);
    Dataset again;
    again.features = once.A;
    again.response = once.y;
    const StandardizedInstance twice = standardize(again);
    CHECK((twice.A - once.A).norm() <= 1e-10);
    CHECK((twice.y - once.y).norm() <= 1e-10);
    for (const auto& t : twice.column_transform) {
        CHECK(std::abs(t.shift) <= 1e-10);
        CHECK(std::abs(t.scale - 1.0) <= 1e-10);
    }
}

TEST_CASE("standardize rejects degenerate data by name") {
    Dataset d;
    d.features.resize(3, 2);
    d.features << 1, 7, 2, 7, 3, 7;
    d.response.resize(3);
    d.response << 1, 2, 3;
    d.column_names = {"good", "stuck"};
    CHECK_THROWS_WITH_AS(standardize(d), doctest::Contains("stuck"), DataError);

    Dataset flat;
    flat.features.resize(3, 1);
    flat.features << 1, 2, 3;
    flat.response = Vector::Constant(3, 4.0);
    CHECK_THROWS_WITH_AS(standardize(flat), doctest::Contains("response"), DataError);
}

TEST_CASE("generate_synthetic honors tau") {
    const auto [d0, t0] = generate_synthetic(2, 50, 0.0, 11);
    CHECK(t0.outlier_set.empty());
    CHECK(d0.rows() == 50);

    const auto [d1, t1] = generate_synthetic(2, 100, 0.1, 11);
    CHECK(t1.outlier_set.size() == 10);
    CHECK(t1.x_star.size() == 2);
    CHECK((t1.x_star - Vector::Ones(2)).norm() == 0.0);
}

TEST_CASE("planted outliers shift the clean responses by exactly 1000") {
    const auto [clean, tc] = generate_synthetic(3, 60, 0.0, 123);
    (void)tc;
    const auto [dirty, truth] = generate_synthetic(3, 60, 0.25, 123);
    CHECK(truth.outlier_set.size() == 15);
    CHECK((clean.features - dirty.features).norm() == 0.0);
    std::vector<bool> is_outlier(60, false);
    for (const Index i : truth.outlier_set) is_outlier[static_cast<size_t>(i)] = true;
    for (Index i = 0; i < 60; ++i) {
        const double delta = dirty.response(i) - clean.response(i);
        CHECK(delta == (is_outlier[static_cast<size_t>(i)] ? 1000.0 : 0.0));
    }
}

TEST_CASE("generate_synthetic is deterministic under a fixed seed") {
    const auto [a, ta] = generate_synthetic(4, 30, 0.3, 2024);
    const auto [b, tb] = generate_synthetic(4, 30, 0.3, 2024);
    CHECK((a.features - b.features).norm() == 0.0);
    CHECK((a.response - b.response).norm() == 0.0);
    CHECK(ta.outlier_set == tb.outlier_set);

    const auto [c, tc] = generate_synthetic(4, 30, 0.3, 2025);
    (void)tc;
    CHECK((a.features - c.features).norm() > 0.0);
}

TEST_CASE("risk formula") {
    GroundTruth truth;
    truth.x_star = Vector::Ones(2);
    CHECK(risk(Vector::Ones(2), truth) == doctest::Approx(0.0));
    CHECK(risk(Vector::Zero(2), truth) == doctest::Approx(1.0));
    Vector half(2);
    half << 1, 0;
    CHECK(risk(half, truth) == doctest::Approx(0.5));

    std::mt19937 rng(3);
    for (int t = 0; t < 20; ++t) {
        CHECK(risk(test::random_vector(2, rng, 10.0), truth) >= 0.0);
    }
}

TEST_CASE("recall formula and undefined case") {
    GroundTruth truth;
    truth.x_star = Vector::Ones(2);
    truth.outlier_set = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18};
    Vector z = Vector::Zero(20);
    CHECK(recall(z, truth) == doctest::Approx(0.0));
    for (const Index i : truth.outlier_set) z(i) = 1.0;
    CHECK(recall(z, truth) == doctest::Approx(1.0));
    for (size_t k = 5; k < truth.outlier_set.size(); ++k) z(truth.outlier_set[k]) = 0.0;
    CHECK(recall(z, truth) == doctest::Approx(0.5));

    GroundTruth none;
    none.x_star = Vector::Ones(2);
    CHECK_THROWS_AS(recall(z, none), UndefinedMetricError);
}

TEST_CASE("unstandardize_solution keeps predictions and handles pure scaling") {
    // Identity transform: coefficients unchanged.
    StandardizedInstance ident;
    ident.A = Matrix::Identity(2, 2);
    ident.y = Vector::Ones(2);
    ident.column_transform = {{0.0, 1.0}, {0.0, 1.0}};
    ident.response_transform = {0.0, 1.0};
    Solution sol;
    sol.x = Vector::LinSpaced(2, 1.0, 2.0);
    sol.intercept = 0.25;
    const auto [x_id, c_id] = unstandardize_solution(sol, ident);
    CHECK((x_id - sol.x).norm() == doctest::Approx(0.0));
    CHECK(c_id == doctest::Approx(0.25));

    // Pure per-column scaling divides coefficients and rescales by the response.
    StandardizedInstance scaled = ident;
    scaled.column_transform = {{0.0, 2.0}, {0.0, 5.0}};
    scaled.response_transform = {0.0, 3.0};
    const auto [x_sc, c_sc] = unstandardize_solution(sol, scaled);
    CHECK(x_sc(0) == doctest::Approx(3.0 * sol.x(0) / 2.0));
    CHECK(x_sc(1) == doctest::Approx(3.0 * sol.x(1) / 5.0));
    CHECK(c_sc == doctest::Approx(3.0 * 0.25));
}

TEST_CASE("unstandardize_solution prediction equality on a random dataset") {
    std::mt19937 rng(8);
    Dataset d;
    d.features.resize(3, 2);
    d.features << 1.5, -2.0, 4.0, 0.5, -3.0, 7.0;
    d.response.resize(3);
    d.response << 2.0, -1.0, 0.5;
    const StandardizedInstance inst = standardize(d);

    Solution sol;
    sol.x = test::random_vector(2, rng);
    sol.intercept = 0.4;
    const auto [x_orig, intercept] = unstandardize_solution(sol, inst);
    for (Index i = 0; i < 3; ++i) {
        const double pred_std = inst.A.row(i).dot(sol.x) + sol.intercept;
        const double pred_orig_units =
            pred_std * inst.response_transform.scale + inst.response_transform.shift;
        const double pred_back = d.features.row(i).dot(x_orig) + intercept;
        CHECK(pred_back ==
              doctest::Approx(pred_orig_units).epsilon(1e-8));
    }
}

TEST_SUITE_END();
