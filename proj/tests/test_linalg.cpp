#include "lts/linalg.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lts;

TEST_SUITE_BEGIN("linalg");

TEST_CASE("factor_spd on the identity is the identity") {
    const SpdFactor f = factor_spd(Matrix::Identity(3, 3));
    CHECK((f.L - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("factor_spd of a diagonal matrix takes square roots") {
    Matrix S(2, 2);
    S << 4, 0, 0, 9;
    const SpdFactor f = factor_spd(S);
    CHECK(f.L(0, 0) == doctest::Approx(2.0));
    CHECK(f.L(1, 1) == doctest::Approx(3.0));
    CHECK(f.L(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("factor_spd matches the hand factorization of [[2,1],[1,2]]") {
    Matrix S(2, 2);
    S << 2, 1, 1, 2;
    const SpdFactor f = factor_spd(S);
    CHECK(f.L(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(f.L(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(f.L(1, 1) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
    CHECK((f.reconstruct() - S).norm() <= 1e-8 * S.norm());
}

TEST_CASE("factor_spd reports the failing pivot") {
    Matrix S(3, 3);
    S << 1, 0, 0, 0, -1, 0, 0, 0, 1;
    try {
        factor_spd(S);
        FAIL("expected NotPositiveDefiniteError");
    } catch (const NotPositiveDefiniteError& e) {
        CHECK(e.pivot == 1);
    }
    try {
        factor_spd(Matrix::Constant(1, 1, -2.0));
        FAIL("expected NotPositiveDefiniteError");
    } catch (const NotPositiveDefiniteError& e) {
        CHECK(e.pivot == 0);
    }
}

TEST_CASE("factor then reconstruct is an identity on random SPD matrices") {
    std::mt19937 rng(7);
    for (const Index k : {2, 5, 20, 120, 200}) {
        const Matrix S = test::random_spd(k, rng);
        const SpdFactor f = factor_spd(S);
        CHECK((f.reconstruct() - S).norm() <= 1e-8 * S.norm());
        for (Index i = 0; i < k; ++i) CHECK(f.L(i, i) > 0.0);
    }
}

TEST_CASE("solve_spd basics") {
    const SpdFactor id = factor_spd(Matrix::Identity(4, 4));
    const Vector b = Vector::LinSpaced(4, 1.0, 4.0);
    CHECK((solve_spd(id, b) - b).norm() == doctest::Approx(0.0));

    Matrix D(2, 2);
    D << 4, 0, 0, 9;
    Vector rhs(2);
    rhs << 4, 9;
    const Vector x = solve_spd(factor_spd(D), rhs);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(1.0));
}

TEST_CASE("solve_spd residual on random systems") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix S = test::random_spd(5, rng);
        const Vector b = test::random_vector(5, rng);
        const Vector x = solve_spd(factor_spd(S), b);
        CHECK((S * x - b).norm() <= 1e-8 * (1.0 + b.norm()));
    }
}

TEST_CASE("min_eig_sym on known spectra") {
    const auto [l1, v1] = min_eig_sym(Matrix::Identity(3, 3));
    CHECK(l1 == doctest::Approx(1.0));
    CHECK(v1.norm() == doctest::Approx(1.0));

    Matrix D(2, 2);
    D << 3, 0, 0, -2;
    const auto [l2, v2] = min_eig_sym(D);
    CHECK(l2 == doctest::Approx(-2.0));
    CHECK(std::abs(v2(1)) == doctest::Approx(1.0));

    Matrix F(2, 2);
    F << 0, 1, 1, 0;
    const auto [l3, v3] = min_eig_sym(F);
    CHECK(l3 == doctest::Approx(-1.0));
    CHECK(std::abs(v3(0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(v3(0) * v3(1) < 0.0);
}

TEST_CASE("min_eig_sym residual and shift property") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        Matrix S = test::random_spd(6, rng) - 2.0 * Matrix::Identity(6, 6);
        const auto [lam, v] = min_eig_sym(S);
        CHECK((S * v - lam * v).norm() <= 1e-8 * std::max(1.0, S.norm()));
        const double c = shift(rng);
        const auto [lam_shifted, v2] = min_eig_sym(Matrix(S + c * Matrix::Identity(6, 6)));
        CHECK(lam_shifted - lam == doctest::Approx(c).epsilon(1e-8));
    }
}

TEST_CASE("sherman_morrison_inverse closed form") {
    const Matrix Qinv = Matrix::Identity(3, 3);
    Vector a = Vector::Zero(3);
    a(0) = 1.0;
    const Matrix up = sherman_morrison_inverse(Qinv, a, 1);
    CHECK(up(0, 0) == doctest::Approx(0.5));
    CHECK(up(1, 1) == doctest::Approx(1.0));
    CHECK(up(2, 2) == doctest::Approx(1.0));

    CHECK((sherman_morrison_inverse(Qinv, Vector::Zero(3), 1) - Qinv).norm() ==
          doctest::Approx(0.0));
}

TEST_CASE("sherman_morrison_inverse multiplies back to the identity") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix Q = test::random_spd(4, rng);
        const Matrix Qinv = solve_spd(factor_spd(Q), Matrix(Matrix::Identity(4, 4)));
        const Vector a = test::random_vector(4, rng);
        const Matrix inv = sherman_morrison_inverse(Qinv, a, 1);
        const Matrix prod = inv * (Q + a * a.transpose());
        CHECK((prod - Matrix::Identity(4, 4)).norm() <= 1e-8 * (1.0 + Q.norm()));
    }
}

TEST_CASE("sherman_morrison_inverse rejects singular downdates") {
    const Matrix Qinv = Matrix::Identity(2, 2);
    Vector a(2);
    a << 1, 0;
    CHECK_THROWS_AS(sherman_morrison_inverse(Qinv, a, -1), SingularUpdateError);
}

TEST_SUITE_END();
