#include "rdkg/errors.hpp"
#include "rdkg/matrix.hpp"

#include <gtest/gtest.h>

#include <array>

using rdkg::Matrix;

TEST(Matrix, NormalizeOffdiagUsesOffDiagonalRange) {
    Matrix m(3, 3);
    m << 5, 2, 4, 2, 9, 3, 4, 3, 7;
    const Matrix n = rdkg::normalize_offdiag(m);
    EXPECT_DOUBLE_EQ(n(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(n(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(n(0, 2), 1.0);
    EXPECT_DOUBLE_EQ(n(1, 2), 0.5);
    EXPECT_TRUE(rdkg::is_unit_distance_matrix(n));
}

TEST(Matrix, NormalizeConstantAndSingleton) {
    EXPECT_TRUE(rdkg::normalize_offdiag(Matrix::Constant(3, 3, 0.7)).isZero());
    EXPECT_TRUE(rdkg::normalize_offdiag(Matrix::Constant(1, 1, 4.0)).isZero());
}

TEST(Matrix, FuseRejectsBadWeights) {
    const std::array<Matrix, 2> parts = {Matrix::Ones(2, 2), Matrix::Zero(2, 2)};
    const std::array<double, 2> good = {0.25, 0.75};
    EXPECT_TRUE(rdkg::fuse(parts, good).isApprox(Matrix::Constant(2, 2, 0.25)));
    const std::array<double, 2> neg = {-0.5, 1.5};
    const std::array<double, 2> sum = {0.5, 0.6};
    const std::array<double, 1> count = {1.0};
    EXPECT_THROW(rdkg::fuse(parts, neg), rdkg::InputError);
    EXPECT_THROW(rdkg::fuse(parts, sum), rdkg::InputError);
    EXPECT_THROW(rdkg::fuse(parts, count), rdkg::InputError);
}

TEST(Matrix, UnitDistanceChecks) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 0.5;
    EXPECT_TRUE(rdkg::is_unit_distance_matrix(m));
    m(0, 1) = 0.6;
    EXPECT_FALSE(rdkg::is_unit_distance_matrix(m));
    m(0, 1) = 1.5;
    m(1, 0) = 1.5;
    EXPECT_FALSE(rdkg::is_unit_distance_matrix(m));
}

TEST(Matrix, JsonRoundTripIsExact) {
    Matrix m(2, 3);
    m << 0.1, 1.0 / 3.0, 2e-17, -4, 5.5, 1e300;
    EXPECT_EQ(rdkg::matrix_from_json(nlohmann::json::parse(rdkg::matrix_to_json(m).dump())), m);
}

TEST(Matrix, MarginalResidual) {
    Matrix p(2, 2);
    p << 0.25, 0.25, 0.25, 0.25;
    const rdkg::Vector half = rdkg::Vector::Constant(2, 0.5);
    EXPECT_DOUBLE_EQ(rdkg::marginal_residual(p, half, half), 0.0);
    p(0, 0) = 0.35;
    EXPECT_NEAR(rdkg::marginal_residual(p, half, half), 0.1, 1e-15);
}
