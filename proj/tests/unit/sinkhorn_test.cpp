#include "testkit.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/ot.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rdkg::ot;
using rdkg::Matrix;
using rdkg::Vector;

namespace {

// Plain multiplicative Sinkhorn, run to a tight tolerance; usable when
// cost / eps is moderate.
Matrix naive_sinkhorn(const Matrix& c, const Vector& mu, const Vector& nu, double eps) {
    const Matrix k = (-c / eps).array().exp().matrix();
    Vector u = Vector::Ones(mu.size());
    Vector v = Vector::Ones(nu.size());
    for (int it = 0; it < 100000; ++it) {
        u = mu.array() / (k * v).array();
        v = nu.array() / (k.transpose() * u).array();
    }
    return u.asDiagonal() * k * v.asDiagonal();
}

Vector random_simplex(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    return v / v.sum();
}

}  // namespace

TEST(Sinkhorn, MatchesMultiplicativeReference) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 4;
        const int m = 3 + trial % 3;
        const Matrix c = testkit::random_matrix(rng, n, m, 0.0, 1.0);
        const Vector mu = random_simplex(rng, n);
        const Vector nu = random_simplex(rng, m);
        const auto r = sinkhorn(c, mu, nu, 0.2, 20000, 1e-13);
        const Matrix ref = naive_sinkhorn(c, mu, nu, 0.2);
        EXPECT_LT((r.coupling.plan - ref).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Sinkhorn, MarginalsExactAfterRounding) {
    std::mt19937_64 rng(12);
    const Matrix c = testkit::random_matrix(rng, 30, 20, 0.0, 2.0);
    const Vector mu = random_simplex(rng, 30);
    const Vector nu = random_simplex(rng, 20);
    const auto r = sinkhorn(c, mu, nu, 0.01, 5);  // far from converged
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.marginal_violation, 1e-6);
    EXPECT_LE(r.coupling.residual(), 1e-12);
    EXPECT_GE(r.coupling.plan.minCoeff(), 0.0);
}

TEST(Sinkhorn, SmallEpsilonStaysFinite) {
    Matrix c(2, 2);
    c << 0, 2, 2, 0;
    const Vector h = Vector::Constant(2, 0.5);
    const auto r = sinkhorn(c, h, h, 1e-4, 1000);
    EXPECT_TRUE(r.coupling.plan.allFinite());
    EXPECT_NEAR(r.coupling.plan(0, 0), 0.5, 1e-9);
}

TEST(Sinkhorn, UniformCostGivesProductCoupling) {
    const Vector mu = (Vector(3) << 0.2, 0.3, 0.5).finished();
    const Vector nu = (Vector(2) << 0.4, 0.6).finished();
    const auto r = sinkhorn(Matrix::Constant(3, 2, 0.7), mu, nu, 0.05, 100);
    EXPECT_LT((r.coupling.plan - mu * nu.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sinkhorn, InputValidation) {
    const Vector h = Vector::Constant(2, 0.5);
    Matrix c = Matrix::Zero(2, 2);
    EXPECT_THROW(sinkhorn(c, h, h, 0.0, 10), rdkg::InputError);
    EXPECT_THROW(sinkhorn(c, h, Vector::Constant(2, 0.4), 0.1, 10), rdkg::InputError);
    EXPECT_THROW(sinkhorn(Matrix::Zero(3, 2), h, h, 0.1, 10), rdkg::InputError);
    c(0, 0) = NAN;
    EXPECT_THROW(sinkhorn(c, h, h, 0.1, 10), rdkg::InputError);
}
