#include "rdkg/errors.hpp"
#include "rdkg/ot.hpp"

#include <cmath>
#include <limits>

namespace rdkg::ot {

namespace {

void check_measure(const Vector& v, const char* name) {
    if (v.size() == 0) throw InputError(std::string("sinkhorn: empty marginal ") + name);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
            throw InputError(std::string("sinkhorn: nonpositive marginal entry in ") + name + " at " + std::to_string(i));
        }
    }
}

// Project a nonnegative plan onto the transport polytope: scale rows and
// columns down to their targets, then spread the leftover mass as a rank-one
// correction (Altschuler, Weed and Rigollet, 2017).
void round_to_polytope(Matrix& plan, const Vector& mu, const Vector& nu) {
    const Vector r = plan.rowwise().sum();
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        if (r(i) > mu(i)) plan.row(i) *= mu(i) / r(i);
    }
    const Vector c = plan.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
        if (c(j) > nu(j)) plan.col(j) *= nu(j) / c(j);
    }
    // Both deficits are nonnegative in exact arithmetic; clip round-off so the
    // correction cannot push entries below zero.
    const Vector err_r = (mu - plan.rowwise().sum()).cwiseMax(0.0);
    const Vector err_c = (nu - plan.colwise().sum().transpose()).cwiseMax(0.0);
    const double mass = err_r.sum();
    if (mass > 0.0) plan.noalias() += err_r * err_c.transpose() / mass;
}

}  // namespace

SinkhornResult sinkhorn(const Matrix& cost, const Vector& mu, const Vector& nu, double epsilon, int max_iters,
                        double tol) {
    const Eigen::Index n = cost.rows();
    const Eigen::Index m = cost.cols();
    if (mu.size() != n || nu.size() != m) throw InputError("sinkhorn: marginal sizes do not match the cost shape");
    if (!cost.allFinite()) throw InputError("sinkhorn: non-finite cost entry");
    if (!(epsilon > 0.0)) throw InputError("sinkhorn: epsilon must be positive");
    if (max_iters < 1) throw InputError("sinkhorn: max_iters must be at least 1");
    check_measure(mu, "mu");
    check_measure(nu, "nu");
    if (std::abs(mu.sum() - nu.sum()) > 1e-9) throw InputError("sinkhorn: marginals carry different mass");

    const Vector log_mu = mu.array().log();
    const Vector log_nu = nu.array().log();
    // Row-major view of the cost for the f-update (contiguous over j).
    const Matrix cost_t = cost.transpose();

    Vector f = Vector::Zero(n);
    Vector g = Vector::Zero(m);
    Vector lse_row(n);

    auto row_lse = [&]() {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double* ci = cost_t.col(i).data();
            double mx = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < m; ++j) mx = std::max(mx, (g(j) - ci[j]) / epsilon);
            double s = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) s += std::exp((g(j) - ci[j]) / epsilon - mx);
            lse_row(i) = mx + std::log(s);
        }
    };

    SinkhornResult out;
    double violation = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iters; ++it) {
        row_lse();
        if (it > 0) {
            // Row sums of the current plan are exp(f_i / eps + lse_i).
            violation = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                violation = std::max(violation, std::abs(std::exp(f(i) / epsilon + lse_row(i)) - mu(i)));
            }
            if (violation <= tol) break;
        }
        f = epsilon * (log_mu - lse_row);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double* cj = cost.col(j).data();
            double mx = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) mx = std::max(mx, (f(i) - cj[i]) / epsilon);
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) s += std::exp((f(i) - cj[i]) / epsilon - mx);
            g(j) = epsilon * (log_nu(j) - mx - std::log(s));
        }
    }
    if (it == max_iters) {
        row_lse();
        violation = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            violation = std::max(violation, std::abs(std::exp(f(i) / epsilon + lse_row(i)) - mu(i)));
        }
    }

    Matrix plan(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) plan(i, j) = std::exp((f(i) + g(j) - cost(i, j)) / epsilon);
    }
    if (!plan.allFinite()) throw NumericalError("numerical failure: sinkhorn produced a non-finite plan");

    out.iterations = it;
    out.marginal_violation = violation;
    out.converged = violation <= tol;
    round_to_polytope(plan, mu, nu);
    out.coupling = Coupling{std::move(plan), mu, nu};
    return out;
}

double entropic_objective(const Matrix& cost, const Matrix& plan, double epsilon) {
    double lin = 0.0;
    double neg_entropy = 0.0;
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
        for (Eigen::Index i = 0; i < plan.rows(); ++i) {
            const double p = plan(i, j);
            lin += cost(i, j) * p;
            if (p > 0.0) neg_entropy += p * std::log(p);
        }
    }
    return lin + epsilon * neg_entropy;
}

}  // namespace rdkg::ot
