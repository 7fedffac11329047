#include "rdkg/errors.hpp"
#include "rdkg/ot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rdkg::ot {

namespace {

double frobenius(const Matrix& a, const Matrix& b) {
    return (a.array() * b.array()).sum();
}

void check_shapes(const Matrix& d_z, const Matrix& d_v, const Matrix& feat) {
    if (d_z.rows() != d_z.cols()) throw InputError("fgw: source distance matrix must be square");
    if (d_v.rows() != d_v.cols()) throw InputError("fgw: target distance matrix must be square");
    if (feat.rows() != d_z.rows() || feat.cols() != d_v.rows()) {
        throw InputError("fgw: feature cost must be " + std::to_string(d_z.rows()) + "x" + std::to_string(d_v.rows()) +
                         ", got " + std::to_string(feat.rows()) + "x" + std::to_string(feat.cols()));
    }
}

double fgw_objective(const Matrix& d_z, const Matrix& d_v, const Matrix& feat, const Matrix& plan, double lambda) {
    const auto t = distortion_terms(plan, d_z, d_v, feat);
    return (1.0 - lambda) * t.structure + lambda * t.feature;
}

}  // namespace

Matrix gw_tensor_product(const Matrix& c1, const Matrix& c2, const Matrix& plan) {
    if (c1.rows() != c1.cols() || c2.rows() != c2.cols() || plan.rows() != c1.rows() || plan.cols() != c2.rows()) {
        throw InputError("gw: shape mismatch between distance matrices and plan");
    }
    const Vector p = plan.rowwise().sum();
    const Vector q = plan.colwise().sum().transpose();
    const Vector a = c1.array().square().matrix() * p;
    const Vector b = c2.array().square().matrix() * q;
    Matrix out = -2.0 * (c1 * plan * c2.transpose());
    out.colwise() += a;
    out.rowwise() += b.transpose();
    return out;
}

Matrix gw_gradient(const Matrix& c1, const Matrix& c2, const Matrix& plan) {
    Matrix g = gw_tensor_product(c1, c2, plan);
    const bool symmetric = c1 == c1.transpose() && c2 == c2.transpose();
    if (symmetric) return 2.0 * g;
    g += gw_tensor_product(c1.transpose(), c2.transpose(), plan);
    return g;
}

double structure_value(const Matrix& c1, const Matrix& c2, const Matrix& plan) {
    return frobenius(gw_tensor_product(c1, c2, plan), plan);
}

DistortionTerms distortion_terms(const Matrix& plan, const Matrix& d_z, const Matrix& d_v, const Matrix& feat) {
    check_shapes(d_z, d_v, feat);
    if (plan.rows() != feat.rows() || plan.cols() != feat.cols()) throw InputError("distortion: plan shape mismatch");
    DistortionTerms t;
    // Round-off can push an exactly-zero structure term slightly negative.
    t.structure = std::max(0.0, structure_value(d_z, d_v, plan));
    t.feature = std::max(0.0, frobenius(feat, plan));
    return t;
}

void SolverConfig::validate() const {
    if (!(lambda_feat >= 0.0 && lambda_feat <= 1.0)) throw InputError("lambda_feat must lie in [0,1]");
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (sinkhorn_iters < 1 || fw_iters < 1) throw InputError("iteration counts must be at least 1");
    if (!(fw_tol >= 0.0) || !(sinkhorn_tol > 0.0)) throw InputError("solver tolerances must be positive");
}

FgwResult fgw(const Matrix& d_z, const Matrix& d_v, const Matrix& feat, const Vector& mu_z, const Vector& mu_v,
              const SolverConfig& config) {
    config.validate();
    check_shapes(d_z, d_v, feat);
    if (mu_z.size() != d_z.rows() || mu_v.size() != d_v.rows()) throw InputError("fgw: measure sizes do not match");
    if (!d_z.allFinite() || !d_v.allFinite() || !feat.allFinite()) throw InputError("fgw: non-finite input");

    const double lambda = config.lambda_feat;
    const bool symmetric = d_z == d_z.transpose() && d_v == d_v.transpose();

    FgwResult res;
    Matrix plan = mu_z * mu_v.transpose();
    double f = fgw_objective(d_z, d_v, feat, plan, lambda);
    res.objective_history.push_back(f);

    for (int k = 0; k < config.fw_iters; ++k) {
        Matrix gw_grad = symmetric ? Matrix(2.0 * gw_tensor_product(d_z, d_v, plan)) : gw_gradient(d_z, d_v, plan);
        const Matrix lin = (1.0 - lambda) * gw_grad + lambda * feat;
        if (!lin.allFinite()) throw NumericalError("numerical failure at outer iteration " + std::to_string(k));

        const auto dir = sinkhorn(lin, mu_z, mu_v, config.epsilon, config.sinkhorn_iters, config.sinkhorn_tol);
        const Matrix delta = dir.coupling.plan - plan;

        // f(plan + a*delta) = f + b*a + c*a^2 on a in [0, 1].
        const double c = (1.0 - lambda) * structure_value(d_z, d_v, delta);
        const double b = (1.0 - lambda) * frobenius(gw_grad, delta) + lambda * frobenius(feat, delta);
        double step = 0.0;
        if (c > 0.0) {
            step = std::clamp(-b / (2.0 * c), 0.0, 1.0);
        } else {
            step = (b + c < 0.0) ? 1.0 : 0.0;
        }

        Matrix next = plan + step * delta;
        const double f_next = fgw_objective(d_z, d_v, feat, next, lambda);
        if (!std::isfinite(f_next) || !next.allFinite()) {
            throw NumericalError("numerical failure at outer iteration " + std::to_string(k));
        }
        res.outer_iterations = k + 1;

        const double decrease = f - f_next;
        if (decrease < 0.0) {
            // Round-off only: keep the incumbent so the objective never rises.
            res.objective_history.push_back(f);
            res.converged = true;
            break;
        }
        plan = std::move(next);
        res.objective_history.push_back(f_next);
        const double prev = f;
        f = f_next;
        if (step == 0.0 || decrease <= config.fw_tol * std::max(std::abs(prev), 1e-300)) {
            res.converged = true;
            break;
        }
    }

    const auto terms = distortion_terms(plan, d_z, d_v, feat);
    res.structure_term = terms.structure;
    res.feature_term = terms.feature;
    res.distortion = (1.0 - lambda) * terms.structure + lambda * terms.feature;
    res.coupling = Coupling{std::move(plan), mu_z, mu_v};
    return res;
}

std::vector<std::size_t> row_argmax(const Matrix& plan) {
    std::vector<std::size_t> out(static_cast<std::size_t>(plan.rows()), 0);
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < plan.cols(); ++j) {
            if (plan(i, j) > plan(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

nlohmann::json coupling_to_json(const Coupling& c) {
    nlohmann::json j;
    j["shape"] = {c.rows(), c.cols()};
    j["rows"] = matrix_to_json(c.plan);
    j["marginal_residual"] = c.residual();
    return j;
}

}  // namespace rdkg::ot
