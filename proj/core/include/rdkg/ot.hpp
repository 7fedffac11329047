#pragma once

#include "rdkg/matrix.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace rdkg::ot {

/// Transport plan between two discrete measures.
struct Coupling {
    Matrix plan;
    Vector mu_row;
    Vector mu_col;

    Eigen::Index rows() const { return plan.rows(); }
    Eigen::Index cols() const { return plan.cols(); }
    double residual() const { return marginal_residual(plan, mu_row, mu_col); }
};

struct SinkhornResult {
    Coupling coupling;
    int iterations = 0;
    /// Max absolute marginal violation of the raw Sinkhorn iterate, before
    /// the final feasibility rounding.
    double marginal_violation = 0.0;
    bool converged = false;
};

/// Entropic OT, min <cost, P> - epsilon * H(P) over couplings of (mu, nu),
/// iterated on dual potentials in the log domain. Stops once the row
/// violation is <= tol or after max_iters sweeps. The returned plan is then
/// rounded onto the exact transport polytope, so its marginals match to
/// round-off even when max_iters was hit (see marginal_violation).
SinkhornResult sinkhorn(const Matrix& cost, const Vector& mu, const Vector& nu, double epsilon, int max_iters,
                        double tol = 1e-6);

/// <cost, P> + epsilon * sum P log P, the quantity Sinkhorn minimizes.
double entropic_objective(const Matrix& cost, const Matrix& plan, double epsilon);

/// tens(P)_ij = sum_kl |C1_ik - C2_jl|^2 P_kl, evaluated through the
/// square-loss split in O(N^2 M + N M^2). Marginals are taken from P itself,
/// so the identity holds for any matrix P, feasible or not.
Matrix gw_tensor_product(const Matrix& c1, const Matrix& c2, const Matrix& plan);

/// Gradient of the structure term sum_ijkl |C1_ik - C2_jl|^2 P_ij P_kl.
/// For symmetric C1, C2 this is 2 * gw_tensor_product.
Matrix gw_gradient(const Matrix& c1, const Matrix& c2, const Matrix& plan);

/// sum_ijkl |C1_ik - C2_jl|^2 P_ij P_kl without forming the 4-index tensor.
double structure_value(const Matrix& c1, const Matrix& c2, const Matrix& plan);

struct DistortionTerms {
    double structure = 0.0;
    double feature = 0.0;
};

DistortionTerms distortion_terms(const Matrix& plan, const Matrix& d_z, const Matrix& d_v, const Matrix& feat);

struct SolverConfig {
    double lambda_feat = 0.6;
    double epsilon = 0.05;
    int sinkhorn_iters = 200;
    int fw_iters = 50;
    double fw_tol = 1e-6;
    double sinkhorn_tol = 1e-6;

    /// Throws InputError when a field is out of range.
    void validate() const;
};

struct FgwResult {
    Coupling coupling;
    double distortion = 0.0;  // (1 - lambda) * structure_term + lambda * feature_term
    double structure_term = 0.0;
    double feature_term = 0.0;
    int outer_iterations = 0;
    bool converged = false;
    /// Unregularized objective at pi^0, pi^1, ... (one entry per iterate).
    std::vector<double> objective_history;
};

/// Fused Gromov-Wasserstein by conditional gradient. Starts from mu_z mu_v^T,
/// linearizes, solves the direction with entropic Sinkhorn, and steps with
/// an exact line search on the quadratic objective. The reported distortion
/// is the unregularized objective at the returned coupling.
FgwResult fgw(const Matrix& d_z, const Matrix& d_v, const Matrix& feat, const Vector& mu_z, const Vector& mu_v,
              const SolverConfig& config = {});

/// Column of the largest entry in each row; the lowest column wins ties.
std::vector<std::size_t> row_argmax(const Matrix& plan);

/// Debug dump { shape: [N, M], rows: [[...]], marginal_residual }.
nlohmann::json coupling_to_json(const Coupling& c);

}  // namespace rdkg::ot
