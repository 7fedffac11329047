#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <span>
#include <vector>

namespace rdkg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Min-max normalization computed over off-diagonal entries only. The
/// diagonal of the result is exactly zero. A matrix whose off-diagonal
/// entries are all equal (including any 1x1 matrix) maps to the zero matrix.
Matrix normalize_offdiag(const Matrix& m);

/// Weighted sum of equally-shaped matrices, accumulated in argument order.
/// Weights must be nonnegative and sum to 1 within 1e-9.
Matrix fuse(std::span<const Matrix> parts, std::span<const double> weights);

/// True when m is square, exactly symmetric, has a zero diagonal and every
/// entry lies in [0, 1].
bool is_unit_distance_matrix(const Matrix& m);

/// Maximum absolute violation of row and column marginals.
double marginal_residual(const Matrix& plan, const Vector& row, const Vector& col);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace rdkg
