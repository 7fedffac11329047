#include "rdkg/matrix.hpp"

#include "rdkg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rdkg {

Matrix normalize_offdiag(const Matrix& m) {
    if (m.rows() != m.cols()) throw InputError("normalize_offdiag: matrix must be square");
    const Eigen::Index n = m.rows();
    Matrix out = Matrix::Zero(n, n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            lo = std::min(lo, m(i, j));
            hi = std::max(hi, m(i, j));
        }
    }
    if (n < 2 || !(hi > lo)) return out;
    const double range = hi - lo;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) out(i, j) = std::clamp((m(i, j) - lo) / range, 0.0, 1.0);
        }
    }
    return out;
}

Matrix fuse(std::span<const Matrix> parts, std::span<const double> weights) {
    if (parts.empty() || parts.size() != weights.size()) {
        throw InputError("invalid weights: expected one weight per component");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InputError("invalid weights: negative component");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("invalid weights: must sum to 1");
    Matrix out = Matrix::Zero(parts[0].rows(), parts[0].cols());
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].rows() != out.rows() || parts[k].cols() != out.cols()) {
            throw InputError("fuse: component shapes differ");
        }
        out += weights[k] * parts[k];
    }
    return out;
}

bool is_unit_distance_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, i) != 0.0) return false;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (!(v >= 0.0 && v <= 1.0) || v != m(j, i)) return false;
        }
    }
    return true;
}

double marginal_residual(const Matrix& plan, const Vector& row, const Vector& col) {
    const double r = (plan.rowwise().sum() - row).cwiseAbs().maxCoeff();
    const double c = (plan.colwise().sum().transpose() - col).cwiseAbs().maxCoeff();
    return std::max(r, c);
}

nlohmann::json matrix_to_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InputError("matrix must be an array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    if (n == 0) return Matrix(0, 0);
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw InputError("matrix row " + std::to_string(i) + " has inconsistent length");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const auto& v = row.at(static_cast<std::size_t>(k));
            if (!v.is_number()) throw InputError("matrix entry is not a number");
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    auto arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vector vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InputError("vector must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError("vector entry is not a number");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

}  // namespace rdkg
