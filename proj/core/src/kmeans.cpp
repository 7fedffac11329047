#include "rdkg/refinement.hpp"

namespace rdkg::refine {

TwoMeans two_means(const embed::EmbeddingMatrix& rows, int max_iters) {
    const Eigen::Index n = rows.rows();
    TwoMeans out;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    if (n < 2) return out;

    Matrix x = rows.data();
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) /= x.row(i).norm();

    Eigen::Index s0 = 0;
    Eigen::Index s1 = 1;
    double far = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = embed::cosine_distance(rows.row(i), rows.row(j));
            if (d > far) {
                far = d;
                s0 = i;
                s1 = j;
            }
        }
    }
    Matrix centroids(2, x.cols());
    centroids.row(0) = x.row(s0);
    centroids.row(1) = x.row(s1);

    for (int it = 0; it < max_iters; ++it) {
        std::vector<int> next(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d0 = (x.row(i) - centroids.row(0)).squaredNorm();
            const double d1 = (x.row(i) - centroids.row(1)).squaredNorm();
            next[static_cast<std::size_t>(i)] = d1 < d0 ? 1 : 0;
        }
        const auto ones = std::count(next.begin(), next.end(), 1);
        if (ones == 0 || ones == n) {
            const int empty = ones == 0 ? 1 : 0;
            const int full = 1 - empty;
            Eigen::Index pick = 0;
            double worst = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = (x.row(i) - centroids.row(full)).squaredNorm();
                if (d > worst) {
                    worst = d;
                    pick = i;
                }
            }
            next[static_cast<std::size_t>(pick)] = empty;
        }
        out.iterations = it + 1;
        const bool changed = next != out.labels || it == 0;
        out.labels = std::move(next);
        for (int c = 0; c < 2; ++c) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
            int count = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (out.labels[static_cast<std::size_t>(i)] == c) {
                    sum += x.row(i);
                    ++count;
                }
            }
            centroids.row(c) = sum / static_cast<double>(count);
        }
        if (!changed) break;
    }
    return out;
}

}  // namespace rdkg::refine
