#include "rdkg/analysis.hpp"

#include "rdkg/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rdkg::analysis {

namespace {

struct Normalized {
    std::vector<double> x;
    std::vector<double> y;
};

std::vector<double> minmax(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double range = *hi - *lo;
    std::vector<double> out(v.size(), 0.0);
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
    return out;
}

}  // namespace

std::size_t knee_point(std::span<const RdPoint> points) {
    if (points.size() < 2) throw InputError("trace too short");
    std::vector<double> r;
    std::vector<double> d;
    for (const auto& p : points) {
        r.push_back(p.rate);
        d.push_back(p.distortion);
    }
    const auto x = minmax(r);
    const auto y = minmax(d);
    const std::size_t last = points.size() - 1;
    const double cx = x[last] - x[0];
    const double cy = y[last] - y[0];
    const double chord = std::hypot(cx, cy);

    std::vector<double> dist(points.size(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double px = x[i] - x[0];
        const double py = y[i] - y[0];
        dist[i] = chord > 0.0 ? std::abs(cx * py - cy * px) / chord : std::hypot(px, py);
    }

    auto better_objective = [&](std::size_t a, std::size_t b) {
        if (points[a].objective != points[b].objective) return points[a].objective < points[b].objective;
        return points[a].t < points[b].t;
    };

    const double max_dist = *std::max_element(dist.begin(), dist.end());
    std::size_t best = 0;
    if (max_dist < 1e-9) {
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (better_objective(i, best)) best = i;
        }
        return best;
    }
    constexpr double kTieSlack = 1e-12;
    bool have = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (dist[i] < max_dist - kTieSlack) continue;
        if (!have || better_objective(i, best)) {
            best = i;
            have = true;
        }
    }
    return best;
}

double percentile_linear(std::vector<double> values, double pct) {
    if (values.empty()) throw InputError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double rank = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double coverage_tolerance(const Matrix& feat, ToleranceMode mode) {
    if (feat.size() == 0) throw InputError("coverage: empty feature-cost matrix");
    std::vector<double> sample;
    if (mode == ToleranceMode::RowMinima) {
        for (Eigen::Index i = 0; i < feat.rows(); ++i) sample.push_back(feat.row(i).minCoeff());
    } else {
        sample.reserve(static_cast<std::size_t>(feat.size()));
        for (Eigen::Index i = 0; i < feat.rows(); ++i) {
            for (Eigen::Index j = 0; j < feat.cols(); ++j) sample.push_back(feat(i, j));
        }
    }
    return percentile_linear(std::move(sample), kCoveragePercentile);
}

double coverage(const Matrix& feat, const Matrix& plan, ToleranceMode mode) {
    if (feat.size() == 0) throw InputError("coverage: empty feature-cost matrix");
    if (feat.rows() != plan.rows() || feat.cols() != plan.cols()) throw InputError("coverage: shape mismatch");
    const double q = coverage_tolerance(feat, mode);
    std::size_t covered = 0;
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < plan.cols(); ++j) {
            if (plan(i, j) > plan(i, best)) best = j;
        }
        if (feat(i, best) <= q) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(plan.rows());
}

}  // namespace rdkg::analysis
