#include "circtz/features.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace circtz {
namespace {

constexpr int kBasis = kHoursPerDay;

// Basis functions b_j(h) = B3(h - j) on the 24 h circle, knots on the hours.
Eigen::MatrixXd design_at_hours() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(kHoursPerDay, kBasis);
    for (int h = 0; h < kHoursPerDay; ++h) {
        b(h, h) = 4.0 / 6.0;
        b(h, (h + 1) % kBasis) = 1.0 / 6.0;
        b(h, (h + kBasis - 1) % kBasis) = 1.0 / 6.0;
    }
    return b;
}

Eigen::MatrixXd cyclic_second_difference_penalty() {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(kBasis, kBasis);
    for (int j = 0; j < kBasis; ++j) {
        d(j, (j + kBasis - 1) % kBasis) += 1.0;
        d(j, j) -= 2.0;
        d(j, (j + 1) % kBasis) += 1.0;
    }
    return d.transpose() * d;
}

// Orthonormal basis of the sum-to-zero subspace; fixes the intercept/partition-of-unity aliasing.
Eigen::MatrixXd sum_to_zero_basis() {
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::VectorXd::Ones(kBasis)).householderQ();
    return q.rightCols(kBasis - 1);
}

double eta_at(const std::vector<double>& coeffs, double intercept, int whole_hour, double frac) {
    double eta = intercept;
    for (int o = -1; o <= 2; ++o) {
        const int j = ((whole_hour + o) % kBasis + kBasis) % kBasis;
        eta += coeffs[static_cast<std::size_t>(j)] * cubic_bspline(frac - o);
    }
    return eta;
}

SmoothedProfile fit_canonical(std::span<const double, kHoursPerDay> counts, const GamConfig& config) {
    static const Eigen::MatrixXd basis = design_at_hours();
    static const Eigen::MatrixXd penalty = cyclic_second_difference_penalty();
    static const Eigen::MatrixXd z = sum_to_zero_basis();
    static const Eigen::MatrixXd bz = basis * z;
    static const Eigen::MatrixXd pz = z.transpose() * penalty * z;

    Eigen::VectorXd y(kHoursPerDay);
    for (int h = 0; h < kHoursPerDay; ++h) {
        y(h) = counts[static_cast<std::size_t>(h)];
    }
    const double mean = y.mean();

    // Parameters: [intercept, gamma (23)], coefficients beta = z * gamma.
    const int p = kBasis;
    Eigen::MatrixXd x(kHoursPerDay, p);
    x.col(0).setOnes();
    x.rightCols(p - 1) = bz;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
    s.bottomRightCorner(p - 1, p - 1) =
        mean * (config.smoothing * pz + config.ridge * Eigen::MatrixXd::Identity(p - 1, p - 1));

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    theta(0) = std::log(mean);

    SmoothedProfile out;
    out.basis_size = kBasis;
    out.grid_per_hour = config.grid_per_hour;
    for (int it = 1; it <= config.max_iterations; ++it) {
        const Eigen::VectorXd eta = x * theta;
        const Eigen::VectorXd mu = eta.array().exp();
        const Eigen::VectorXd zwork = eta.array() + (y - mu).array() / mu.array();
        const Eigen::MatrixXd xtw = x.transpose() * mu.asDiagonal();
        const Eigen::MatrixXd lhs = xtw * x + s;
        const Eigen::VectorXd next = lhs.ldlt().solve(xtw * zwork);
        const Eigen::VectorXd beta_old = z * theta.tail(p - 1);
        const Eigen::VectorXd beta_new = z * next.tail(p - 1);
        const double delta = std::max(std::abs(next(0) - theta(0)), (beta_new - beta_old).cwiseAbs().maxCoeff());
        theta = next;
        out.iterations = it;
        if (!std::isfinite(delta)) {
            break;
        }
        if (delta < config.tolerance) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        spdlog::warn("cyclic GAM did not converge after {} iterations", out.iterations);
    }

    out.intercept = theta(0);
    const Eigen::VectorXd beta = z * theta.tail(p - 1);
    out.coeffs.assign(beta.data(), beta.data() + beta.size());
    for (int h = 0; h < kHoursPerDay; ++h) {
        out.lambda[static_cast<std::size_t>(h)] = std::exp(eta_at(out.coeffs, out.intercept, h, 0.0));
    }
    const int g = config.grid_per_hour;
    out.fine.resize(static_cast<std::size_t>(kHoursPerDay * g));
    for (int i = 0; i < kHoursPerDay * g; ++i) {
        out.fine[static_cast<std::size_t>(i)] =
            std::exp(eta_at(out.coeffs, out.intercept, i / g, static_cast<double>(i % g) / g));
    }
    return out;
}

}  // namespace

double cubic_bspline(double u) {
    const double a = std::abs(u);
    if (a >= 2.0) {
        return 0.0;
    }
    if (a >= 1.0) {
        const double t = 2.0 - a;
        return t * t * t / 6.0;
    }
    return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

SmoothedProfile fit_cyclic_gam(std::span<const double, kHoursPerDay> counts, const GamConfig& config) {
    double total = 0.0;
    for (double c : counts) {
        if (!(c >= 0.0)) {
            throw DataError("cyclic GAM needs non-negative counts");
        }
        total += c;
    }
    if (!(total > 0.0)) {
        throw DataError("cyclic GAM on all-zero counts");
    }
    if (config.grid_per_hour < 1) {
        throw UsageError("GAM grid must have at least one point per hour");
    }

    // Fitting on the canonical rotation makes the result exactly rotation covariant.
    const int r = canonical_rotation(counts);
    HourVector rotated{};
    for (int i = 0; i < kHoursPerDay; ++i) {
        rotated[static_cast<std::size_t>(i)] = counts[static_cast<std::size_t>((i + r) % kHoursPerDay)];
    }
    SmoothedProfile fit = fit_canonical(rotated, config);
    if (r == 0) {
        return fit;
    }

    // Undo the rotation: index i of the canonical fit is hour (i + r) of the input.
    SmoothedProfile out = fit;
    out.lambda = rotate(fit.lambda, r);
    for (int j = 0; j < kBasis; ++j) {
        out.coeffs[static_cast<std::size_t>((j + r) % kBasis)] = fit.coeffs[static_cast<std::size_t>(j)];
    }
    const std::size_t n = fit.fine.size();
    const std::size_t shift = static_cast<std::size_t>(r * fit.grid_per_hour);
    for (std::size_t i = 0; i < n; ++i) {
        out.fine[(i + shift) % n] = fit.fine[i];
    }
    return out;
}

double evaluate_gam(const SmoothedProfile& fit, double hour) {
    double h = std::fmod(hour, static_cast<double>(kHoursPerDay));
    if (h < 0) {
        h += kHoursPerDay;
    }
    const double whole = std::floor(h);
    return std::exp(eta_at(fit.coeffs, fit.intercept, static_cast<int>(whole), h - whole));
}

}  // namespace circtz
