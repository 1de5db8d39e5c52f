#include "circtz/analyze.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

namespace circtz {
namespace {

constexpr int kN = kHoursPerDay;

HourVector normalized(const HourVector& v, const char* what) {
    double total = 0.0;
    for (double x : v) {
        if (x < 0.0) {
            throw DataError(std::string(what) + " distribution has a negative entry");
        }
        total += x;
    }
    if (!(total > 0.0)) {
        throw DataError(std::string(what) + " distribution has no mass");
    }
    HourVector out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = v[i] / total;
    }
    return out;
}

// Equality-constrained QP on the free coordinates; bound-active coordinates are pinned at 0.
// Returns the candidate point and the equality multipliers.
std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_subproblem(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                                                             const Eigen::MatrixXd& e, const Eigen::VectorXd& rhs,
                                                             const std::vector<bool>& active) {
    std::vector<int> free;
    for (int i = 0; i < kN; ++i) {
        if (!active[static_cast<std::size_t>(i)]) {
            free.push_back(i);
        }
    }
    const int nf = static_cast<int>(free.size());
    const int ne = static_cast<int>(e.rows());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + ne, nf + ne);
    Eigen::VectorXd b(nf + ne);
    for (int a = 0; a < nf; ++a) {
        for (int c = 0; c < nf; ++c) {
            kkt(a, c) = h(free[a], free[c]);
        }
        for (int r = 0; r < ne; ++r) {
            kkt(a, nf + r) = -e(r, free[a]);
            kkt(nf + r, a) = e(r, free[a]);
        }
        b(a) = -g(free[a]);
    }
    b.tail(ne) = rhs;
    // Rank-revealing solve: with few free coordinates the sine row can vanish on them.
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(b);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(kN);
    for (int a = 0; a < nf; ++a) {
        w(free[a]) = sol(a);
    }
    return {w, sol.tail(ne)};
}

}  // namespace

HourVector redistribute(const HourVector& distribution, const HourVector& weights) {
    HourVector out{};
    for (int j = 0; j < kN; ++j) {
        double acc = 0.0;
        for (int k = 0; k < kN; ++k) {
            const int src = ((j - kShiftHours[static_cast<std::size_t>(k)]) % kN + kN) % kN;
            acc += weights[static_cast<std::size_t>(k)] * distribution[static_cast<std::size_t>(src)];
        }
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

DeconvolutionResult deconvolve(const HourVector& pure_in, const HourVector& real_in, const DeconvolveOptions& options) {
    const HourVector pure = normalized(pure_in, "inferred");
    const HourVector real = normalized(real_in, "external");

    Eigen::MatrixXd a(kN, kN);
    for (int k = 0; k < kN; ++k) {
        HourVector unit{};
        unit[static_cast<std::size_t>(k)] = 1.0;
        const HourVector col = redistribute(pure, unit);
        for (int j = 0; j < kN; ++j) {
            a(j, k) = col[static_cast<std::size_t>(j)];
        }
    }
    Eigen::VectorXd r(kN);
    for (int j = 0; j < kN; ++j) {
        r(j) = real[static_cast<std::size_t>(j)];
    }
    const Eigen::MatrixXd h = a.transpose() * a + 1e-14 * Eigen::MatrixXd::Identity(kN, kN);
    const Eigen::VectorXd g = -a.transpose() * r;

    DeconvolutionResult result;
    Eigen::MatrixXd e(2, kN);
    for (int k = 0; k < kN; ++k) {
        const double theta = kShiftHours[static_cast<std::size_t>(k)] * 2.0 * std::numbers::pi / kN;
        result.theta[static_cast<std::size_t>(k)] = theta;
        e(0, k) = 1.0;
        // sin(pi) is not exactly 0 in floating point; the +12 h shift sits on the axis.
        e(1, k) = kShiftHours[static_cast<std::size_t>(k)] == 12 ? 0.0 : std::sin(theta);
    }
    Eigen::VectorXd rhs(2);
    rhs << 1.0, 0.0;

    // Uniform weights are feasible: the sines of the shift grid cancel pairwise.
    Eigen::VectorXd w = Eigen::VectorXd::Constant(kN, 1.0 / kN);
    std::vector<bool> active(kN, false);
    const double tol = options.tolerance;

    for (int it = 1; it <= options.max_iterations; ++it) {
        result.iterations = it;
        auto [candidate, lambda] = solve_subproblem(h, g, e, rhs, active);
        const Eigen::VectorXd step = candidate - w;
        if (step.cwiseAbs().maxCoeff() <= 1e-15) {
            // Stationary on the current face: check bound multipliers.
            const Eigen::VectorXd mu = h * w + g - e.transpose() * lambda;
            int release = -1;
            double most_negative = -tol;
            for (int i = 0; i < kN; ++i) {
                if (active[static_cast<std::size_t>(i)] && mu(i) < most_negative) {
                    most_negative = mu(i);
                    release = i;
                }
            }
            if (release < 0) {
                result.converged = true;
                break;
            }
            active[static_cast<std::size_t>(release)] = false;
            continue;
        }
        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < kN; ++i) {
            if (!active[static_cast<std::size_t>(i)] && step(i) < 0.0) {
                const double limit = -w(i) / step(i);
                if (limit < alpha) {
                    alpha = limit;
                    blocking = i;
                }
            }
        }
        w += alpha * step;
        if (blocking >= 0) {
            w(blocking) = 0.0;
            active[static_cast<std::size_t>(blocking)] = true;
        }
    }
    if (!result.converged) {
        spdlog::warn("deconvolution stopped after {} iterations without meeting the optimality test",
                     result.iterations);
    }

    for (int k = 0; k < kN; ++k) {
        result.weights[static_cast<std::size_t>(k)] = std::max(0.0, w(k));
    }
    result.optimized = redistribute(pure, result.weights);
    double sum = 0.0;
    double bary = 0.0;
    for (int k = 0; k < kN; ++k) {
        sum += result.weights[static_cast<std::size_t>(k)];
        bary += result.weights[static_cast<std::size_t>(k)] * e(1, k);
    }
    result.sum_residual = std::abs(sum - 1.0);
    result.barycenter_residual = std::abs(bary);
    double obj = 0.0;
    for (int j = 0; j < kN; ++j) {
        const double d = result.optimized[static_cast<std::size_t>(j)] - real[static_cast<std::size_t>(j)];
        obj += d * d;
    }
    result.objective = 0.5 * obj;
    result.pearson = pearson(result.optimized, real);
    result.spearman = spearman(result.optimized, real);
    return result;
}

}  // namespace circtz
