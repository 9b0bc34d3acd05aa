#include "loess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace xsim::detail {

namespace {

constexpr int kMaxDegree = 2;

// Solves the (degree+1)^2 normal equations in place; returns the intercept or nothing when singular.
std::optional<double> solve_intercept(std::array<std::array<double, kMaxDegree + 2>, kMaxDegree + 1> system,
                                      int degree) {
    const int dim = degree + 1;
    const double scale = std::abs(system[0][0]);
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int row = col + 1; row < dim; ++row) {
            if (std::abs(system[row][col]) > std::abs(system[pivot][col])) {
                pivot = row;
            }
        }
        if (std::abs(system[pivot][col]) <= 1e-10 * scale) {
            return std::nullopt;
        }
        std::swap(system[col], system[pivot]);
        for (int row = col + 1; row < dim; ++row) {
            const double factor = system[row][col] / system[col][col];
            for (int k = col; k <= dim; ++k) {
                system[row][k] -= factor * system[col][k];
            }
        }
    }
    std::array<double, kMaxDegree + 1> coef{};
    for (int row = dim - 1; row >= 0; --row) {
        double acc = system[row][dim];
        for (int k = row + 1; k < dim; ++k) {
            acc -= system[row][k] * coef[k];
        }
        coef[row] = acc / system[row][row];
    }
    return coef[0];
}

}  // namespace

std::optional<double> local_fit(std::span<const double> values, double x, std::size_t left, std::size_t right,
                                double bandwidth, int degree) {
    degree = std::clamp(degree, 0, kMaxDegree);
    int weighted_points = 0;
    // Moments of u = (j - x) / bandwidth up to order 2 * degree.
    std::array<double, 2 * kMaxDegree + 1> moments{};
    std::array<double, kMaxDegree + 1> rhs{};
    for (std::size_t j = left; j <= right; ++j) {
        const double d = std::abs(static_cast<double>(j) - x);
        double w = 0.0;
        if (bandwidth <= 0.0) {
            w = d == 0.0 ? 1.0 : 0.0;
        } else {
            const double r = d / bandwidth;
            if (r < 1.0) {
                const double c = 1.0 - r * r * r;
                w = c * c * c;
            }
        }
        if (w <= 0.0) {
            continue;
        }
        ++weighted_points;
        const double u = bandwidth > 0.0 ? (static_cast<double>(j) - x) / bandwidth : 0.0;
        double p = w;
        for (int a = 0; a <= 2 * degree; ++a) {
            moments[a] += p;
            if (a <= degree) {
                rhs[a] += p * values[j];
            }
            p *= u;
        }
    }
    if (weighted_points == 0) {
        return std::nullopt;
    }
    for (int d = std::min(degree, weighted_points - 1); d >= 0; --d) {
        std::array<std::array<double, kMaxDegree + 2>, kMaxDegree + 1> system{};
        for (int r = 0; r <= d; ++r) {
            for (int c = 0; c <= d; ++c) {
                system[r][c] = moments[r + c];
            }
            system[r][d + 1] = rhs[r];
        }
        if (auto fit = solve_intercept(system, d)) {
            return fit;
        }
    }
    return rhs[0] / moments[0];
}

std::optional<double> loess_at(std::span<const double> values, double x, std::size_t span, int degree) {
    const std::size_t n = values.size();
    if (n == 0 || span == 0) {
        return std::nullopt;
    }
    std::size_t left = 0;
    std::size_t right = n - 1;
    double extra = 0.0;
    if (span >= n) {
        extra = static_cast<double>((span - n) / 2);
    } else {
        const double centre = std::clamp(std::floor(x), 0.0, static_cast<double>(n - 1));
        const auto half = static_cast<double>((span - 1) / 2);
        const double start = std::clamp(centre - half, 0.0, static_cast<double>(n - span));
        left = static_cast<std::size_t>(start);
        right = left + span - 1;
    }
    const double bandwidth =
        std::max(x - static_cast<double>(left), static_cast<double>(right) - x) + extra;
    return local_fit(values, x, left, right, bandwidth, degree);
}

}  // namespace xsim::detail
