#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace ibnr::optim {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double fx = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Largest sup-norm distance between the best vertex and any other vertex.
template <std::size_t N>
double simplex_diameter(const std::array<std::array<double, N>, N + 1>& v, std::size_t best) {
    double d = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
        for (std::size_t c = 0; c < N; ++c) {
            d = std::max(d, std::abs(v[k][c] - v[best][c]));
        }
    }
    return d;
}

/**
 * Nelder-Mead minimization with the standard coefficients (reflection 1, expansion 2,
 * contraction 1/2, shrink 1/2).
 *
 * The initial simplex is x0 plus `step` along each axis. Non-finite objective values are
 * treated as +inf, so an objective may signal "outside the feasible box" that way.
 * Stops when the simplex diameter drops below `tol` or after `max_iter` iterations.
 */
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(const F& f, const std::array<double, N>& x0, double step, double tol, int max_iter) {
    using Point = std::array<double, N>;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    SimplexResult<N> out;
    auto eval = [&](const Point& p) {
        ++out.evaluations;
        const double y = f(p);
        return std::isnan(y) ? kInf : y;
    };

    std::array<Point, N + 1> v{};
    std::array<double, N + 1> fv{};
    v[0] = x0;
    fv[0] = eval(x0);
    for (std::size_t k = 0; k < N; ++k) {
        v[k + 1] = x0;
        v[k + 1][k] += step;
        fv[k + 1] = eval(v[k + 1]);
    }

    std::array<std::size_t, N + 1> order{};
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    auto affine = [](const Point& a, const Point& b, double t) {
        Point p{};
        for (std::size_t c = 0; c < N; ++c) {
            p[c] = a[c] + t * (b[c] - a[c]);
        }
        return p;
    };

    sort_vertices();
    while (true) {
        const std::size_t best = order[0];
        const std::size_t worst = order[N];
        const std::size_t second = order[N - 1];
        if (simplex_diameter<N>(v, best) < tol) {
            out.converged = true;
            break;
        }
        if (out.iterations >= max_iter) {
            break;
        }
        ++out.iterations;

        Point centroid{};
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t c = 0; c < N; ++c) {
                centroid[c] += v[order[k]][c] / static_cast<double>(N);
            }
        }

        const Point xr = affine(centroid, v[worst], -1.0);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const Point xe = affine(centroid, v[worst], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                v[worst] = xe;
                fv[worst] = fe;
            } else {
                v[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            v[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const Point xc = outside ? affine(centroid, xr, 0.5) : affine(centroid, v[worst], 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[worst])) {
                v[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t k = 1; k <= N; ++k) {
                    const std::size_t idx = order[k];
                    v[idx] = affine(v[best], v[idx], 0.5);
                    fv[idx] = eval(v[idx]);
                }
            }
        }
        sort_vertices();
    }
    out.x = v[order[0]];
    out.fx = fv[order[0]];
    return out;
}

}  // namespace ibnr::optim
