// Copyright 2026 The Toric Learn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TORIC_LANCZOS_HPP
#define TORIC_LANCZOS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "toric/common.hpp"

namespace toric {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    using Map = Eigen::Map<const Eigen::VectorXd>;
    return Map(a.data(), static_cast<Eigen::Index>(a.size())).dot(Map(b.data(), static_cast<Eigen::Index>(b.size())));
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
    for (double &v : x) v *= alpha;
}

struct LanczosOptions {
    double tol = 1e-10;
    size_t krylov_dim = 24;
    size_t keep = 8;
    size_t max_restarts = 300;
    size_t power_iterations = 2000;
};

struct LanczosResult {
    Vector vector;
    double eigenvalue = 0;
    double residual = std::numeric_limits<double>::infinity();
    size_t matvecs = 0;
    size_t restarts = 0;
    bool converged = false;
    bool used_fallback = false;
};

/// Lowest eigenpair of a real symmetric operator given as y = apply(x).
///
/// Thick-restart Lanczos with full (two-pass) reorthogonalization. The
/// projected matrix is accumulated column by column from the
/// orthogonalization coefficients, so after a restart the kept Ritz vectors
/// and the carried residual direction need no special casing. If the
/// Krylov iteration runs out of restarts, shifted power iteration on
/// (shift - H) continues from the best Ritz vector.
///
/// `apply` must already include any projection onto a symmetry sector.
/// Convergence means ||H v - lambda v|| <= tol for the normalized v.
inline LanczosResult lowest_eigenpair(const std::function<void(std::span<const double>, std::span<double>)> &apply,
                                      Vector start, const LanczosOptions &opt, double spectral_bound) {
    using Eigen::Index;
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    const Index dim = static_cast<Index>(start.size());
    if (dim == 0) throw std::invalid_argument("empty operator");
    LanczosResult out;
    Eigen::Map<Vec> start_map(start.data(), dim);
    const double nrm = start_map.norm();
    if (!(nrm > 0) || !std::isfinite(nrm)) throw NumericalError("Lanczos start vector has zero or non-finite norm");

    const Index m = static_cast<Index>(std::max<size_t>(3, std::min<size_t>(opt.krylov_dim, start.size())));
    const Index keep = std::min(static_cast<Index>(opt.keep), m - 2);
    Mat V(dim, m);
    V.col(0) = start_map / nrm;
    Mat T = Mat::Zero(m, m);
    Vec w(dim);
    Vec hx(dim);

    Vec best;
    double best_theta = 0;
    double best_res = std::numeric_limits<double>::infinity();

    auto apply_vec = [&](const Vec &x, Vec &y) {
        apply(std::span<const double>(x.data(), static_cast<size_t>(dim)), std::span<double>(y.data(), static_cast<size_t>(dim)));
        ++out.matvecs;
    };
    auto true_residual = [&](const Vec &x, double theta) {
        apply_vec(x, hx);
        return (hx - theta * x).norm();
    };

    Index j = 0;
    for (size_t restart = 0; restart <= opt.max_restarts; ++restart) {
        out.restarts = restart;
        double beta = 0;
        bool breakdown = false;
        while (true) {
            {
                const Vec vj = V.col(j);
                apply_vec(vj, w);
            }
            Vec coeff = Vec::Zero(j + 1);
            for (int pass = 0; pass < 2; ++pass) {
                const Vec c = V.leftCols(j + 1).transpose() * w;
                w.noalias() -= V.leftCols(j + 1) * c;
                coeff += c;
            }
            T.block(0, j, j + 1, 1) = coeff;
            T.block(j, 0, 1, j + 1) = coeff.transpose();
            beta = w.norm();
            if (!std::isfinite(beta)) throw NumericalError("Lanczos produced non-finite values");
            if (beta <= 1e-14 * std::max(1.0, spectral_bound)) {
                breakdown = true;
                break;
            }
            if (j + 1 == m) break;
            V.col(j + 1) = w / beta;
            ++j;
        }

        const Index n_basis = j + 1;
        Eigen::SelfAdjointEigenSolver<Mat> eig(T.topLeftCorner(n_basis, n_basis));
        const Vec theta = eig.eigenvalues();
        const Mat Y = eig.eigenvectors();
        const double estimate = breakdown ? 0.0 : beta * std::abs(Y(j, 0));

        if (estimate <= opt.tol || breakdown) {
            Vec x = V.leftCols(n_basis) * Y.col(0);
            x.normalize();
            const double res = true_residual(x, theta(0));
            if (res < best_res) {
                best = x;
                best_res = res;
                best_theta = theta(0);
            }
            if (res <= opt.tol) {
                out.vector.assign(x.data(), x.data() + dim);
                out.eigenvalue = theta(0);
                out.residual = res;
                out.converged = true;
                return out;
            }
            if (breakdown) {
                // Invariant subspace reached but rounding spoiled the residual:
                // restart from the Ritz vector alone.
                V.col(0) = x;
                T.setZero();
                j = 0;
                continue;
            }
        }

        const Index l = std::min(keep, n_basis - 1);
        const Mat kept = V.leftCols(n_basis) * Y.leftCols(l);
        T.setZero();
        for (Index c = 0; c < l; ++c) {
            T(c, c) = theta(c);
            T(c, l) = T(l, c) = beta * Y(j, c);
        }
        if (best.size() == 0 || restart + 1 > opt.max_restarts) {
            best = (V.leftCols(n_basis) * Y.col(0)).normalized();
            best_theta = theta(0);
            best_res = estimate;
        }
        V.leftCols(l) = kept;
        V.col(l) = w / beta;
        j = l;
    }

    // Fallback: shifted power iteration on (shift - H).
    out.used_fallback = true;
    Vec x = best;
    best_res = std::numeric_limits<double>::infinity();
    for (size_t it = 0; it < opt.power_iterations; ++it) {
        apply_vec(x, hx);
        const double theta = x.dot(hx);
        const double res = (hx - theta * x).norm();
        if (res < best_res) {
            best_res = res;
            best_theta = theta;
            best = x;
        }
        if (res <= opt.tol) break;
        x = (spectral_bound * x - hx).normalized();
    }
    out.vector.assign(best.data(), best.data() + dim);
    out.eigenvalue = best_theta;
    out.residual = best_res;
    out.converged = best_res <= opt.tol;
    return out;
}

}  // namespace toric

#endif  // TORIC_LANCZOS_HPP
