#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "afp/error.hpp"

namespace afp {

// Shewchuk-style exact accumulation (the algorithm behind Python's math.fsum).
// The result is the correctly rounded sum of the inputs, so it does not depend
// on the order in which values were added.
class ExactSum {
public:
    void add(double x) {
        std::size_t used = 0;
        for (std::size_t k = 0; k < partials_.size(); ++k) {
            double y = partials_[k];
            if (std::fabs(x) < std::fabs(y)) {
                std::swap(x, y);
            }
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) {
                partials_[used++] = lo;
            }
            x = hi;
        }
        partials_.resize(used);
        partials_.push_back(x);
    }

    double value() const {
        // Sum partials from largest to smallest with a final round-to-even
        // correction for exact halfway cases (as in CPython's fsum).
        std::size_t n = partials_.size();
        if (n == 0) {
            return 0.0;
        }
        double hi = partials_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = partials_[--n];
            hi = x + y;
            const double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0) {
                break;
            }
        }
        if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                      (lo > 0.0 && partials_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            if (y == x - hi) {
                hi = x;
            }
        }
        return hi;
    }

    void reset() { partials_.clear(); }

private:
    std::vector<double> partials_;
};

/// Index into a packed row-major lower triangle: row i, column j <= i.
inline std::size_t tri_index(std::size_t i, std::size_t j) {
    return i * (i + 1) / 2 + j;
}

inline std::size_t tri_size(std::size_t n) { return n * (n + 1) / 2; }

/// Cholesky factor L (packed lower triangle) of a symmetric positive definite
/// matrix given as a full row-major n x n array. Throws if the matrix is not
/// positive definite; the message points at the shrinkage knob since that is
/// the only way callers end up here.
inline std::vector<double> cholesky_packed(const std::vector<double>& full,
                                           std::size_t n) {
    require(full.size() == n * n, "cholesky: matrix size mismatch");
    std::vector<double> L(tri_size(n), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = full[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            const double v = L[tri_index(j, k)];
            d -= v * v;
        }
        if (!(d > 0.0)) {
            throw Error("Cholesky factorization failed at pivot " +
                        std::to_string(j) +
                        ": matrix not positive definite; retry with a larger "
                        "shrinkage value");
        }
        const double diag = std::sqrt(d);
        L[tri_index(j, j)] = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = full[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= L[tri_index(i, k)] * L[tri_index(j, k)];
            }
            L[tri_index(i, j)] = s / diag;
        }
    }
    return L;
}

/// Solve L y = b by forward substitution, L packed lower-triangular.
inline std::vector<double> forward_solve_packed(const std::vector<double>& L,
                                                std::size_t n,
                                                const std::vector<double>& b) {
    require(L.size() == tri_size(n) && b.size() == n,
            "forward_solve: dimension mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        const std::size_t row = i * (i + 1) / 2;
        for (std::size_t j = 0; j < i; ++j) {
            s -= L[row + j] * y[j];
        }
        y[i] = s / L[row + i];
    }
    return y;
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

} // namespace afp
