#ifndef SGCN_SSE_HPP
#define SGCN_SSE_HPP

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "error.hpp"
#include "sgcn_model.hpp"
#include "signed_graph.hpp"

namespace sgcn {

/// Signed Laplacian D̄ - A, with D̄ = diag(|N+_i| + |N-_i|) and A_ij in {+1, -1, 0}.
inline Matrix signed_laplacian(const SignedGraph& g) {
    const auto n = static_cast<Index>(g.num_nodes());
    Matrix lap = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto id = static_cast<NodeId>(i);
        for (NodeId j : g.positive_neighbors(id)) lap(i, j) = -1.0;
        for (NodeId j : g.negative_neighbors(id)) lap(i, j) = 1.0;
        lap(i, i) = static_cast<double>(g.degree(id));
    }
    return lap;
}

struct Eigenpairs {
    Vector values;  // ascending
    Matrix vectors; // column k pairs with values(k); unit norm
};

/// Flips each column so that its largest-magnitude entry is positive. Entries
/// within a relative 1e-9 of the maximum count as tied; the first one wins.
inline void fix_eigenvector_signs(Matrix& vectors) {
    for (Index c = 0; c < vectors.cols(); ++c) {
        const double top = vectors.col(c).cwiseAbs().maxCoeff();
        for (Index r = 0; r < vectors.rows(); ++r) {
            if (std::abs(vectors(r, c)) >= top * (1.0 - 1e-9)) {
                if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
                break;
            }
        }
    }
}

/// The `count` smallest eigenpairs of a dense symmetric matrix (LAPACK dsyevr,
/// index range), signs fixed by fix_eigenvector_signs.
inline Eigenpairs smallest_eigenpairs(const Matrix& symmetric, Index count) {
    const Index n = symmetric.rows();
    if (symmetric.cols() != n) throw ShapeError("eigensolver needs a square matrix");
    if (count < 1 || count > n)
        throw ArgumentError("requested " + std::to_string(count) + " eigenpairs of a " + std::to_string(n) + "x" +
                            std::to_string(n) + " matrix");

    Matrix a = symmetric; // dsyevr destroys its input
    Eigenpairs out;
    out.values.resize(n);
    out.vectors.resize(n, count);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', static_cast<lapack_int>(n), a.data(),
                                           static_cast<lapack_int>(n), 0.0, 0.0, 1, static_cast<lapack_int>(count),
                                           2.0 * LAPACKE_dlamch('S'), &found, out.values.data(), out.vectors.data(),
                                           static_cast<lapack_int>(n), support.data());
    if (info != 0 || found != count)
        throw std::runtime_error("dsyevr failed (info " + std::to_string(info) + ", found " + std::to_string(found) + ")");
    out.values.conservativeResize(count);
    fix_eigenvector_signs(out.vectors);
    return out;
}

/// Signed spectral embedding: eigenvectors of the signed Laplacian for its
/// `dim` smallest eigenvalues, one column per eigenvector, ascending.
inline Eigenpairs spectral_embedding(const SignedGraph& g, Index dim) {
    const auto n = static_cast<Index>(g.num_nodes());
    if (dim < 1 || dim > n)
        throw ArgumentError("embedding dimension " + std::to_string(dim) + " must lie in [1, " + std::to_string(n) + "]");
    return smallest_eigenpairs(signed_laplacian(g), dim);
}

} // namespace sgcn

#endif // SGCN_SSE_HPP
