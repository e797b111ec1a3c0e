#include "omap/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <stdexcept>

namespace omap::la {

std::vector<std::complex<double>> eigenvalues(const CMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    CMatrix work = a;  // zgeev overwrites
    std::vector<std::complex<double>> w(n);
    lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(work.data()), n,
        reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
    if (info != 0) throw std::runtime_error("zgeev failed with info=" + std::to_string(info));
    return w;
}

namespace {

CVector deterministic_start(Eigen::Index n, int variant) {
    CVector v(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double t = 0.7548776662466927 * static_cast<double>(j + 1 + 17 * variant);
        const double u = t - std::floor(t);
        v[j] = std::complex<double>(std::cos(6.283185307179586 * u),
                                    std::sin(6.283185307179586 * u));
    }
    v /= v.norm();
    return v;
}

double chain_norm_impl(const std::vector<const CMatrix*>& chain, double tol, int max_iter) {
    if (chain.empty()) throw std::invalid_argument("chain_operator_norm: empty chain");
    const Eigen::Index n_in = chain.front()->cols();
    double best = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        CVector v = deterministic_start(n_in, variant);
        double sigma = 0.0, prev = -1.0;
        for (int it = 0; it < max_iter; ++it) {
            CVector w = v;
            for (const CMatrix* m : chain) w = (*m) * w;
            sigma = w.norm();
            if (sigma == 0.0) break;
            for (auto mi = chain.rbegin(); mi != chain.rend(); ++mi)
                w = (*mi)->adjoint() * w;
            const double wn = w.norm();
            if (wn == 0.0) break;
            v = w / wn;
            if (prev >= 0.0 && std::abs(sigma - prev) <= tol * std::max(1.0, sigma)) break;
            prev = sigma;
        }
        best = std::max(best, sigma);
        if (variant == 0 && sigma > 0.0) break;  // second start only if degenerate
    }
    return best;
}

}  // namespace

double operator_norm(const CMatrix& a, double tol, int max_iter) {
    std::vector<const CMatrix*> chain{&a};
    return chain_norm_impl(chain, tol, max_iter);
}

double chain_operator_norm(const std::vector<const CMatrix*>& chain, double tol, int max_iter) {
    return chain_norm_impl(chain, tol, max_iter);
}

double power_norm(const CMatrix& a, int k, double tol) {
    if (k < 1) throw std::invalid_argument("power_norm: k must be >= 1");
    std::vector<const CMatrix*> chain(k, &a);
    return chain_norm_impl(chain, tol, 2000);
}

std::vector<double> singular_values(const CMatrix& a) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    if (m == 0 || n == 0) return {};
    CMatrix work = a;
    std::vector<double> s(std::min(m, n));
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n,
                                     reinterpret_cast<lapack_complex_double*>(work.data()), m,
                                     s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw std::runtime_error("zgesdd failed with info=" + std::to_string(info));
    return s;
}

double spectral_radius(const CMatrix& a) {
    double r = 0.0;
    for (const auto& z : eigenvalues(a)) r = std::max(r, std::abs(z));
    return r;
}

}  // namespace omap::la
