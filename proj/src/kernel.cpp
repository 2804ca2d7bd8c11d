#include "mlgp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mlgp {

KernelParams KernelParams::init(int latent_dim) {
    KernelParams p;
    p.log_variance = Matrix::from_scalar(0.0);                                  // sigma_rbf^2 = 1
    p.log_inv_lengthscales = Matrix::constant(1, latent_dim, std::log(0.5));    // gamma_q = 0.5
    return p;
}

double KernelParams::variance() const { return std::exp(log_variance.scalar()); }

double kernel_eval(const KernelParams& params, const std::vector<double>& x,
                   const std::vector<double>& x_prime) {
    const int q = params.latent_dim();
    if (int(x.size()) != q || int(x_prime.size()) != q)
        throw ShapeMismatch("kernel_eval input length");
    double d2 = 0;
    for (int k = 0; k < q; ++k) {
        double d = x[k] - x_prime[k];
        d2 += std::exp(params.log_inv_lengthscales(0, k)) * d * d;
    }
    return params.variance() * std::exp(-0.5 * d2);
}

Matrix gram(const KernelParams& params, const Matrix& a, const Matrix& b) {
    const int q = params.latent_dim();
    if (a.cols() != q || b.cols() != q) throw ShapeMismatch("gram latent dimension");
    std::vector<double> g(q);
    for (int k = 0; k < q; ++k) g[k] = std::exp(params.log_inv_lengthscales(0, k));
    double s2 = params.variance();
    Matrix out(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.rows(); ++j) {
            double d2 = 0;
            for (int k = 0; k < q; ++k) {
                double d = a(i, k) - b(j, k);
                d2 += g[k] * d * d;
            }
            out(i, j) = s2 * std::exp(-0.5 * d2);
        }
    }
    return out;
}

ad::Var gram(ad::Tape& tape, ad::Var log_variance, ad::Var log_inv_lengthscales, ad::Var a,
             ad::Var b) {
    return tape.ard_gram(log_variance, log_inv_lengthscales, a, b);
}

ArdRelevances ard_relevances(const KernelParams& params) {
    ArdRelevances r;
    const int q = params.latent_dim();
    r.gamma.resize(q);
    for (int k = 0; k < q; ++k) r.gamma[k] = std::exp(params.log_inv_lengthscales(0, k));
    r.descending.resize(q);
    std::iota(r.descending.begin(), r.descending.end(), 0);
    std::stable_sort(r.descending.begin(), r.descending.end(),
                     [&](int i, int j) { return r.gamma[i] > r.gamma[j]; });
    return r;
}

}  // namespace mlgp
