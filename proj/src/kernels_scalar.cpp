#include <cmath>

#include "plume/kernels.hpp"

// Reference kernels. Reductions run 4 interleaved accumulators and combine
// them as (l0+l1)+(l2+l3) with the tail added last; the AVX2 variants follow
// the identical order, which keeps both paths bit-exact against each other.

namespace plume::kernels {
namespace {

void ou_update_scalar(double* v, const double* xi, double decay, double scale, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double kept = v[i] * decay;
        const double kick = scale * xi[i];
        v[i] = kept + kick;
    }
}

void advect_scalar(double* pos, const double* fluct, double wind, double shared, double dt,
                   std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double local = fluct[i] + shared;
        const double vel = wind + local;
        pos[i] = pos[i] + dt * vel;
    }
}

double sum_scalar(const double* x, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        a0 += x[i];
        a1 += x[i + 1];
        a2 += x[i + 2];
        a3 += x[i + 3];
    }
    double total = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        a0 += a[i] * b[i];
        a1 += a[i + 1] * b[i + 1];
        a2 += a[i + 2] * b[i + 2];
        a3 += a[i + 3] * b[i + 3];
    }
    double total = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}

void relu_scalar(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_grad_scalar(double* g, const double* pre, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = pre[i] > 0.0 ? g[i] : 0.0;
    }
}

void matvec_scalar(const double* w, const double* x, const double* bias, double* out,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
    }
}

void count_sphere_scalar(const double* px, const double* py, const double* pz,
                         const std::uint8_t* species, std::size_t n, double cx, double cy,
                         double cz, double r2, std::uint32_t counts[2]) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = px[i] - cx;
        const double dy = py[i] - cy;
        const double dz = pz[i] - cz;
        double d2 = dx * dx + dy * dy;
        d2 = d2 + dz * dz;
        if (d2 <= r2) {
            ++counts[species[i] - 1];
        }
    }
}

void adam_update_scalar(double* w, double* m, double* v, const double* g, std::size_t n,
                        double lr, double beta1, double beta2, double eps, double bc1_inv,
                        double bc2_inv, double decay_mul) {
    const double omb1 = 1.0 - beta1;
    const double omb2 = 1.0 - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const double mi = beta1 * m[i] + omb1 * g[i];
        const double gg = g[i] * g[i];
        const double vi = beta2 * v[i] + omb2 * gg;
        m[i] = mi;
        v[i] = vi;
        const double mhat = mi * bc1_inv;
        const double vhat = vi * bc2_inv;
        const double denom = std::sqrt(vhat) + eps;
        const double step = lr * (mhat / denom);
        const double decayed = w[i] * decay_mul;
        w[i] = decayed - step;
    }
}

constexpr KernelTable kScalarTable{
    "scalar",         ou_update_scalar, advect_scalar,       sum_scalar,
    dot_scalar,       axpy_scalar,      relu_scalar,         relu_grad_scalar,
    matvec_scalar,    count_sphere_scalar,                   adam_update_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace plume::kernels
