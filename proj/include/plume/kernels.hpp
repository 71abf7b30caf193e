#pragma once

// Data-parallel inner-loop kernels over structure-of-arrays particle and
// network data. Two implementations share one table layout: a scalar
// reference and an AVX2 variant selected at runtime. Both follow the same
// fixed operation order (4-lane blocked reductions, no FMA contraction), so
// they are bit-for-bit interchangeable and equivalence-tested as such.

#include <cstddef>
#include <cstdint>

namespace plume::kernels {

struct KernelTable {
    const char* name;

    /// v[i] = v[i]*decay + scale*xi[i]
    void (*ou_update)(double* v, const double* xi, double decay, double scale, std::size_t n);

    /// pos[i] += dt * (wind + (fluct[i] + shared))
    void (*advect)(double* pos, const double* fluct, double wind, double shared, double dt,
                   std::size_t n);

    /// 4-lane blocked sum: lanes combined as (l0+l1)+(l2+l3), tail appended last.
    double (*sum)(const double* x, std::size_t n);

    /// 4-lane blocked dot product, same association as sum.
    double (*dot)(const double* a, const double* b, std::size_t n);

    /// y[i] += a*x[i]
    void (*axpy)(double* y, const double* x, double a, std::size_t n);

    /// x[i] = x[i] > 0 ? x[i] : 0
    void (*relu)(double* x, std::size_t n);

    /// g[i] = pre[i] > 0 ? g[i] : 0
    void (*relu_grad)(double* g, const double* pre, std::size_t n);

    /// out[r] = bias[r] + dot(w.row(r), x); w is row-major rows x cols.
    void (*matvec)(const double* w, const double* x, const double* bias, double* out,
                   std::size_t rows, std::size_t cols);

    /// counts[s-1] += points of species s within squared radius r2 of (cx,cy,cz);
    /// boundary inclusive. species holds values 1 or 2.
    void (*count_sphere)(const double* px, const double* py, const double* pz,
                         const std::uint8_t* species, std::size_t n, double cx, double cy,
                         double cz, double r2, std::uint32_t counts[2]);

    /// One AdamW element step: w *= decay_mul, then moment update and
    /// bias-corrected step. bc1_inv/bc2_inv are the precomputed 1/(1-beta^t).
    void (*adam_update)(double* w, double* m, double* v, const double* g, std::size_t n,
                        double lr, double beta1, double beta2, double eps, double bc1_inv,
                        double bc2_inv, double decay_mul);
};

const KernelTable& scalar_kernels();

bool avx2_supported();

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
#endif

/// Best table for this machine, chosen once. Set PLUME_KERNELS=scalar to
/// force the reference path.
const KernelTable& active();

}  // namespace plume::kernels
