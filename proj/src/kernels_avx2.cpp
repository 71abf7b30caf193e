// AVX2 kernel variants. This translation unit is the only one compiled with
// -mavx2; callers reach it through the dispatch table. Operation order
// mirrors the scalar reference exactly: explicit mul/add intrinsics (no FMA),
// lane combination (l0+l1)+(l2+l3), scalar tails.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "plume/kernels.hpp"

namespace plume::kernels {
namespace {

inline double hsum_blocked(__m256d acc) {
    const __m128d lo = _mm256_castpd256_pd128(acc);   // lanes 0,1
    const __m128d hi = _mm256_extractf128_pd(acc, 1); // lanes 2,3
    const __m128d s01 = _mm_hadd_pd(lo, lo);          // l0+l1
    const __m128d s23 = _mm_hadd_pd(hi, hi);          // l2+l3
    return _mm_cvtsd_f64(_mm_add_sd(s01, s23));
}

void ou_update_avx2(double* v, const double* xi, double decay, double scale, std::size_t n) {
    const __m256d vdecay = _mm256_set1_pd(decay);
    const __m256d vscale = _mm256_set1_pd(scale);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d kept = _mm256_mul_pd(_mm256_loadu_pd(v + i), vdecay);
        const __m256d kick = _mm256_mul_pd(vscale, _mm256_loadu_pd(xi + i));
        _mm256_storeu_pd(v + i, _mm256_add_pd(kept, kick));
    }
    for (; i < n; ++i) {
        const double kept = v[i] * decay;
        const double kick = scale * xi[i];
        v[i] = kept + kick;
    }
}

void advect_avx2(double* pos, const double* fluct, double wind, double shared, double dt,
                 std::size_t n) {
    const __m256d vwind = _mm256_set1_pd(wind);
    const __m256d vshared = _mm256_set1_pd(shared);
    const __m256d vdt = _mm256_set1_pd(dt);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d local = _mm256_add_pd(_mm256_loadu_pd(fluct + i), vshared);
        const __m256d vel = _mm256_add_pd(vwind, local);
        const __m256d moved = _mm256_add_pd(_mm256_loadu_pd(pos + i), _mm256_mul_pd(vdt, vel));
        _mm256_storeu_pd(pos + i, moved);
    }
    for (; i < n; ++i) {
        const double local = fluct[i] + shared;
        const double vel = wind + local;
        pos[i] = pos[i] + dt * vel;
    }
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    }
    double total = hsum_blocked(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, prod);
    }
    double total = hsum_blocked(acc);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

void axpy_avx2(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d scaled = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), scaled));
    }
    for (; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}

void relu_avx2(double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        // maxpd returns the second operand on equality, matching x > 0 ? x : 0
        _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) {
        x[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_grad_avx2(double* g, const double* pre, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), mask));
    }
    for (; i < n; ++i) {
        g[i] = pre[i] > 0.0 ? g[i] : 0.0;
    }
}

void matvec_avx2(const double* w, const double* x, const double* bias, double* out,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = bias[r] + dot_avx2(w + r * cols, x, cols);
    }
}

void count_sphere_avx2(const double* px, const double* py, const double* pz,
                       const std::uint8_t* species, std::size_t n, double cx, double cy,
                       double cz, double r2, std::uint32_t counts[2]) {
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    const __m256d vcz = _mm256_set1_pd(cz);
    const __m256d vr2 = _mm256_set1_pd(r2);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), vcx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), vcy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pz + i), vcz);
        __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        d2 = _mm256_add_pd(d2, _mm256_mul_pd(dz, dz));
        const int hits = _mm256_movemask_pd(_mm256_cmp_pd(d2, vr2, _CMP_LE_OQ));
        if (hits) {
            for (int lane = 0; lane < 4; ++lane) {
                if (hits & (1 << lane)) {
                    ++counts[species[i + lane] - 1];
                }
            }
        }
    }
    for (; i < n; ++i) {
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

void adam_update_avx2(double* w, double* m, double* v, const double* g, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double bc1_inv,
                      double bc2_inv, double decay_mul) {
    const double omb1 = 1.0 - beta1;
    const double omb2 = 1.0 - beta2;
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vomb1 = _mm256_set1_pd(omb1);
    const __m256d vomb2 = _mm256_set1_pd(omb2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vbc1 = _mm256_set1_pd(bc1_inv);
    const __m256d vbc2 = _mm256_set1_pd(bc2_inv);
    const __m256d vdecay = _mm256_set1_pd(decay_mul);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        const __m256d mi =
            _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vomb1, gi));
        const __m256d gg = _mm256_mul_pd(gi, gi);
        const __m256d vi =
            _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(vomb2, gg));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_mul_pd(mi, vbc1);
        const __m256d vhat = _mm256_mul_pd(vi, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
        const __m256d decayed = _mm256_mul_pd(_mm256_loadu_pd(w + i), vdecay);
        _mm256_storeu_pd(w + i, _mm256_sub_pd(decayed, step));
    }
    for (; i < n; ++i) {
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

constexpr KernelTable kAvx2Table{
    "avx2",        ou_update_avx2, advect_avx2,       sum_avx2,
    dot_avx2,      axpy_avx2,      relu_avx2,         relu_grad_avx2,
    matvec_avx2,   count_sphere_avx2,                 adam_update_avx2,
};

}  // namespace

const KernelTable& avx2_kernels() { return kAvx2Table; }

}  // namespace plume::kernels

#endif  // x86_64
