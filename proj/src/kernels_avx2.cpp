#include "snn/kernels.hpp"

#ifdef SNN_HAVE_AVX2

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace snn::kernels {

namespace {

// exp() for four doubles, Cephes-style: reduce x = n*ln2 + r with |r| <= ln2/2,
// evaluate exp(r) as a rational in r^2, scale by 2^n through the exponent
// bits. Accurate to ~1 ulp for x in [-708, 709]; the sigmoid below only passes
// non-positive arguments, which keeps 2^n representable as a normal double.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
    x = _mm256_min_pd(x, _mm256_set1_pd(709.0));

    const __m256d nd = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(nd, ln2_hi, x);
    x = _mm256_fnmadd_pd(nd, ln2_lo, x);

    const __m256d xx = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(p0, xx, p1);
    px = _mm256_fmadd_pd(px, xx, p2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
    qx = _mm256_fmadd_pd(qx, xx, q2);
    qx = _mm256_fmadd_pd(qx, xx, q3);
    __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

    const __m128i n32 = _mm256_cvtpd_epi32(nd);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(r, _mm256_castsi256_pd(pow2));
}

inline double hsum_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void sigmoid_batch_avx2(const double* pot, double* out, std::size_t n, double inv_lambda) {
    // Same open-interval clamp as the scalar kernel and firing_probability().
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    const __m256d scale = _mm256_set1_pd(inv_lambda);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d lo_v = _mm256_set1_pd(lo);
    const __m256d hi_v = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d z = _mm256_mul_pd(_mm256_loadu_pd(pot + i), scale);
        const __m256d neg_abs = _mm256_min_pd(z, _mm256_sub_pd(zero, z));
        const __m256d e = exp_pd(neg_abs);
        const __m256d nonneg = _mm256_cmp_pd(z, zero, _CMP_GE_OQ);
        const __m256d num = _mm256_blendv_pd(e, one, nonneg);
        const __m256d p = _mm256_div_pd(num, _mm256_add_pd(one, e));
        _mm256_storeu_pd(out + i, _mm256_min_pd(hi_v, _mm256_max_pd(lo_v, p)));
    }
    for (; i < n; ++i) {
        const double z = pot[i] * inv_lambda;
        const double e = std::exp(z >= 0.0 ? -z : z);
        const double p = (z >= 0.0 ? 1.0 : e) / (1.0 + e);
        out[i] = std::min(hi, std::max(lo, p));
    }
}

void pattern_products_avx2(const double* p, std::size_t k, double* out) {
    out[0] = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t half = std::size_t{1} << i;
        const double pi = p[i], qi = 1.0 - p[i];
        if (half >= 4) {
            const __m256d pv = _mm256_set1_pd(pi), qv = _mm256_set1_pd(qi);
            for (std::size_t m = 0; m < half; m += 4) {
                const __m256d v = _mm256_loadu_pd(out + m);
                _mm256_storeu_pd(out + half + m, _mm256_mul_pd(v, pv));
                _mm256_storeu_pd(out + m, _mm256_mul_pd(v, qv));
            }
        } else {
            for (std::size_t m = 0; m < half; ++m) {
                out[half + m] = out[m] * pi;
                out[m] *= qi;
            }
        }
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum_pd(acc);
    for (; i < n; ++i)
        s += x[i];
    return s;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double s = hsum_pd(acc);
    for (; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

} // namespace

const Backend& avx2_backend() {
    static const Backend b{
        "avx2", sigmoid_batch_avx2, pattern_products_avx2,
        axpy_avx2, sum_avx2, dot_avx2,
    };
    return b;
}

} // namespace snn::kernels

#endif // SNN_HAVE_AVX2
