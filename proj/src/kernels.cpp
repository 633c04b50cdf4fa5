#include "snn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace snn::kernels {

namespace {

void sigmoid_batch_scalar(const double* pot, double* out, std::size_t n, double inv_lambda) {
    // Clamp to the open interval, matching firing_probability(): the quotient
    // saturates to exactly 1 once z exceeds ~36 and to 0 below ~-745.
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = pot[i] * inv_lambda;
        const double e = std::exp(z >= 0.0 ? -z : z);
        const double p = (z >= 0.0 ? 1.0 : e) / (1.0 + e);
        out[i] = std::min(hi, std::max(lo, p));
    }
}

void pattern_products_scalar(const double* p, std::size_t k, double* out) {
    out[0] = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t half = std::size_t{1} << i;
        const double pi = p[i], qi = 1.0 - p[i];
        for (std::size_t m = 0; m < half; ++m) {
            out[half + m] = out[m] * pi;
            out[m] *= qi;
        }
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i];
    return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

const Backend* pick_default() {
#ifdef SNN_HAVE_AVX2
    if (__builtin_cpu_supports("avx2"))
        return &avx2_backend();
#endif
    return &scalar_backend();
}

const Backend* pick_initial() {
    if (const char* req = std::getenv("SNN_KERNELS")) {
        if (std::strcmp(req, "scalar") == 0)
            return &scalar_backend();
#ifdef SNN_HAVE_AVX2
        if (std::strcmp(req, "avx2") == 0 && __builtin_cpu_supports("avx2"))
            return &avx2_backend();
#endif
    }
    return pick_default();
}

const Backend*& active_slot() {
    static const Backend* slot = pick_initial();
    return slot;
}

} // namespace

const Backend& scalar_backend() {
    static const Backend b{
        "scalar", sigmoid_batch_scalar, pattern_products_scalar,
        axpy_scalar, sum_scalar, dot_scalar,
    };
    return b;
}

const Backend& active() { return *active_slot(); }

bool set_active(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        active_slot() = &scalar_backend();
        return true;
    }
#ifdef SNN_HAVE_AVX2
    if (std::strcmp(name, "avx2") == 0 && __builtin_cpu_supports("avx2")) {
        active_slot() = &avx2_backend();
        return true;
    }
#endif
    return false;
}

} // namespace snn::kernels
