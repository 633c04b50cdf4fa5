#pragma once

// Numeric inner-loop kernels used by the probability engine, bundled per
// backend. The scalar backend is the reference; on x86-64 an AVX2 backend is
// compiled in and selected at runtime when the CPU supports it. Backends are
// interchangeable up to floating-point rounding (the AVX2 lane uses a
// polynomial exp and different reduction orders); within one backend all
// results are bit-reproducible across runs.

#include <cstddef>

namespace snn::kernels {

struct Backend {
    const char* name;

    // out[i] = 1 / (1 + exp(-pot[i] * inv_lambda)), computed via exp of a
    // non-positive argument so the result stays strictly inside (0,1) for
    // |pot * inv_lambda| up to ~700.
    void (*sigmoid_batch)(const double* pot, double* out, std::size_t n, double inv_lambda);

    // Product table over all firing patterns of k independent units:
    // out[m] = prod_{i<k} (m >> i & 1 ? p[i] : 1 - p[i]) for m in [0, 2^k).
    // out must hold 2^k doubles.
    void (*pattern_products)(const double* p, std::size_t k, double* out);

    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    double (*sum)(const double* x, std::size_t n);

    double (*dot)(const double* x, const double* y, std::size_t n);
};

const Backend& scalar_backend();
#ifdef SNN_HAVE_AVX2
const Backend& avx2_backend();
#endif

// Active backend for this process. Chosen on first use: the SNN_KERNELS
// environment variable ("scalar" or "avx2") wins if the request is
// satisfiable, otherwise the widest lane the CPU supports.
const Backend& active();

// Force a backend by name; returns false (and leaves the selection alone)
// if the name is unknown or unavailable on this machine. Intended for tests.
bool set_active(const char* name);

} // namespace snn::kernels
