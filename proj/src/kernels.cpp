#include "ideoscale/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#define IDEOSCALE_X86 1
#include <immintrin.h>
#else
#define IDEOSCALE_X86 0
#endif

namespace ideoscale::kernels {

// ---------------------------------------------------------------- scalar --

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double centered_dot(const double* a, double ca, const double* b, double cb, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (a[i] - ca) * (b[i] - cb);
    return acc;
}

double gather_sum(const std::int32_t* idx, std::size_t n, const double* v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += v[idx[i]];
    return acc;
}

void scale(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

} // namespace scalar

// ------------------------------------------------------------------ avx2 --

#if IDEOSCALE_X86

namespace avx2 {

__attribute__((target("avx2,fma"))) static double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

__attribute__((target("avx2,fma"))) void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

__attribute__((target("avx2,fma"))) double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

__attribute__((target("avx2,fma"))) double sumsq(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

__attribute__((target("avx2,fma"))) double centered_dot(const double* a, double ca, const double* b,
                                                        double cb, std::size_t n) {
    const __m256d vca = _mm256_set1_pd(ca);
    const __m256d vcb = _mm256_set1_pd(cb);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + i), vca);
        __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), vcb);
        acc = _mm256_fmadd_pd(da, db, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += (a[i] - ca) * (b[i] - cb);
    return s;
}

__attribute__((target("avx2,fma"))) double gather_sum(const std::int32_t* idx, std::size_t n,
                                                      const double* v) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
        acc = _mm256_add_pd(acc, _mm256_i32gather_pd(v, vi, 8));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += v[idx[i]];
    return s;
}

__attribute__((target("avx2,fma"))) void scale(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

} // namespace avx2

#endif // IDEOSCALE_X86

// -------------------------------------------------------------- dispatch --

namespace {

struct Vtable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
    double (*centered_dot)(const double*, double, const double*, double, std::size_t);
    double (*gather_sum)(const std::int32_t*, std::size_t, const double*);
    void (*scale)(double, double*, std::size_t);
    const char* name;
};

constexpr Vtable kScalar = {scalar::dot,   scalar::axpy,         scalar::sum,
                            scalar::sumsq, scalar::centered_dot, scalar::gather_sum,
                            scalar::scale, "scalar"};

#if IDEOSCALE_X86
constexpr Vtable kAvx2 = {avx2::dot,   avx2::axpy,         avx2::sum,  avx2::sumsq,
                          avx2::centered_dot, avx2::gather_sum, avx2::scale, "avx2"};
#endif

const Vtable* pick_default() {
    if (const char* env = std::getenv("IDEOSCALE_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &kScalar;
    }
#if IDEOSCALE_X86
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
    return &kScalar;
}

const Vtable* g_active = nullptr;

const Vtable* active() {
    if (!g_active) g_active = pick_default();
    return g_active;
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) { return active()->dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { active()->axpy(alpha, x, y, n); }
double sum(const double* x, std::size_t n) { return active()->sum(x, n); }
double sumsq(const double* x, std::size_t n) { return active()->sumsq(x, n); }
double centered_dot(const double* a, double ca, const double* b, double cb, std::size_t n) {
    return active()->centered_dot(a, ca, b, cb, n);
}
double gather_sum(const std::int32_t* idx, std::size_t n, const double* v) {
    return active()->gather_sum(idx, n, v);
}
void scale(double alpha, double* x, std::size_t n) { active()->scale(alpha, x, n); }

const char* active_backend() { return active()->name; }

bool avx2_supported() {
#if IDEOSCALE_X86
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void force_backend(Backend b) {
    switch (b) {
    case Backend::automatic:
        g_active = nullptr;
        (void)active();
        return;
    case Backend::scalar:
        g_active = &kScalar;
        return;
    case Backend::avx2:
#if IDEOSCALE_X86
        if (avx2_supported()) {
            g_active = &kAvx2;
            return;
        }
#endif
        throw std::runtime_error("kernels: avx2 backend not supported on this CPU");
    }
}

} // namespace ideoscale::kernels
