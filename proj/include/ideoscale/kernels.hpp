#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the solver and the statistics code.
// Every kernel exists as a scalar reference implementation and, on x86-64
// with AVX2/FMA, as a vectorized variant. The active variant is picked once
// at runtime; set IDEOSCALE_KERNELS=scalar (or call force_backend) to pin
// the reference path. The two variants may differ by summation order only.
namespace ideoscale::kernels {

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// sum_i x[i]
double sum(const double* x, std::size_t n);

// sum_i x[i]^2
double sumsq(const double* x, std::size_t n);

// sum_i (a[i]-ca)*(b[i]-cb)
double centered_dot(const double* a, double ca, const double* b, double cb, std::size_t n);

// sum_i v[idx[i]]  -- the gather at the heart of the sparse matvec
double gather_sum(const std::int32_t* idx, std::size_t n, const double* v);

// x[i] *= alpha
void scale(double alpha, double* x, std::size_t n);

enum class Backend { automatic, scalar, avx2 };

// Returns the name of the variant currently in use ("scalar" or "avx2").
const char* active_backend();

// Overrides dispatch; throws if the requested backend is unsupported here.
void force_backend(Backend b);

bool avx2_supported();

} // namespace ideoscale::kernels
