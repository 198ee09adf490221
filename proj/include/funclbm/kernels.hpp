#pragma once

// Low-level arithmetic kernels used by the hot loops (periodogram bins,
// subspace projections, covariance accumulation, distance computations).
// Each kernel has a scalar reference implementation and an AVX2+FMA variant;
// the active backend is chosen once at runtime from CPU capabilities and can
// be overridden with force_backend() or the FUNCLBM_KERNELS environment
// variable ("scalar" or "avx2").
//
// Variants are equivalence-tested against the scalar reference. Results may
// differ across backends by summation-order rounding only; a process always
// uses a single backend, so seeded runs stay bit-reproducible.

#include <cstddef>
#include <string>

namespace funclbm::kernels {

enum class Backend { scalar, avx2 };

// Backend active for subsequent kernel calls.
Backend active_backend();

// Force a backend (throws std::invalid_argument if unsupported on this CPU).
void force_backend(Backend b);

std::string backend_name(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i x[i]
double sum(const double* x, std::size_t n);

// sum_i x[i]^2
double sumsq(const double* x, std::size_t n);

// sum_i (a[i]-b[i])^2
double squared_distance(const double* a, const double* b, std::size_t n);

// x[i] <- (x[i] + shift) * scale
void scale_shift(double* x, std::size_t n, double shift, double scale);

// Rank-1 update of the upper triangle (row-major m x m): S[r][c] += x[r]*x[c]
// for c >= r. Lower triangle is left untouched.
void rank1_update(double* s, const double* x, std::size_t m);

}  // namespace funclbm::kernels
