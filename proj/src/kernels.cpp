#include "funclbm/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace funclbm::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
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

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void scale_shift(double* x, std::size_t n, double shift, double scale) {
  for (std::size_t i = 0; i < n; ++i) x[i] = (x[i] + shift) * scale;
}

void rank1_update(double* s, const double* x, std::size_t m) {
  for (std::size_t r = 0; r < m; ++r) {
    const double xr = x[r];
    double* row = s + r * m;
    for (std::size_t c = r; c < m; ++c) row[c] += xr * x[c];
  }
}

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
// Implemented in kernels_avx2.cpp (compiled with -mavx2 -mfma).
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void scale_shift(double* x, std::size_t n, double shift, double scale);
void rank1_update(double* s, const double* x, std::size_t m);
}  // namespace avx2
#endif

namespace {

struct Dispatch {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*scale_shift)(double*, std::size_t, double, double);
  void (*rank1_update)(double*, const double*, std::size_t);
};

constexpr Dispatch kScalar{Backend::scalar,      scalar::dot,
                           scalar::sum,          scalar::sumsq,
                           scalar::squared_distance, scalar::scale_shift,
                           scalar::rank1_update};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Dispatch kAvx2{Backend::avx2,        avx2::dot,
                         avx2::sum,            avx2::sumsq,
                         avx2::squared_distance, avx2::scale_shift,
                         avx2::rank1_update};
#endif

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Dispatch* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalar;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (avx2_supported()) return &kAvx2;
#endif
      throw std::invalid_argument("kernels: avx2 backend not supported on this CPU");
  }
  throw std::invalid_argument("kernels: unknown backend");
}

const Dispatch* default_table() {
  if (const char* env = std::getenv("FUNCLBM_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return &kScalar;
    if (v == "avx2") return table_for(Backend::avx2);
  }
  return avx2_supported() ? table_for(Backend::avx2) : &kScalar;
}

const Dispatch*& active_table() {
  static const Dispatch* table = default_table();
  return table;
}

}  // namespace

Backend active_backend() { return active_table()->backend; }

void force_backend(Backend b) { active_table() = table_for(b); }

std::string backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

double dot(const double* a, const double* b, std::size_t n) {
  return active_table()->dot(a, b, n);
}

double sum(const double* x, std::size_t n) { return active_table()->sum(x, n); }

double sumsq(const double* x, std::size_t n) {
  return active_table()->sumsq(x, n);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  return active_table()->squared_distance(a, b, n);
}

void scale_shift(double* x, std::size_t n, double shift, double scale) {
  active_table()->scale_shift(x, n, shift, scale);
}

void rank1_update(double* s, const double* x, std::size_t m) {
  active_table()->rank1_update(s, x, m);
}

}  // namespace funclbm::kernels
