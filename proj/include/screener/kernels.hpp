#pragma once

// Dense vector kernels used by every inner loop in the library (classifier
// scoring and gradients, k-means distances, PV-DBOW updates, subspace
// projections). Each kernel has a scalar reference implementation and an
// AVX2+FMA variant; the active table is chosen once at startup from CPUID and
// can be pinned with the SCREENER_SIMD environment variable
// ("scalar", "avx2", or "auto").

#include <cstdint>
#include <span>
#include <string_view>

namespace screener::kernels {

enum class Isa { kScalar, kAvx2 };

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using SquaredDistanceFn = double (*)(const double*, const double*, std::size_t);
using ScaleFn = void (*)(double, double*, std::size_t);

struct KernelTable {
  Isa isa;
  DotFn dot;
  AxpyFn axpy;
  SquaredDistanceFn squared_distance;
  ScaleFn scale;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2

bool cpu_supports(Isa isa);
const KernelTable& table_for(Isa isa);

// Table in use for this process.
const KernelTable& active();

// Overrides the dispatch decision; throws std::invalid_argument when the CPU
// lacks the requested ISA. Not thread-safe with concurrent kernel calls.
void set_active(Isa isa);

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void scale(double alpha, std::span<double> x) {
  active().scale(alpha, x.data(), x.size());
}

inline double sparse_dot(std::span<const std::uint32_t> indices, std::span<const double> values,
                         std::span<const double> dense) {
  double s = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) s += values[i] * dense[indices[i]];
  return s;
}

}  // namespace screener::kernels
