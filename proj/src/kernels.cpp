#include "screener/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace screener::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace scalar

namespace {

constexpr KernelTable kScalarTable{Isa::kScalar, scalar::dot, scalar::axpy,
                                   scalar::squared_distance, scalar::scale};
constexpr KernelTable kAvx2Table{Isa::kAvx2, avx2::dot, avx2::axpy, avx2::squared_distance,
                                 avx2::scale};

const KernelTable* select_default() {
  const char* env = std::getenv("SCREENER_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &kScalarTable;
  if (choice == "avx2") {
    if (!cpu_supports(Isa::kAvx2)) throw std::runtime_error("SCREENER_SIMD=avx2 but CPU lacks AVX2/FMA");
    return &kAvx2Table;
  }
  return cpu_supports(Isa::kAvx2) ? &kAvx2Table : &kScalarTable;
}

const KernelTable*& current() {
  static const KernelTable* table = select_default();
  return table;
}

}  // namespace

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  return isa == Isa::kAvx2 ? kAvx2Table : kScalarTable;
}

const KernelTable& active() { return *current(); }

void set_active(Isa isa) {
  if (!cpu_supports(isa)) throw std::invalid_argument("ISA not supported by this CPU");
  current() = &table_for(isa);
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace screener::kernels
