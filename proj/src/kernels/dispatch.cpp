#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bsafe/error.hpp"
#include "bsafe/kernels.hpp"

namespace bsafe::kernels {

namespace {

Isa detect() {
  const char* force = std::getenv("BSAFE_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0 && *force != '\0') return Isa::scalar;
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& active() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(BSAFE_BUILD_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(active().load(std::memory_order_relaxed)); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) throw UsageError(std::string("instruction set not available: ") + to_string(isa));
  active().store(static_cast<int>(isa), std::memory_order_relaxed);
}

#if defined(BSAFE_BUILD_AVX2)
#define BSAFE_DISPATCH(fn, ...) \
  return active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define BSAFE_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

DrawStats draw_stats(std::span<const double> draws) { BSAFE_DISPATCH(draw_stats, draws); }

std::size_t count_negative(std::span<const double> values) { BSAFE_DISPATCH(count_negative, values); }

double dot(std::span<const double> a, std::span<const double> b) { BSAFE_DISPATCH(dot, a, b); }

HalfplaneSums halfplane_sums(std::span<const double> x1, std::span<const double> x2, double a, double b, double c,
                             double tol, std::span<const double> col0, std::span<const double> col1,
                             std::span<const double> col2) {
  BSAFE_DISPATCH(halfplane_sums, x1, x2, a, b, c, tol, col0, col1, col2);
}

}  // namespace bsafe::kernels
