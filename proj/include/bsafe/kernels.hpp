#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops. Each kernel has a scalar reference version and,
// on x86-64, an AVX2 version; the active variant is chosen once at runtime
// from CPU features. Setting BSAFE_FORCE_SCALAR=1 pins the scalar path.
namespace bsafe::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
// Overrides the runtime choice (tests and benchmarks). Throws if unavailable.
void set_active_isa(Isa isa);

struct DrawStats {
  double sum = 0.0;
  std::size_t negatives = 0;  // entries strictly below zero
};

// Sums and counts the strictly negative entries of one draw vector.
DrawStats draw_stats(std::span<const double> draws);

// Number of entries strictly below zero.
std::size_t count_negative(std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);

// For s_i = (a*x1_i + b*x2_i) + c, sums the three per-point columns over the
// points with s_i > tol and counts the points with |s_i| <= tol.
struct HalfplaneSums {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  std::size_t on_line = 0;
};

HalfplaneSums halfplane_sums(std::span<const double> x1, std::span<const double> x2, double a, double b, double c,
                             double tol, std::span<const double> col0, std::span<const double> col1,
                             std::span<const double> col2);

namespace scalar {
DrawStats draw_stats(std::span<const double> draws);
std::size_t count_negative(std::span<const double> values);
double dot(std::span<const double> a, std::span<const double> b);
HalfplaneSums halfplane_sums(std::span<const double> x1, std::span<const double> x2, double a, double b, double c,
                             double tol, std::span<const double> col0, std::span<const double> col1,
                             std::span<const double> col2);
}  // namespace scalar

namespace avx2 {
DrawStats draw_stats(std::span<const double> draws);
std::size_t count_negative(std::span<const double> values);
double dot(std::span<const double> a, std::span<const double> b);
HalfplaneSums halfplane_sums(std::span<const double> x1, std::span<const double> x2, double a, double b, double c,
                             double tol, std::span<const double> col0, std::span<const double> col1,
                             std::span<const double> col2);
}  // namespace avx2

}  // namespace bsafe::kernels
