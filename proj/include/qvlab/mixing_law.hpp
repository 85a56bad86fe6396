#pragma once

#include <optional>
#include <string>

namespace qv {

enum class LawKind { gaussian, cauchy, triangular, uniform, two_point };

// Symmetric randomization law: density g and real characteristic function phi.
// scale s rescales xi -> s*xi, so density(x) = g(x/s)/s and charfn(t) = phi(s*t).
// The uniform law is the deliberate negative case: |phi| is not integrable.
// two_point is the degenerate test law xi = +-s with cos characteristic
// function; it has no density and the estimator handles it analytically.
struct MixingLaw {
  LawKind kind = LawKind::gaussian;
  double scale = 1.0;

  const char* name() const;
  bool has_density() const;
  double density(double x) const;
  double charfn(double t) const;
  bool integrable_charfn() const;

  // int_0^inf |phi(t)| dt when finite
  std::optional<double> charfn_abs_integral() const;

  // radius of the density support, +inf when unbounded
  double support_radius() const;

  // point beyond which |phi(t)| <= eps
  double charfn_cutoff(double eps) const;

  // P(|xi| > a)
  double density_tail_mass(double a) const;
};

MixingLaw make_law(LawKind kind, double scale = 1.0);
MixingLaw law_from_name(const std::string& name, double scale = 1.0);

struct IntegrabilityReport {
  enum class Status { holds, fails, undetermined };
  Status status = Status::undetermined;
  double value = 0.0;
  std::string evidence;
};

// Decides whether int_0^inf |phi| converges by integrating dyadic windows
// [2^k, 2^{k+1}]: eight consecutive windows that hold at least tol of mass
// without decaying geometrically count as divergence evidence; a window whose
// analytic tail error bound falls below tol settles convergence. Neither
// within budget -> undetermined, never a silent pass.
IntegrabilityReport verify_integrability(const MixingLaw& law, double tol = 1e-6);

// int_a^inf phi(T z)^2 dz. Refuses laws whose characteristic function is not
// absolutely integrable.
double tail_sq_integral(const MixingLaw& law, double a, double T);

namespace detail {
// Same integral without the integrability gate; the Monte Carlo negative
// control needs the (finite) phi^2 integral of the uniform law.
double tail_sq_integral_unchecked(const MixingLaw& law, double a, double T);

// Upper bound on int_x^inf |phi(t)| dt, +inf when the tail is uncontrolled.
double charfn_abs_tail_bound(const MixingLaw& law, double x);

// Diagnostic used by every operation that requires an integrable
// characteristic function.
std::string nonintegrable_message(const MixingLaw& law);
}  // namespace detail

}  // namespace qv
