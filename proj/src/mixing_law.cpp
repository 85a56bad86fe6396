#include "qvlab/mixing_law.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qvlab/quadrature.hpp"
#include "qvlab/summation.hpp"

namespace qv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sinc(double u) {
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    return 1.0 - u2 / 6.0 * (1.0 - u2 / 20.0);
  }
  return std::sin(u) / u;
}

void check_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("mixing law scale must be positive and finite");
}

}  // namespace

const char* MixingLaw::name() const {
  switch (kind) {
    case LawKind::gaussian: return "gaussian";
    case LawKind::cauchy: return "cauchy";
    case LawKind::triangular: return "triangular";
    case LawKind::uniform: return "uniform";
    case LawKind::two_point: return "two-point";
  }
  return "unknown";
}

bool MixingLaw::has_density() const { return kind != LawKind::two_point; }

double MixingLaw::density(double x) const {
  double u = x / scale;
  switch (kind) {
    case LawKind::gaussian:
      return std::exp(-0.5 * u * u) / (scale * std::sqrt(2.0 * kPi));
    case LawKind::cauchy:
      return 1.0 / (kPi * scale * (1.0 + u * u));
    case LawKind::triangular: {
      double v = 1.0 - std::abs(u);
      return v > 0.0 ? v / scale : 0.0;
    }
    case LawKind::uniform:
      return std::abs(u) <= 1.0 ? 0.5 / scale : 0.0;
    case LawKind::two_point:
      throw std::domain_error("two-point law has no density");
  }
  return 0.0;
}

double MixingLaw::charfn(double t) const {
  double u = scale * t;
  switch (kind) {
    case LawKind::gaussian: return std::exp(-0.5 * u * u);
    case LawKind::cauchy: return std::exp(-std::abs(u));
    case LawKind::triangular: {
      double c = sinc(0.5 * u);
      return c * c;
    }
    case LawKind::uniform: return sinc(u);
    case LawKind::two_point: return std::cos(u);
  }
  return 0.0;
}

bool MixingLaw::integrable_charfn() const {
  return kind != LawKind::uniform && kind != LawKind::two_point;
}

std::optional<double> MixingLaw::charfn_abs_integral() const {
  switch (kind) {
    case LawKind::gaussian: return std::sqrt(kPi / 2.0) / scale;
    case LawKind::cauchy: return 1.0 / scale;
    case LawKind::triangular: return kPi / scale;
    default: return std::nullopt;
  }
}

double MixingLaw::support_radius() const {
  switch (kind) {
    case LawKind::triangular:
    case LawKind::uniform:
    case LawKind::two_point:
      return scale;
    default:
      return kInf;
  }
}

double MixingLaw::charfn_cutoff(double eps) const {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("charfn_cutoff: eps must lie in (0, 1)");
  switch (kind) {
    case LawKind::gaussian: return std::sqrt(2.0 * std::log(1.0 / eps)) / scale;
    case LawKind::cauchy: return std::log(1.0 / eps) / scale;
    case LawKind::triangular: return 2.0 / (scale * std::sqrt(eps));
    case LawKind::uniform: return 1.0 / (scale * eps);
    case LawKind::two_point:
      throw std::domain_error("two-point characteristic function does not decay");
  }
  return kInf;
}

double MixingLaw::density_tail_mass(double a) const {
  if (!(a >= 0.0)) throw std::invalid_argument("density_tail_mass: a must be >= 0");
  double u = a / scale;
  switch (kind) {
    case LawKind::gaussian: return boost::math::erfc(u / std::sqrt(2.0));
    case LawKind::cauchy: return 1.0 - 2.0 / kPi * std::atan(u);
    case LawKind::triangular: {
      double v = 1.0 - u;
      return v > 0.0 ? v * v : 0.0;
    }
    case LawKind::uniform: {
      double v = 1.0 - u;
      return v > 0.0 ? v : 0.0;
    }
    case LawKind::two_point:
      return u < 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

MixingLaw make_law(LawKind kind, double scale) {
  check_scale(scale);
  return MixingLaw{kind, scale};
}

MixingLaw law_from_name(const std::string& name, double scale) {
  if (name == "gaussian") return make_law(LawKind::gaussian, scale);
  if (name == "cauchy") return make_law(LawKind::cauchy, scale);
  if (name == "triangular") return make_law(LawKind::triangular, scale);
  if (name == "uniform") return make_law(LawKind::uniform, scale);
  if (name == "two-point") return make_law(LawKind::two_point, scale);
  throw std::invalid_argument("unknown mixing law name: '" + name +
                              "' (expected gaussian, cauchy, triangular, uniform, or two-point)");
}

namespace {

// Upper bounds and estimates for int_X^inf |phi|.  The estimate is used to
// complete the reported value, the error term bounds how far the estimate can
// be off.  Oscillating laws use the running mean of the oscillation plus an
// integration by parts remainder.
struct AbsTail {
  double estimate = kInf;
  double error = kInf;
};

AbsTail abs_tail(const MixingLaw& law, double X) {
  double s = law.scale;
  double U = s * X;
  switch (law.kind) {
    case LawKind::gaussian: {
      double est = law.charfn(X) / (s * U);
      return {est, est};
    }
    case LawKind::cauchy: {
      double est = law.charfn(X) / s;
      return {est, 0.0};
    }
    case LawKind::triangular:
      return {2.0 / (s * U), 4.0 / (s * U * U)};
    default:
      return {kInf, kInf};
  }
}

double window_mass(const MixingLaw& law, double a, double b, double tol) {
  PanelOptions opt;
  opt.rel_tol = 1e-7;
  opt.abs_tol = 1e-3 * tol;
  opt.max_panel_width = 0.5 * kPi / law.scale;
  opt.max_evaluations = 2'000'000;
  if (law.kind == LawKind::uniform) {
    // |sin| has kinks at multiples of pi/scale
    double period = kPi / law.scale;
    if ((b - a) / period < 2e5) {
      for (double x = std::ceil(a / period) * period; x < b; x += period)
        if (x > a) opt.split_points.push_back(x);
    }
  }
  auto f = [&law](double t) { return std::abs(law.charfn(t)); };
  return integrate_gk(f, a, b, opt).value;
}

}  // namespace

IntegrabilityReport verify_integrability(const MixingLaw& law, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("verify_integrability: tol must be > 0");
  IntegrabilityReport rep;
  double prev = window_mass(law, 0.0, 1.0, tol);
  double total = prev;
  int consecutive = 0;
  constexpr int kMaxWindows = 24;
  constexpr int kFailStreak = 8;
  for (int k = 0; k < kMaxWindows; ++k) {
    double lo = std::ldexp(1.0, k);
    double hi = 2.0 * lo;
    double w;
    try {
      w = window_mass(law, lo, hi, tol);
    } catch (const QuadratureError&) {
      rep.status = IntegrabilityReport::Status::undetermined;
      rep.value = total;
      std::ostringstream os;
      os << "window quadrature budget exhausted on [" << lo << ", " << hi
         << "] before a verdict was reached";
      rep.evidence = os.str();
      return rep;
    }
    total += w;
    // a window counts toward divergence only when it carries mass and did not
    // shrink: doubling the window of an integrable envelope t^(-p), p > 1,
    // scales its mass by 2^(1-p) < 1, while a borderline 1/t envelope keeps it
    // constant
    consecutive = (w >= tol && w >= 0.75 * prev) ? consecutive + 1 : 0;
    prev = w;
    if (consecutive >= kFailStreak) {
      rep.status = IntegrabilityReport::Status::fails;
      rep.value = total;
      std::ostringstream os;
      os << "window mass stayed >= " << tol << " for " << kFailStreak
         << " consecutive dyadic windows ending at [" << lo << ", " << hi
         << "] (last mass " << w << "); value is the partial mass up to t=" << hi;
      rep.evidence = os.str();
      return rep;
    }
    AbsTail tail = abs_tail(law, hi);
    if (tail.error < tol) {
      rep.status = IntegrabilityReport::Status::holds;
      rep.value = total + tail.estimate;
      std::ostringstream os;
      os << "window mass decayed below " << tol << " and the analytic tail beyond t="
         << hi << " contributes " << tail.estimate << " with error bound " << tail.error;
      rep.evidence = os.str();
      return rep;
    }
  }
  rep.status = IntegrabilityReport::Status::undetermined;
  rep.value = total;
  rep.evidence = "window budget exhausted before divergence or a convergent tail was established";
  return rep;
}

namespace detail {

std::string nonintegrable_message(const MixingLaw& law) {
  std::ostringstream os;
  os << "mixing law '" << law.name()
     << "': characteristic function is not absolutely integrable; "
        "the periodogram estimator and its limit constants are undefined for this law";
  return os.str();
}

namespace {

// int_U^inf base(u) du for the squared base characteristic function, split
// into the oscillation mean and an integration by parts error bound.
AbsTail sq_tail_base(LawKind kind, double U) {
  switch (kind) {
    case LawKind::triangular:
      // (sin(u/2)/(u/2))^4 = 16 (3/8 - cos(u)/2 + cos(2u)/8) / u^4
      return {2.0 / (U * U * U), 24.0 / (U * U * U * U)};
    case LawKind::uniform:
      // sin(u)^2/u^2 = (1/2 - cos(2u)/2) / u^2
      return {0.5 / U, 1.0 / (U * U)};
    default:
      return {kInf, kInf};
  }
}

}  // namespace

double charfn_abs_tail_bound(const MixingLaw& law, double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument("charfn_abs_tail_bound: x must be finite and > 0");
  AbsTail tail = abs_tail(law, x);
  return tail.estimate + tail.error;
}

double tail_sq_integral_unchecked(const MixingLaw& law, double a, double T) {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw std::invalid_argument("tail_sq_integral: a must be finite and >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("tail_sq_integral: T must be > 0");
  if (law.kind == LawKind::two_point)
    throw std::domain_error(
        "two-point law: the squared characteristic function is not integrable");
  double s = law.scale;
  double b = s * T;
  switch (law.kind) {
    case LawKind::gaussian:
      return std::sqrt(kPi) * boost::math::erfc(b * a) / (2.0 * b);
    case LawKind::cauchy:
      return std::exp(-2.0 * b * a) / (2.0 * b);
    default:
      break;
  }
  // remaining laws: integrate base(u) = phi_1(u)^2 over [b*a, inf) in scaled
  // units, then divide by b
  auto base_sq = [&law](double u) {
    MixingLaw unit{law.kind, 1.0};
    double c = unit.charfn(u);
    return c * c;
  };
  constexpr double rel_tol = 1e-10;
  double U0 = b * a;
  double U = std::max(U0 + 16.0, 32.0);
  PanelOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 0.0;
  opt.max_panel_width = 0.5 * kPi;
  NeumaierSum acc;
  acc.add(integrate_gk(base_sq, U0, U, opt).value);
  for (int iter = 0; iter < 40; ++iter) {
    AbsTail tail = sq_tail_base(law.kind, U);
    double est = acc.value() + tail.estimate;
    if (tail.error <= rel_tol * std::max(est, 1e-300)) return est / b;
    acc.add(integrate_gk(base_sq, U, 2.0 * U, opt).value);
    U *= 2.0;
  }
  throw std::runtime_error("tail_sq_integral: tail refinement did not converge");
}

}  // namespace detail

double tail_sq_integral(const MixingLaw& law, double a, double T) {
  if (!law.integrable_charfn()) throw std::domain_error(detail::nonintegrable_message(law));
  return detail::tail_sq_integral_unchecked(law, a, T);
}

}  // namespace qv
