#pragma once

#include "qvlab/grid.hpp"
#include "qvlab/mixing_law.hpp"

namespace qv {

// Asymptotic regime of sqrt-or-slower renormalization, driven by H alone.
enum class Regime { supercritical, critical, subcritical, pure_bm };

const char* regime_name(Regime r);
Regime classify_regime(const HurstParam& h);

enum class LimitKind { gaussian, degenerate };

enum class EvalMode { automatic, closed_form, quadrature };

// sigma_T^2 = 2T int_0^inf phi(x)^2 dx, the variance scale of the central
// limit theorems. Linear in T and independent of H.
double sigma_sq(const MixingLaw& law, double T, EvalMode mode = EvalMode::automatic);

// mu = 2 alpha_H T int_0^inf phi(x) x^{2H-2} dx, the bias constant of the
// critical and subcritical regimes. Zero at h = 1/2 because alpha_H = 0.
double mu_bias(const MixingLaw& law, const HurstParam& h, double T,
               EvalMode mode = EvalMode::automatic);

// Berry-Esseen error bound max(L^{3/2-2H}, int_L^inf phi(Tz)^2 dz),
// defined for h in (3/4, 1) only.
double rho_bound(const MixingLaw& law, const HurstParam& h, double T, double L);

// Decomposition of the variance of the second-chaos part of the estimator at
// finite L: a1 from the Brownian component alone, a2 from the Brownian and
// fractional components crossing, a3 from the fractional component alone.
// L*(a1 + a2 + a3) -> sigma_T^2 as L grows.
struct ChaosVarianceTerms {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double L = 0.0;
  double quadrature_tol = 0.0;
};

ChaosVarianceTerms chaos_variance_terms(const MixingLaw& law, const HurstParam& h,
                                        double T, double L, double tol = 1e-5);

// How to renormalize Ehat - T: multiply by L^gamma, optionally subtract the
// mu_bias drift first, and what the limit is.
struct Normalization {
  double gamma = 0.5;
  bool center_at_mu = false;
  LimitKind limit = LimitKind::gaussian;
  Regime regime = Regime::pure_bm;
};

Normalization normalization(const HurstParam& h);

struct LimitConstants {
  double sigma_sq = 0.0;
  double mu = 0.0;
  double alpha_h = 0.0;
  Regime regime = Regime::pure_bm;
};

LimitConstants limit_constants(const MixingLaw& law, const HurstParam& h, double T);

}  // namespace qv
