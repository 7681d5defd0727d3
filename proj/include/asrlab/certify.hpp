#pragma once

#include <cstdint>

#include "asrlab/smoothing.hpp"

namespace asrlab {

// Inverse standard-normal CDF, |phi(result) - p| <= 1e-9. Rational
// initial guess (Acklam) polished by Newton steps on the erf-based CDF.
double gaussian_quantile(double p);

// Certified L2 radius R = sigma * phi^-1(p); 0 with abstention for
// p <= 0.5.
double radius(double sigma, double p);

// One-sided exact (Clopper-Pearson) lower confidence bound on a binomial
// proportion at level 1 - alpha.
double clopper_pearson_lower(int successes, int n, double alpha);

struct CertConfig {
  double sigma = 0.02;
  double k = 0.3;              // WER threshold
  int n0 = 32;                 // selection samples (ROVER pass)
  int n = 1000;                // estimation samples
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct CertResult {
  Transcript top_transcript;
  double p_lower = 0.0;
  double radius_R = 0.0;
  bool abstained = true;
};

// 1 iff WER(greedy decode of the base recognizer on x_noisy, t_ref) < k.
int binary_indicator(const ModelParams& params, const Waveform& x_noisy,
                     const Transcript& t_ref, double k);

// CERTIFY with a ROVER-selected top transcription: n0-draw smoothed pass
// picks t_A, n fresh draws estimate P[WER < k], Clopper-Pearson lower
// bounds it; abstain unless the bound clears 0.5.
CertResult certify(const ModelParams& params, const Waveform& x, const CertConfig& cfg);

struct ValidationReport {
  int trials = 0;
  int passed = 0;             // perturbations whose estimate stayed above 0.5
  double pass_fraction = 0.0;
};

// Monte Carlo soundness probe: perturbations sampled uniformly in the
// certified L2 ball (radius_scale inflates it for negative controls); each
// is tested with draws-of-50 indicator estimates.
ValidationReport validate_certificate(const ModelParams& params, const Waveform& x,
                                      const CertResult& cert, const CertConfig& cfg,
                                      int trials, double radius_scale = 1.0,
                                      int draws_per_trial = 50);

}  // namespace asrlab
