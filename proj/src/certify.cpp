#include "asrlab/certify.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "asrlab/voting.hpp"

namespace asrlab {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Acklam's rational approximation, good to ~1e-9 before refinement.
double acklam_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  if (p > phigh) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Regularized incomplete beta by Lentz continued fraction.
double betacf(double a, double b, double x) {
  const int kMaxIter = 300;
  const double kEps = 3e-16, kFpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpmin) d = kFpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpmin) d = kFpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpmin) c = kFpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpmin) d = kFpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpmin) c = kFpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gaussian_quantile: p outside (0,1)");
  double x = acklam_quantile(p);
  for (int i = 0; i < 3; ++i) {
    const double err = std_normal_cdf(x) - p;
    const double pdf = std_normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= err / pdf;
  }
  return x;
}

double radius(double sigma, double p) {
  if (sigma < 0.0) throw std::domain_error("radius: negative sigma");
  if (p <= 0.5) return 0.0;  // abstention territory
  if (p >= 1.0) throw std::domain_error("radius: p must be below 1");
  return sigma * gaussian_quantile(p);
}

double clopper_pearson_lower(int successes, int n, double alpha) {
  if (n <= 0 || successes < 0 || successes > n)
    throw std::domain_error("clopper_pearson_lower: bad counts");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("clopper_pearson_lower: alpha outside (0,1)");
  if (successes == 0) return 0.0;
  // Lower bound solves P[Bin(n,p) >= s] = alpha, i.e. I_p(s, n-s+1) = alpha.
  const double a = successes, b = n - successes + 1;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (betai(a, b, mid) < alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

int binary_indicator(const ModelParams& params, const Waveform& x_noisy,
                     const Transcript& t_ref, double k) {
  const DecodeResult d = greedy_decode(forward(params, x_noisy), params.vocab);
  return wer(d.transcript, t_ref) < k ? 1 : 0;
}

CertResult certify(const ModelParams& params, const Waveform& x, const CertConfig& cfg) {
  CertResult res;

  SmoothingConfig sel;
  sel.sigma = cfg.sigma;
  sel.n_samples = std::min(cfg.n0, 50);
  sel.vote = VoteStrategy::kRover;
  sel.seed = cfg.seed;
  res.top_transcript = smoothed_transcribe(params, x, sel).transcript;
  if (res.top_transcript.words.empty()) return res;  // nothing to certify

  int successes = 0;
  for (int i = 0; i < cfg.n; ++i) {
    RngStream rng(cfg.seed, 1000000 + static_cast<std::uint64_t>(i));
    const Waveform noisy = add_gaussian_noise(x, cfg.sigma, rng);
    successes += binary_indicator(params, noisy, res.top_transcript, cfg.k);
  }
  res.p_lower = clopper_pearson_lower(successes, cfg.n, cfg.alpha);
  res.abstained = res.p_lower <= 0.5;
  res.radius_R = res.abstained ? 0.0 : radius(cfg.sigma, res.p_lower);
  return res;
}

ValidationReport validate_certificate(const ModelParams& params, const Waveform& x,
                                      const CertResult& cert, const CertConfig& cfg,
                                      int trials, double radius_scale,
                                      int draws_per_trial) {
  if (cert.abstained)
    throw std::domain_error("validate_certificate: certificate abstained");
  ValidationReport rep;
  rep.trials = trials;
  const std::size_t d = x.size();
  // Salt streams with the scale so runs at different radii draw independently.
  const std::uint64_t salt = std::bit_cast<std::uint64_t>(radius_scale);
  for (int t = 0; t < trials; ++t) {
    RngStream rng(cfg.seed ^ salt, 2000000 + static_cast<std::uint64_t>(t));
    std::vector<double> dir(d);
    for (double& v : dir) v = rng.gaussian();
    const double norm = l2_norm(dir);
    // uniform in the ball: radius ~ R * u^(1/d)
    const double r =
        cert.radius_R * radius_scale * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    Waveform perturbed = x;
    for (std::size_t i = 0; i < d; ++i) perturbed.samples[i] += dir[i] * (r / norm);

    int hits = 0;
    for (int j = 0; j < draws_per_trial; ++j) {
      RngStream nrng(cfg.seed ^ salt, 3000000 + static_cast<std::uint64_t>(t) * 1000 + j);
      const Waveform noisy = add_gaussian_noise(perturbed, cfg.sigma, nrng);
      hits += binary_indicator(params, noisy, cert.top_transcript, cfg.k);
    }
    if (hits * 2 > draws_per_trial) ++rep.passed;
  }
  rep.pass_fraction = trials > 0 ? static_cast<double>(rep.passed) / trials : 0.0;
  return rep;
}

}  // namespace asrlab
