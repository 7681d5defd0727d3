#include <doctest.h>

#include <cmath>

#include "asrlab/certify.hpp"
#include "asrlab/corpus.hpp"
#include "asrlab/voting.hpp"

using namespace asrlab;

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Quantile by pure bisection on the CDF, no shared code with the
// implementation.
double oracle_quantile(double p) {
  double lo = -12.0, hi = 12.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double binom_cdf(int k, int n, double p) {
  // P[X <= k] via direct summation in log space
  double total = 0.0;
  double log_coef = 0.0;  // log C(n, i), updated incrementally
  for (int i = 0; i <= k; ++i) {
    if (i > 0) log_coef += std::log(static_cast<double>(n - i + 1)) - std::log(static_cast<double>(i));
    total += std::exp(log_coef + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return std::min(1.0, total);
}

// Clopper-Pearson lower bound by bisection on the binomial upper tail.
double oracle_cp_lower(int s, int n, double alpha) {
  if (s == 0) return 0.0;
  // find p with P[X >= s] = alpha, i.e. 1 - cdf(s-1) = alpha
  double lo = 1e-12, hi = 1.0 - 1e-12;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((1.0 - binom_cdf(s - 1, n, mid)) < alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gaussian quantile matches a bisection oracle") {
  const double probes[] = {1e-6, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.4,  0.5,     0.6,
                           0.75, 0.9,  0.95, 0.99, 0.999, 0.9999, 1 - 1e-6, 0.3, 0.7,
                           0.51, 0.49};
  for (double p : probes)
    CHECK(gaussian_quantile(p) == doctest::Approx(oracle_quantile(p)).scale(1).epsilon(1e-9));
}

TEST_CASE("gaussian quantile landmarks and symmetry") {
  CHECK(gaussian_quantile(0.5) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(gaussian_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(gaussian_quantile(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-8));
  for (double p : {0.6, 0.9, 0.999})
    CHECK(gaussian_quantile(p) == doctest::Approx(-gaussian_quantile(1 - p)).epsilon(1e-9));
  CHECK_THROWS_AS(gaussian_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(gaussian_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(gaussian_quantile(-0.2), std::domain_error);
}

TEST_CASE("radius examples") {
  CHECK(radius(0.02, 0.9) == doctest::Approx(0.02 * 1.2815515655446004).epsilon(1e-9));
  CHECK(radius(0.02, 0.9) == doctest::Approx(0.025631).epsilon(1e-4));
  CHECK(radius(0.01, 0.99) == doctest::Approx(0.01 * 2.3263478740408408).epsilon(1e-9));
  CHECK(radius(0.02, 0.5) == 0.0);
  CHECK(radius(0.02, 0.2) == 0.0);
  // radius grows with sigma and with p
  CHECK(radius(0.04, 0.9) == doctest::Approx(2 * radius(0.02, 0.9)).epsilon(1e-12));
  CHECK(radius(0.02, 0.95) > radius(0.02, 0.9));
}

TEST_CASE("clopper-pearson matches the binomial bisection oracle") {
  const int cases[][2] = {{1, 10},  {5, 10},   {9, 10},   {10, 10}, {50, 100},
                          {95, 100}, {99, 100}, {100, 100}, {1, 200}, {150, 200},
                          {199, 200}, {192, 200}};
  for (const auto& c : cases) {
    const double got = clopper_pearson_lower(c[0], c[1], 0.05);
    const double want = oracle_cp_lower(c[0], c[1], 0.05);
    CHECK(got == doctest::Approx(want).scale(1).epsilon(1e-8));
  }
}

TEST_CASE("clopper-pearson closed forms and edge cases") {
  CHECK(clopper_pearson_lower(0, 100, 0.05) == 0.0);
  // all successes: lower bound = alpha^(1/n)
  CHECK(clopper_pearson_lower(100, 100, 0.05) ==
        doctest::Approx(std::pow(0.05, 1.0 / 100)).epsilon(1e-10));
  CHECK(clopper_pearson_lower(100, 100, 0.05) == doctest::Approx(0.97047).epsilon(1e-4));
  // bound is below the point estimate and monotone in s
  CHECK(clopper_pearson_lower(80, 100, 0.05) < 0.8);
  CHECK(clopper_pearson_lower(90, 100, 0.05) > clopper_pearson_lower(80, 100, 0.05));
  // more samples at the same rate tighten the bound
  CHECK(clopper_pearson_lower(900, 1000, 0.05) > clopper_pearson_lower(90, 100, 0.05));
  CHECK_THROWS_AS(clopper_pearson_lower(-1, 10, 0.05), std::domain_error);
  CHECK_THROWS_AS(clopper_pearson_lower(11, 10, 0.05), std::domain_error);
}

TEST_CASE("binary indicator thresholds at the WER cutoff") {
  const ModelParams p = ModelParams::init(8, 42);
  RngStream rng(314, 0);
  const Waveform x = synth_sentence(Transcript::parse("ba de"), 0.2, rng);
  const Transcript decoded = greedy_decode(forward(p, x), p.vocab).transcript;
  // against its own decode the WER is 0 < k for any positive k
  if (!decoded.words.empty()) CHECK(binary_indicator(p, x, decoded, 0.3) == 1);
  // against a disjoint reference the WER is 1
  CHECK(binary_indicator(p, x, Transcript::parse("go go go"), 0.3) == 0);
}

TEST_CASE("certify abstains when the indicator never fires") {
  // untrained model vs an unrelated reference-free setup: the ROVER top
  // transcription rarely clears WER < k under fresh noise, so p_lower
  // should be far from 1; with k tiny the cert must abstain.
  ModelParams p = ModelParams::init(8, 1);
  p.w3.setZero();
  p.b3.setZero();
  p.b3(0) = 5.0;  // blank everywhere -> empty transcript every draw
  RngStream rng(314, 0);
  const Waveform x = synth_sentence(Transcript::parse("ba"), 0.2, rng);
  CertConfig cfg;
  cfg.n0 = 4;
  cfg.n = 20;
  cfg.seed = 9;
  const auto cert = certify(p, x, cfg);
  CHECK(cert.abstained);
  CHECK(cert.radius_R == 0.0);
  CHECK_THROWS_AS(validate_certificate(p, x, cert, cfg, 2), std::domain_error);
}

TEST_CASE("certify is deterministic and p_lower is consistent with the radius") {
  const ModelParams p = ModelParams::init(8, 42);
  RngStream rng(314, 0);
  const Waveform x = synth_sentence(Transcript::parse("ba de"), 0.25, rng);
  CertConfig cfg;
  cfg.n0 = 8;
  cfg.n = 60;
  cfg.seed = 21;
  const auto a = certify(p, x, cfg);
  const auto b = certify(p, x, cfg);
  CHECK(a.abstained == b.abstained);
  CHECK(a.p_lower == b.p_lower);
  CHECK(a.radius_R == b.radius_R);
  if (!a.abstained) {
    CHECK(a.p_lower > 0.5);
    CHECK(a.radius_R == doctest::Approx(radius(cfg.sigma, a.p_lower)).epsilon(1e-12));
  }
}
