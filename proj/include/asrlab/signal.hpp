#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace asrlab {

// Mono audio at a fixed 16 kHz rate. Samples are kept as doubles end to
// end; quantization happens only at the WAV boundary.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
};

// Additive perturbation, same length as the waveform it belongs to.
struct Perturbation {
  std::vector<double> delta;

  std::size_t size() const { return delta.size(); }
};

// Deterministic random stream. Identical (seed, stream_id) pairs reproduce
// identical draws on every platform: the engine is a seed_seq-initialized
// mt19937_64 and gaussians come from plain Box-Muller, both fully specified
// by the standard.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform();   // (0, 1]
  double gaussian();  // N(0, 1)
  std::uint64_t next_u64();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double l2_norm(const std::vector<double>& v);
double linf_norm(const std::vector<double>& v);

// SNR in dB: 20*log10(||x||2 / ||delta||2). Zero-norm delta yields +inf
// (infinitely quiet perturbation); zero-norm x is a domain error.
double snr_db(const Waveform& x, const Perturbation& delta);

// Per-utterance L-inf budget derived from an SNR bound:
// eps = ||x||2 / 10^(snr/20).
double linf_bound_from_snr(const Waveform& x, double snr_db_bound);

// x + N(0, sigma^2 I), drawn from the given stream.
Waveform add_gaussian_noise(const Waveform& x, double sigma, RngStream& rng);

// Elementwise clamp of delta to [-eps, eps]. Idempotent.
Perturbation project_linf(const Perturbation& delta, double epsilon);

// Scale delta onto the L2 ball of radius eps (no-op if already inside).
Perturbation project_l2(const Perturbation& delta, double epsilon);

}  // namespace asrlab
