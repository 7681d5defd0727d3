#include "asrlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace asrlab {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed),
                   static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(stream_id),
                   static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(ss);
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  // 53-bit mantissa, shifted into (0, 1] so log() below is always finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double s : v) acc += s * s;
  return std::sqrt(acc);
}

double linf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double s : v) m = std::max(m, std::abs(s));
  return m;
}

double snr_db(const Waveform& x, const Perturbation& delta) {
  const double nx = l2_norm(x.samples);
  const double nd = l2_norm(delta.delta);
  if (nx == 0.0) throw std::domain_error("snr_db: zero-norm signal");
  if (nd == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(nx / nd);
}

double linf_bound_from_snr(const Waveform& x, double snr_db_bound) {
  if (x.samples.empty()) throw std::domain_error("linf_bound_from_snr: empty waveform");
  return l2_norm(x.samples) / std::pow(10.0, snr_db_bound / 20.0);
}

Waveform add_gaussian_noise(const Waveform& x, double sigma, RngStream& rng) {
  if (sigma < 0.0) throw std::domain_error("add_gaussian_noise: negative sigma");
  Waveform out = x;
  if (sigma == 0.0) return out;
  for (double& s : out.samples) s += sigma * rng.gaussian();
  return out;
}

Perturbation project_linf(const Perturbation& delta, double epsilon) {
  Perturbation out = delta;
  for (double& d : out.delta) d = std::clamp(d, -epsilon, epsilon);
  return out;
}

Perturbation project_l2(const Perturbation& delta, double epsilon) {
  Perturbation out = delta;
  const double n = l2_norm(out.delta);
  if (n > epsilon && n > 0.0) {
    const double scale = epsilon / n;
    for (double& d : out.delta) d *= scale;
  }
  return out;
}

}  // namespace asrlab
