#include "asrlab/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include "fft_util.hpp"

namespace asrlab {

namespace detail {
RealFft& fft_for(int n) {
  static std::map<int, std::unique_ptr<RealFft>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<RealFft>(n)).first;
  return *it->second;
}
}  // namespace detail

namespace {

std::vector<double> periodic_hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

void check_cfg(const EnhanceConfig& cfg) {
  if (cfg.frame_length <= 0 || cfg.hop_length <= 0 ||
      cfg.frame_length % cfg.hop_length != 0)
    throw std::domain_error("enhance: hop must divide frame_length");
  if (cfg.dd_alpha < 0.0 || cfg.dd_alpha > 1.0)
    throw std::domain_error("enhance: dd_alpha outside [0,1]");
  if (cfg.gain_floor < 0.0 || cfg.gain_floor > 1.0)
    throw std::domain_error("enhance: gain_floor outside [0,1]");
}

}  // namespace

Spectrogram stft(const Waveform& x, const EnhanceConfig& cfg) {
  check_cfg(cfg);
  const int n = cfg.frame_length;
  const int hop = cfg.hop_length;
  if (static_cast<int>(x.size()) < n)
    throw std::domain_error("stft: input shorter than one frame");

  // One frame of zeros on each side gives every real sample full overlap
  // coverage, which keeps WOLA resynthesis exact at the edges even after
  // per-bin modification of the frames.
  const int pad = n;
  const std::size_t len = x.size() + 2 * pad;
  const std::size_t nframes = (len - n) / hop + ((len - n) % hop ? 2 : 1);
  const auto window = periodic_hann(n);
  auto& fft = detail::fft_for(n);

  Spectrogram s;
  s.frame_length = n;
  s.hop_length = hop;
  s.num_samples = x.size();
  s.pad = pad;
  s.frames.resize(nframes);
  std::vector<double> buf(n);
  for (std::size_t t = 0; t < nframes; ++t) {
    const std::size_t off = t * hop;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = off + i;
      buf[i] = (idx >= static_cast<std::size_t>(pad) && idx < pad + x.size()
                    ? x.samples[idx - pad]
                    : 0.0) *
               window[i];
    }
    s.frames[t].resize(fft.bins());
    fft.forward(buf.data(), s.frames[t].data());
  }
  return s;
}

Waveform istft(const Spectrogram& s, const EnhanceConfig& cfg) {
  check_cfg(cfg);
  if (s.frame_length != cfg.frame_length || s.hop_length != cfg.hop_length)
    throw std::domain_error("istft: spectrogram/config frame geometry mismatch");
  const int n = cfg.frame_length;
  const int hop = cfg.hop_length;
  const auto window = periodic_hann(n);
  auto& fft = detail::fft_for(n);

  const std::size_t total = (s.frames.size() - 1) * hop + n;
  std::vector<double> acc(total, 0.0), wsum(total, 0.0);
  std::vector<double> buf(n);
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    if (static_cast<int>(s.frames[t].size()) != n / 2 + 1)
      throw std::domain_error("istft: bin count mismatch");
    fft.inverse(s.frames[t].data(), buf.data());
    const std::size_t off = t * hop;
    for (int i = 0; i < n; ++i) {
      acc[off + i] += buf[i] * window[i];
      wsum[off + i] += window[i] * window[i];
    }
  }
  const std::size_t want = s.num_samples ? s.num_samples : total;
  if (total < s.pad + want) throw std::domain_error("istft: truncated spectrogram");
  Waveform out;
  out.samples.resize(want);
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + s.pad;
    out.samples[i] = wsum[j] > 1e-12 ? acc[j] / wsum[j] : 0.0;
  }
  return out;
}

Waveform asnr_enhance(const Waveform& x, double sigma, const EnhanceConfig& cfg) {
  check_cfg(cfg);
  if (sigma < 0.0) throw std::domain_error("asnr_enhance: negative sigma");

  Spectrogram s = stft(x, cfg);
  const int bins = cfg.frame_length / 2 + 1;
  const auto window = periodic_hann(cfg.frame_length);
  double wenergy = 0.0;
  for (double w : window) wenergy += w * w;

  // Noise PSD per bin. White noise of deviation sigma windowed by w has
  // expected periodogram sigma^2 * sum(w^2) in every bin.
  std::vector<double> noise_psd(bins, 0.0);
  if (cfg.noise_psd_mode == NoisePsdMode::kAnalyticSigma) {
    for (int k = 0; k < bins; ++k) noise_psd[k] = sigma * sigma * wenergy;
  } else {
    // skip the frames that only see padding
    const int first = s.pad / cfg.hop_length;
    const int last = std::min<int>(first + cfg.leading_frames,
                                   static_cast<int>(s.frames.size()));
    for (int k = 0; k < bins; ++k) {
      double acc = 0.0;
      for (int t = first; t < last; ++t) acc += std::norm(s.frames[t][k]);
      noise_psd[k] = acc / std::max(last - first, 1);
    }
  }

  std::vector<double> prev_clean(bins, 0.0);  // |S(t-1,k)|^2
  for (auto& frame : s.frames) {
    for (int k = 0; k < bins; ++k) {
      const double psd = std::max(noise_psd[k], 1e-300);
      const double gamma = std::norm(frame[k]) / psd;
      const double xi = cfg.dd_alpha * prev_clean[k] / psd +
                        (1.0 - cfg.dd_alpha) * std::max(gamma - 1.0, 0.0);
      const double gain = std::max(xi / (1.0 + xi), cfg.gain_floor);
      frame[k] *= gain;
      prev_clean[k] = std::norm(frame[k]);
    }
  }
  Waveform out = istft(s, cfg);
  out.sample_rate = x.sample_rate;
  return out;
}

}  // namespace asrlab
