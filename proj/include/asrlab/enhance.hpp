#pragma once

#include <complex>
#include <string>
#include <vector>

#include "asrlab/signal.hpp"

namespace asrlab {

enum class NoisePsdMode {
  kAnalyticSigma,   // noise PSD computed in closed form from a known sigma
  kLeadingFrames,   // estimated from the first frames of the utterance
};

struct EnhanceConfig {
  int frame_length = 512;
  int hop_length = 128;
  double dd_alpha = 0.98;   // decision-directed smoothing
  double gain_floor = 0.1;  // minimum Wiener gain
  NoisePsdMode noise_psd_mode = NoisePsdMode::kAnalyticSigma;
  int leading_frames = 6;
};

struct Spectrogram {
  // frames[t][k], k = 0..frame_length/2 inclusive
  std::vector<std::vector<std::complex<double>>> frames;
  int frame_length = 0;
  int hop_length = 0;
  std::string window = "hann";
  std::size_t num_samples = 0;  // original length, restored by istft
  int pad = 0;                  // zeros prepended/appended before framing
};

// Periodic-Hann analysis at the configured hop. The tail is zero-padded so
// every sample is covered; istft trims back to the stored length.
Spectrogram stft(const Waveform& x, const EnhanceConfig& cfg);

// Weighted overlap-add inverse. Exact on the interior for COLA-compliant
// window/hop (the defaults are), edge frames normalized by the partial
// window-energy sum.
Waveform istft(const Spectrogram& s, const EnhanceConfig& cfg);

// A-priori-SNR Wiener enhancement with the decision-directed recursion:
//   xi(t,k) = alpha*|S(t-1,k)|^2/lambda_N(k) + (1-alpha)*max(gamma-1, 0)
//   G = max(xi/(1+xi), gain_floor)
// sigma is the known injected-noise deviation (analytic mode) or ignored
// (leading-frames mode).
Waveform asnr_enhance(const Waveform& x, double sigma, const EnhanceConfig& cfg);

}  // namespace asrlab
