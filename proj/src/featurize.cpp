#include <cmath>
#include <stdexcept>

#include "asrlab/recognizer.hpp"
#include "fft_util.hpp"

namespace asrlab {

namespace detail {
RealFft& fft_for(int n);
}

namespace {

int frame_count(std::size_t len, const FeatureConfig& cfg) {
  if (static_cast<int>(len) < cfg.frame_length)
    throw std::domain_error("featurize: input shorter than one frame");
  return 1 + static_cast<int>((len - cfg.frame_length) / cfg.hop_length);
}

// Unstacked log-power frames, F x bins.
Eigen::MatrixXd log_power(const Waveform& x, const FeatureConfig& cfg) {
  const int F = frame_count(x.size(), cfg);
  auto& fft = detail::fft_for(cfg.frame_length);
  const int bins = fft.bins();
  Eigen::MatrixXd out(F, bins);
  std::vector<std::complex<double>> spec(bins);
  for (int t = 0; t < F; ++t) {
    fft.forward(x.samples.data() + static_cast<std::size_t>(t) * cfg.hop_length, spec.data());
    for (int k = 0; k < bins; ++k) out(t, k) = std::log(std::norm(spec[k]) + cfg.kappa);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd featurize(const Waveform& x, const FeatureConfig& cfg) {
  const Eigen::MatrixXd lp = log_power(x, cfg);
  const int F = static_cast<int>(lp.rows());
  const int bins = static_cast<int>(lp.cols());
  const int span = 2 * cfg.context + 1;
  Eigen::MatrixXd stacked(F, bins * span);
  for (int t = 0; t < F; ++t)
    for (int o = -cfg.context; o <= cfg.context; ++o) {
      const int src = std::clamp(t + o, 0, F - 1);
      stacked.block(t, (o + cfg.context) * bins, 1, bins) = lp.row(src);
    }
  return stacked;
}

std::vector<double> featurize_backward(const Waveform& x, const FeatureConfig& cfg,
                                       const Eigen::MatrixXd& dfeat) {
  auto& fft = detail::fft_for(cfg.frame_length);
  const int bins = fft.bins();
  const int F = frame_count(x.size(), cfg);
  const int span = 2 * cfg.context + 1;
  if (dfeat.rows() != F || dfeat.cols() != bins * span)
    throw std::domain_error("featurize_backward: gradient shape mismatch");

  // Fold context stacking back onto source frames.
  Eigen::MatrixXd dlp = Eigen::MatrixXd::Zero(F, bins);
  for (int t = 0; t < F; ++t)
    for (int o = -cfg.context; o <= cfg.context; ++o) {
      const int src = std::clamp(t + o, 0, F - 1);
      dlp.row(src) += dfeat.block(t, (o + cfg.context) * bins, 1, bins);
    }

  std::vector<double> dx(x.size(), 0.0);
  std::vector<std::complex<double>> spec(bins), dspec(bins);
  std::vector<double> dframe(cfg.frame_length);
  for (int t = 0; t < F; ++t) {
    const double* frame = x.samples.data() + static_cast<std::size_t>(t) * cfg.hop_length;
    fft.forward(frame, spec.data());
    for (int k = 0; k < bins; ++k) {
      const double dP = dlp(t, k) / (std::norm(spec[k]) + cfg.kappa);
      dspec[k] = 2.0 * dP * spec[k];  // d|z|^2 = (2Re, 2Im)
    }
    fft.adjoint(dspec.data(), dframe.data());
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop_length;
    for (int i = 0; i < cfg.frame_length; ++i) dx[off + i] += dframe[i];
  }
  return dx;
}

}  // namespace asrlab
