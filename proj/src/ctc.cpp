#include "asrlab/ctc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace asrlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}
double logsumexp3(double a, double b, double c) { return logsumexp2(logsumexp2(a, b), c); }

}  // namespace

std::vector<int> transcript_labels(const Transcript& t, const Vocabulary& vocab) {
  std::vector<int> labels;
  for (std::size_t w = 0; w < t.words.size(); ++w) {
    if (w) labels.push_back(vocab.char_to_class(' '));
    for (char c : t.words[w]) labels.push_back(vocab.char_to_class(c));
  }
  return labels;
}

CtcResult ctc_loss(const LogitsSequence& logits, const std::vector<int>& labels,
                   int num_classes, bool want_grad) {
  const int T = static_cast<int>(logits.values.rows());
  const int C = static_cast<int>(logits.values.cols());
  if (C != num_classes) throw std::domain_error("ctc_loss: class count mismatch");
  const int L = static_cast<int>(labels.size());
  const int S = 2 * L + 1;  // blank-interleaved

  // Minimum frames: every label plus a separating blank between repeats.
  int min_frames = L;
  for (int i = 1; i < L; ++i)
    if (labels[i] == labels[i - 1]) ++min_frames;
  CtcResult res;
  if (T < min_frames) {
    res.feasible = false;
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }

  // Row-wise log-softmax.
  Eigen::MatrixXd logp(T, C);
  for (int t = 0; t < T; ++t) {
    const double m = logits.values.row(t).maxCoeff();
    const double lse = m + std::log((logits.values.row(t).array() - m).exp().sum());
    logp.row(t) = logits.values.row(t).array() - lse;
  }

  auto ext_label = [&](int s) { return (s % 2 == 0) ? 0 : labels[s / 2]; };

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(T, S, kNegInf);
  alpha(0, 0) = logp(0, 0);
  if (S > 1) alpha(0, 1) = logp(0, ext_label(1));
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const int lab = ext_label(s);
      double a = alpha(t - 1, s);
      if (s >= 1) a = logsumexp2(a, alpha(t - 1, s - 1));
      // skip transition allowed between distinct non-blank labels
      if (s >= 2 && lab != 0 && lab != ext_label(s - 2))
        a = logsumexp2(a, alpha(t - 1, s - 2));
      alpha(t, s) = a + logp(t, lab);
    }
  }
  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = logsumexp2(log_p, alpha(T - 1, S - 2));
  if (log_p == kNegInf) {
    res.feasible = false;
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }
  res.loss = -log_p;
  if (!want_grad) return res;

  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(T, S, kNegInf);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (int t = T - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double b = beta(t + 1, s) + logp(t + 1, ext_label(s));
      if (s + 1 < S) b = logsumexp2(b, beta(t + 1, s + 1) + logp(t + 1, ext_label(s + 1)));
      if (s + 2 < S && ext_label(s + 2) != 0 && ext_label(s + 2) != ext_label(s))
        b = logsumexp2(b, beta(t + 1, s + 2) + logp(t + 1, ext_label(s + 2)));
      beta(t, s) = b;
    }
  }

  // gamma(t,k): posterior of emitting class k at frame t.
  res.grad.resize(T, C);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(C);
    for (int s = 0; s < S; ++s) {
      const double post = alpha(t, s) + beta(t, s) - log_p;
      if (post > -700.0) gamma(ext_label(s)) += std::exp(post);
    }
    res.grad.row(t) = logp.row(t).array().exp().matrix() - gamma.transpose();
  }
  return res;
}

CtcResult ctc_loss(const LogitsSequence& logits, const Transcript& target,
                   const Vocabulary& vocab, bool want_grad) {
  return ctc_loss(logits, transcript_labels(target, vocab), vocab.num_classes(), want_grad);
}

}  // namespace asrlab
