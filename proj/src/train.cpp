#include "asrlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asrlab/ctc.hpp"
#include "asrlab/voting.hpp"

namespace asrlab {

namespace {

// One SGD step on a single utterance; returns the CTC loss, or NaN when
// the target is infeasible for the utterance length (skipped).
double sgd_step(ModelParams& params, ParamGrads& velocity, const Waveform& audio,
                const Transcript& target, double lr, double momentum, double clip) {
  const LogitsSequence logits = forward(params, audio);
  CtcResult ctc = ctc_loss(logits, target, params.vocab, /*want_grad=*/true);
  if (!ctc.feasible) return std::numeric_limits<double>::quiet_NaN();

  ParamGrads grads = ParamGrads::zeros_like(params);
  backward_to_params(params, audio, ctc.grad, grads);
  const double norm = std::sqrt(grads.sq_norm());
  if (clip > 0.0 && norm > clip) grads.scale(clip / norm);

  velocity.scale(momentum);
  velocity.axpy(1.0, grads);
  params.w1 -= lr * velocity.w1;
  params.w2 -= lr * velocity.w2;
  params.w3 -= lr * velocity.w3;
  params.b1 -= lr * velocity.b1;
  params.b2 -= lr * velocity.b2;
  params.b3 -= lr * velocity.b3;
  return ctc.loss;
}

void run_epoch(ModelParams& params, ParamGrads& velocity, const ToyCorpus& corpus,
               double sigma, double lr, const TrainConfig& cfg, RngStream& shuffle_rng,
               std::uint64_t noise_seed, int epoch) {
  std::vector<std::size_t> order(corpus.train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.uniform() * i) % i]);

  int step = 0;
  for (std::size_t idx : order) {
    const auto& utt = corpus.train[idx];
    Waveform audio = utt.audio;
    if (sigma > 0.0) {
      // Mix clean and noisy passes so the model keeps its clean accuracy
      // while it learns the noisy silence statistics.
      RngStream noise(noise_seed, (static_cast<std::uint64_t>(epoch) << 32) | idx);
      if (noise.uniform() < 0.5) audio = add_gaussian_noise(audio, sigma, noise);
    }
    const double loss = sgd_step(params, velocity, audio, utt.transcript, lr,
                                 cfg.momentum, cfg.grad_clip);
    ++step;
    if (!std::isnan(loss) && !std::isfinite(loss))
      throw TrainingError("train: divergence (non-finite loss) at epoch " +
                          std::to_string(epoch) + " step " + std::to_string(step));
  }
}

}  // namespace

ModelParams train(const ToyCorpus& corpus, double sigma_aug, const TrainConfig& cfg,
                  std::uint64_t seed) {
  if (corpus.train.empty()) throw std::domain_error("train: empty corpus");
  ModelParams params = ModelParams::init(cfg.hidden, seed);
  ParamGrads velocity = ParamGrads::zeros_like(params);
  RngStream shuffle_rng(seed, 100);

  double lr = cfg.learning_rate;
  for (int epoch = 0; epoch < cfg.clean_epochs; ++epoch) {
    run_epoch(params, velocity, corpus, 0.0, lr, cfg, shuffle_rng, seed, epoch);
    lr *= cfg.lr_decay;
  }
  if (sigma_aug > 0.0) {
    velocity = ParamGrads::zeros_like(params);  // fresh optimizer state
    double alr = cfg.augment_lr;
    for (int epoch = 0; epoch < cfg.augment_epochs; ++epoch) {
      run_epoch(params, velocity, corpus, sigma_aug, alr, cfg, shuffle_rng, seed + 1,
                cfg.clean_epochs + epoch);
      alr *= cfg.lr_decay;
    }
  }
  return params;
}

double evaluate_wer(const ModelParams& params, const std::vector<Utterance>& utts) {
  if (utts.empty()) throw std::domain_error("evaluate_wer: no utterances");
  double acc = 0.0;
  for (const auto& u : utts) {
    const DecodeResult d = greedy_decode(forward(params, u.audio), params.vocab);
    acc += wer(d.transcript, u.transcript);
  }
  return acc / utts.size();
}

}  // namespace asrlab
