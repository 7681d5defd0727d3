#pragma once

#include <cstdint>
#include <stdexcept>

#include "asrlab/corpus.hpp"
#include "asrlab/recognizer.hpp"

namespace asrlab {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int hidden = 48;
  int clean_epochs = 30;
  double learning_rate = 1e-2;
  double lr_decay = 0.95;      // per epoch
  double momentum = 0.9;
  double grad_clip = 5.0;         // global L2 clip per utterance
  double augment_lr = 5e-3;       // augmented-phase starting lr
  int augment_epochs = 25;
};

// Clean training followed by one Gaussian-augmented epoch when
// sigma_aug > 0. Deterministic given the seed.
ModelParams train(const ToyCorpus& corpus, double sigma_aug, const TrainConfig& cfg,
                  std::uint64_t seed);

// Mean WER (0..1) of greedy decoding over a split.
double evaluate_wer(const ModelParams& params, const std::vector<Utterance>& utts);

}  // namespace asrlab
