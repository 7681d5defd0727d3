#pragma once

#include <Eigen/Dense>

#include "asrlab/recognizer.hpp"
#include "asrlab/transcript.hpp"

namespace asrlab {

struct CtcResult {
  double loss = 0.0;       // -log P(target | logits)
  bool feasible = true;    // false when the target cannot align in T frames
  Eigen::MatrixXd grad;    // d(loss)/d(logits), filled when requested
};

// Label classes for a transcript: characters of the words joined by single
// spaces, mapped through the vocabulary.
std::vector<int> transcript_labels(const Transcript& t, const Vocabulary& vocab);

// Log-space CTC forward-backward over blank-interleaved labels.
CtcResult ctc_loss(const LogitsSequence& logits, const std::vector<int>& labels,
                   int num_classes, bool want_grad = false);

CtcResult ctc_loss(const LogitsSequence& logits, const Transcript& target,
                   const Vocabulary& vocab, bool want_grad = false);

}  // namespace asrlab
