#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "asrlab/signal.hpp"
#include "asrlab/transcript.hpp"

namespace asrlab {

// Character inventory. Class 0 is the CTC blank; character i maps to
// class i+1.
struct Vocabulary {
  std::vector<char> characters;  // includes ' '
  int blank_index = 0;

  int num_classes() const { return static_cast<int>(characters.size()) + 1; }
  int char_to_class(char c) const;
  char class_to_char(int cls) const;

  static Vocabulary toy();
};

struct FeatureConfig {
  int frame_length = 200;
  int hop_length = 100;
  int context = 2;        // frames of context on each side
  double kappa = 1e-6;    // log-power floor
};

// Per-frame MLP over context-stacked log-power frames:
// stacked features -> hidden -> hidden -> num_classes logits.
struct ModelParams {
  FeatureConfig feat;
  Vocabulary vocab;
  double feat_shift = 5.0;   // fixed affine feature normalization
  double feat_scale = 0.2;
  Eigen::MatrixXd w1;        // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;        // hidden x hidden
  Eigen::VectorXd b2;
  Eigen::MatrixXd w3;        // classes x hidden
  Eigen::VectorXd b3;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }

  static ModelParams init(int hidden, std::uint64_t seed,
                          const FeatureConfig& feat = {},
                          const Vocabulary& vocab = Vocabulary::toy());

  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);
};

struct LogitsSequence {
  Eigen::MatrixXd values;           // T x num_classes, raw log-scores
  std::vector<double> frame_times;  // start second of each frame
};

struct DecodeResult {
  Transcript transcript;
  std::vector<int> char_alignment;  // first frame of each collapsed run
  std::vector<WordHypothesis> word_hyps;
};

// Context-stacked log-power features, F x (bins * (2*context+1)).
// Differentiable w.r.t. the waveform via featurize_backward.
Eigen::MatrixXd featurize(const Waveform& x, const FeatureConfig& cfg);

// Adjoint of featurize: d(loss)/d(stacked features) -> d(loss)/d(samples).
std::vector<double> featurize_backward(const Waveform& x, const FeatureConfig& cfg,
                                       const Eigen::MatrixXd& dfeat);

LogitsSequence forward(const ModelParams& params, const Waveform& x);

// Gradient of a scalar loss w.r.t. the waveform, given d(loss)/d(logits).
std::vector<double> backward_to_input(const ModelParams& params, const Waveform& x,
                                      const Eigen::MatrixXd& dlogits);

// Parameter-shaped gradient accumulator for training.
struct ParamGrads {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static ParamGrads zeros_like(const ModelParams& p);
  void axpy(double a, const ParamGrads& g);
  void scale(double a);
  double sq_norm() const;
};

void backward_to_params(const ModelParams& params, const Waveform& x,
                        const Eigen::MatrixXd& dlogits, ParamGrads& grads);

// Best-path decode: per-frame argmax, collapse repeats, drop blanks.
// Word start = time of its first character's frame; duration spans to the
// last character's frame plus one hop. Confidence is the mean framewise
// max-softmax over the word's span.
DecodeResult greedy_decode(const LogitsSequence& logits, const Vocabulary& vocab,
                           double hop_seconds = 100.0 / 16000.0);

}  // namespace asrlab
