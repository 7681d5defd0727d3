#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asrlab/enhance.hpp"
#include "asrlab/recognizer.hpp"
#include "asrlab/voting.hpp"

namespace asrlab {

enum class VoteStrategy { kOneSentence, kMajority, kLogitAvg, kRover };

VoteStrategy vote_strategy_from_string(const std::string& name);
std::string to_string(VoteStrategy v);

struct SmoothingConfig {
  double sigma = 0.0;
  int n_samples = 16;       // capped at 50, the ROVER feasibility limit
  bool enhance = false;
  VoteStrategy vote = VoteStrategy::kRover;
  std::uint64_t seed = 0;
  EnhanceConfig enhance_cfg;
  RoverConfig rover_cfg;
};

struct SmoothedResult {
  Transcript transcript;
  // Per-sample diagnostics, index-aligned with the noise streams.
  std::vector<DecodeResult> sample_decodes;
  std::vector<LogitsSequence> sample_logits;
};

// The smoothed recognizer: N noisy copies (stream i of cfg.seed, so N
// sweeps share prefixes), optional per-sample enhancement, per-sample
// decode, then the configured vote.
SmoothedResult smoothed_transcribe(const ModelParams& params, const Waveform& x,
                                   const SmoothingConfig& cfg);

}  // namespace asrlab
