#include "asrlab/smoothing.hpp"

#include <algorithm>
#include <stdexcept>

namespace asrlab {

VoteStrategy vote_strategy_from_string(const std::string& name) {
  if (name == "one-sentence") return VoteStrategy::kOneSentence;
  if (name == "majority") return VoteStrategy::kMajority;
  if (name == "logit-avg") return VoteStrategy::kLogitAvg;
  if (name == "rover") return VoteStrategy::kRover;
  throw std::invalid_argument("unknown vote strategy: " + name);
}

std::string to_string(VoteStrategy v) {
  switch (v) {
    case VoteStrategy::kOneSentence: return "one-sentence";
    case VoteStrategy::kMajority: return "majority";
    case VoteStrategy::kLogitAvg: return "logit-avg";
    case VoteStrategy::kRover: return "rover";
  }
  return "?";
}

SmoothedResult smoothed_transcribe(const ModelParams& params, const Waveform& x,
                                   const SmoothingConfig& cfg) {
  if (cfg.sigma < 0.0) throw std::domain_error("smoothed_transcribe: negative sigma");
  const int n = std::clamp(cfg.n_samples, 1, 50);

  SmoothedResult res;
  res.sample_decodes.reserve(n);
  res.sample_logits.reserve(n);
  for (int i = 0; i < n; ++i) {
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    Waveform sample = add_gaussian_noise(x, cfg.sigma, stream);
    if (cfg.enhance) sample = asnr_enhance(sample, cfg.sigma, cfg.enhance_cfg);
    LogitsSequence logits = forward(params, sample);
    res.sample_decodes.push_back(greedy_decode(logits, params.vocab));
    res.sample_logits.push_back(std::move(logits));
  }

  switch (cfg.vote) {
    case VoteStrategy::kOneSentence:
      res.transcript = res.sample_decodes.front().transcript;
      break;
    case VoteStrategy::kMajority: {
      std::vector<Transcript> ts;
      for (const auto& d : res.sample_decodes) ts.push_back(d.transcript);
      res.transcript = majority_vote(ts);
      break;
    }
    case VoteStrategy::kLogitAvg:
      res.transcript = average_logits(res.sample_logits, params.vocab);
      break;
    case VoteStrategy::kRover: {
      std::vector<std::vector<WordHypothesis>> hyps;
      for (const auto& d : res.sample_decodes) hyps.push_back(d.word_hyps);
      res.transcript = rover(hyps, cfg.rover_cfg);
      break;
    }
  }
  return res;
}

}  // namespace asrlab
