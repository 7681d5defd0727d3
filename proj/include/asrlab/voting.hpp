#pragma once

#include <string>
#include <vector>

#include "asrlab/recognizer.hpp"
#include "asrlab/transcript.hpp"

namespace asrlab {

// Word-level edit distance normalized by |ref|, capped at 1.
double wer(const Transcript& hyp, const Transcript& ref);

// Most frequent full sentence; ties go to the earliest first occurrence.
Transcript majority_vote(const std::vector<Transcript>& transcripts);

// Decode of the elementwise mean of same-shape logits sequences.
Transcript average_logits(const std::vector<LogitsSequence>& logits_list,
                          const Vocabulary& vocab);

// One ROVER slot: competing word (or NULL, empty string) arcs with vote
// counts and summed confidences, plus the slot's audio span.
struct WtnArc {
  std::string word;  // empty = NULL arc
  int count = 0;
  double conf_sum = 0.0;
};

struct WtnSlot {
  std::vector<WtnArc> arcs;
  double start = 0.0;
  double end = 0.0;
};

struct WordTransitionNetwork {
  std::vector<WtnSlot> slots;
  int merged = 0;  // hypotheses merged so far

  static WordTransitionNetwork from_hypothesis(const std::vector<WordHypothesis>& hyp);
};

struct RoverConfig {
  double time_penalty = 0.5;  // lambda_t in the substitution cost
  int max_hypotheses = 50;
};

// DP merge of one hypothesis into the WTN. Substitution/match consume one
// slot and one word; insertions create fresh slots (NULL-padded for the
// hypotheses already merged); deletions add a NULL vote to the slot.
WordTransitionNetwork align_wtn(const WordTransitionNetwork& wtn,
                                const std::vector<WordHypothesis>& hyp,
                                const RoverConfig& cfg = {});

// Frequency vote over the merged WTN; a winning NULL emits nothing.
Transcript wtn_vote(const WordTransitionNetwork& wtn);

Transcript rover(const std::vector<std::vector<WordHypothesis>>& hyps,
                 const RoverConfig& cfg = {});

// CTM-style hypothesis files: `utt-id channel start duration word conf`.
void write_ctm(const std::string& path, const std::string& utt_id,
               const std::vector<WordHypothesis>& hyp);
std::vector<WordHypothesis> read_ctm(const std::string& path);

}  // namespace asrlab
