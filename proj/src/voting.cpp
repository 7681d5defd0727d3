#include "asrlab/voting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace asrlab {

double wer(const Transcript& hyp, const Transcript& ref) {
  if (ref.words.empty()) throw std::domain_error("wer: empty reference");
  const std::size_t n = hyp.words.size(), m = ref.words.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (hyp.words[i - 1] == ref.words[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return std::min(static_cast<double>(prev[m]) / m, 1.0);
}

Transcript majority_vote(const std::vector<Transcript>& transcripts) {
  if (transcripts.empty()) throw std::domain_error("majority_vote: empty input");
  std::map<std::string, int> counts;
  for (const auto& t : transcripts) counts[t.str()]++;
  int best = -1;
  const Transcript* winner = nullptr;
  for (const auto& t : transcripts) {  // earliest first occurrence wins ties
    const int c = counts[t.str()];
    if (c > best) {
      best = c;
      winner = &t;
    }
  }
  return *winner;
}

Transcript average_logits(const std::vector<LogitsSequence>& logits_list,
                          const Vocabulary& vocab) {
  if (logits_list.empty()) throw std::domain_error("average_logits: empty input");
  const auto rows = logits_list.front().values.rows();
  const auto cols = logits_list.front().values.cols();
  LogitsSequence mean;
  mean.values = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& l : logits_list) {
    if (l.values.rows() != rows || l.values.cols() != cols)
      throw std::invalid_argument("average_logits: shape mismatch");
    mean.values += l.values;
  }
  mean.values /= static_cast<double>(logits_list.size());
  mean.frame_times = logits_list.front().frame_times;
  return greedy_decode(mean, vocab).transcript;
}

namespace {

double overlap_ratio(double s1, double e1, double s2, double e2) {
  const double inter = std::max(0.0, std::min(e1, e2) - std::max(s1, s2));
  const double uni = std::max(e1, e2) - std::min(s1, s2);
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

WordTransitionNetwork WordTransitionNetwork::from_hypothesis(
    const std::vector<WordHypothesis>& hyp) {
  WordTransitionNetwork wtn;
  wtn.merged = 1;
  for (const auto& h : hyp) {
    WtnSlot slot;
    slot.start = h.start;
    slot.end = h.start + h.duration;
    slot.arcs.push_back({h.word, 1, h.confidence});
    wtn.slots.push_back(std::move(slot));
  }
  return wtn;
}

WordTransitionNetwork align_wtn(const WordTransitionNetwork& wtn,
                                const std::vector<WordHypothesis>& hyp,
                                const RoverConfig& cfg) {
  const int S = static_cast<int>(wtn.slots.size());
  const int W = static_cast<int>(hyp.size());

  auto sub_cost = [&](const WtnSlot& slot, const WordHypothesis& h) {
    for (const auto& arc : slot.arcs)
      if (!arc.word.empty() && arc.word == h.word) return 0.0;
    return 1.0 + cfg.time_penalty *
                     (1.0 - overlap_ratio(slot.start, slot.end, h.start, h.start + h.duration));
  };

  // DP over (slots consumed, words consumed); ops: 0=diag, 1=slot-del, 2=ins
  std::vector<std::vector<double>> cost(S + 1, std::vector<double>(W + 1, 0.0));
  std::vector<std::vector<char>> op(S + 1, std::vector<char>(W + 1, 0));
  for (int i = 1; i <= S; ++i) { cost[i][0] = i; op[i][0] = 1; }
  for (int j = 1; j <= W; ++j) { cost[0][j] = j; op[0][j] = 2; }
  for (int i = 1; i <= S; ++i) {
    for (int j = 1; j <= W; ++j) {
      const double diag = cost[i - 1][j - 1] + sub_cost(wtn.slots[i - 1], hyp[j - 1]);
      const double del = cost[i - 1][j] + 1.0;
      const double ins = cost[i][j - 1] + 1.0;
      if (diag <= del && diag <= ins) { cost[i][j] = diag; op[i][j] = 0; }
      else if (del <= ins)            { cost[i][j] = del;  op[i][j] = 1; }
      else                            { cost[i][j] = ins;  op[i][j] = 2; }
    }
  }

  // Backtrace into an op list, oldest first.
  std::vector<char> ops;
  for (int i = S, j = W; i > 0 || j > 0;) {
    const char o = op[i][j];
    ops.push_back(o);
    if (o == 0) { --i; --j; }
    else if (o == 1) { --i; }
    else { --j; }
  }
  std::reverse(ops.begin(), ops.end());

  WordTransitionNetwork out;
  out.merged = wtn.merged + 1;
  int i = 0, j = 0;
  for (char o : ops) {
    if (o == 0) {  // match or substitution
      WtnSlot slot = wtn.slots[i++];
      const auto& h = hyp[j++];
      bool found = false;
      for (auto& arc : slot.arcs)
        if (arc.word == h.word) {
          arc.count++;
          arc.conf_sum += h.confidence;
          found = true;
          break;
        }
      if (!found) slot.arcs.push_back({h.word, 1, h.confidence});
      slot.start = std::min(slot.start, h.start);
      slot.end = std::max(slot.end, h.start + h.duration);
      out.slots.push_back(std::move(slot));
    } else if (o == 1) {  // hypothesis skips this slot
      WtnSlot slot = wtn.slots[i++];
      bool found = false;
      for (auto& arc : slot.arcs)
        if (arc.word.empty()) { arc.count++; found = true; break; }
      if (!found) slot.arcs.push_back({"", 1, 0.0});
      out.slots.push_back(std::move(slot));
    } else {  // inserted word: new slot, NULL votes for prior hypotheses
      const auto& h = hyp[j++];
      WtnSlot slot;
      slot.start = h.start;
      slot.end = h.start + h.duration;
      slot.arcs.push_back({"", wtn.merged, 0.0});
      slot.arcs.push_back({h.word, 1, h.confidence});
      out.slots.push_back(std::move(slot));
    }
  }
  return out;
}

Transcript wtn_vote(const WordTransitionNetwork& wtn) {
  Transcript t;
  for (const auto& slot : wtn.slots) {
    const WtnArc* best = nullptr;
    for (const auto& arc : slot.arcs) {
      if (!best) { best = &arc; continue; }
      if (arc.count != best->count) {
        if (arc.count > best->count) best = &arc;
        continue;
      }
      if (arc.conf_sum != best->conf_sum) {
        if (arc.conf_sum > best->conf_sum) best = &arc;
        continue;
      }
      // NULL loses remaining ties; otherwise lexicographic
      if (best->word.empty() && !arc.word.empty()) best = &arc;
      else if (!best->word.empty() && !arc.word.empty() && arc.word < best->word) best = &arc;
    }
    if (best && !best->word.empty()) t.words.push_back(best->word);
  }
  return t;
}

Transcript rover(const std::vector<std::vector<WordHypothesis>>& hyps,
                 const RoverConfig& cfg) {
  if (hyps.empty()) return {};
  const std::size_t n = std::min<std::size_t>(hyps.size(), cfg.max_hypotheses);
  auto wtn = WordTransitionNetwork::from_hypothesis(hyps[0]);
  for (std::size_t i = 1; i < n; ++i) wtn = align_wtn(wtn, hyps[i], cfg);
  return wtn_vote(wtn);
}

void write_ctm(const std::string& path, const std::string& utt_id,
               const std::vector<WordHypothesis>& hyp) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_ctm: cannot open " + path);
  f << std::fixed << std::setprecision(3);
  for (const auto& h : hyp)
    f << utt_id << " 1 " << h.start << ' ' << h.duration << ' ' << h.word << ' '
      << h.confidence << '\n';
}

std::vector<WordHypothesis> read_ctm(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_ctm: cannot open " + path);
  std::vector<WordHypothesis> hyp;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string utt, chan;
    WordHypothesis h;
    if (!(in >> utt >> chan >> h.start >> h.duration >> h.word >> h.confidence))
      throw std::runtime_error("read_ctm: malformed line: " + line);
    hyp.push_back(std::move(h));
  }
  return hyp;
}

}  // namespace asrlab
