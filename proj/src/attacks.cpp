#include "asrlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "asrlab/ctc.hpp"

namespace asrlab {

Defense straight_through(Defense defense) {
  defense.straight_through = true;
  return defense;
}

LossGrad stochastic_loss_grad(const Defense& defense, const Waveform& x,
                              const Transcript& target, RngStream& noise_rng) {
  const ModelParams& params = *defense.params;
  Waveform noisy = add_gaussian_noise(x, defense.smooth.sigma, noise_rng);

  // The recognizer's input: enhanced audio only when the gradient is taken
  // straight-through; an attacker ignoring enhancement differentiates the
  // bare recognizer at the noisy point.
  const Waveform* net_input = &noisy;
  Waveform enhanced;
  if (defense.smooth.enhance && defense.straight_through) {
    enhanced = asnr_enhance(noisy, defense.smooth.sigma, defense.smooth.enhance_cfg);
    net_input = &enhanced;
  }

  LossGrad out;
  const LogitsSequence logits = forward(params, *net_input);
  CtcResult ctc = ctc_loss(logits, target, params.vocab, /*want_grad=*/true);
  if (!ctc.feasible) {
    out.feasible = false;
    out.loss = std::numeric_limits<double>::infinity();
    out.grad.assign(x.size(), 0.0);
    return out;
  }
  out.loss = ctc.loss;
  out.grad = backward_to_input(params, *net_input, ctc.grad);
  return out;
}

LossGrad eot_gradient(const Defense& defense, const Waveform& x,
                      const Transcript& target, int n, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("eot_gradient: n must be >= 1");
  LossGrad acc;
  acc.grad.assign(x.size(), 0.0);
  acc.loss = 0.0;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    LossGrad g = stochastic_loss_grad(defense, x, target, rng);
    if (!g.feasible) continue;
    for (std::size_t j = 0; j < acc.grad.size(); ++j) acc.grad[j] += g.grad[j];
    acc.loss += g.loss;
    ++ok;
  }
  if (ok == 0) {
    acc.feasible = false;
    acc.loss = std::numeric_limits<double>::infinity();
    return acc;
  }
  const double inv = 1.0 / ok;
  for (double& g : acc.grad) g *= inv;
  acc.loss *= inv;
  return acc;
}

AttackResult pgd_attack(const Defense& defense, const Waveform& x, const Transcript& y,
                        const PgdConfig& cfg, std::uint64_t rng_seed) {
  const double eps = linf_bound_from_snr(x, cfg.snr_bound_db);
  const double step = cfg.step_size > 0.0 ? cfg.step_size : eps / 10.0;
  const int n = cfg.adaptive ? cfg.eot_samples : 1;

  AttackResult res;
  res.delta.delta.assign(x.size(), 0.0);
  bool any_feasible = false;
  for (int it = 0; it < cfg.steps; ++it) {
    Waveform xd = x;
    for (std::size_t i = 0; i < xd.size(); ++i) xd.samples[i] += res.delta.delta[i];
    const LossGrad g =
        eot_gradient(defense, xd, y, n, rng_seed + static_cast<std::uint64_t>(it) * 0x9e37);
    if (!g.feasible) break;
    any_feasible = true;
    for (std::size_t i = 0; i < res.delta.size(); ++i)
      res.delta.delta[i] += step * (g.grad[i] > 0.0 ? 1.0 : (g.grad[i] < 0.0 ? -1.0 : 0.0));
    res.delta = project_l2(project_linf(res.delta, eps), eps);
    res.steps_used = it + 1;
  }
  (void)any_feasible;

  const Waveform attacked = [&] {
    Waveform xx = x;
    for (std::size_t i = 0; i < xx.size(); ++i) xx.samples[i] += res.delta.delta[i];
    return xx;
  }();
  const Transcript out = defense.transcribe(attacked);
  res.wer_ground_truth = wer(out, y);
  res.achieved_snr_db = snr_db(x, res.delta);
  res.success = res.wer_ground_truth > 0.0;
  return res;
}

AttackResult cw_attack(const Defense& defense, const Waveform& x,
                       const Transcript& y_ground_truth, const CwConfig& cfg,
                       std::uint64_t rng_seed) {
  if (cfg.lambda_init <= 0.0 || cfg.lambda_factor <= 1.0)
    throw std::domain_error("cw_attack: bad lambda schedule");
  if (cfg.restarts < 1) throw std::domain_error("cw_attack: restarts must be positive");
  const std::size_t d = x.size();
  const int n = cfg.adaptive ? cfg.eot_samples : 1;
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-9;

  AttackResult res;
  res.delta.delta.assign(d, 0.0);
  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<double> last_delta(d, 0.0);

  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> delta(d, 0.0), m(d, 0.0), v(d, 0.0);
    if (r > 0) {
      // jittered starting point to escape the deterministic basin
      RngStream jrng(rng_seed ^ (0xbf58476d1ce4e5b9ull * r), 0);
      const double scale = l2_norm(x.samples) *
                           std::pow(10.0, -cfg.init_snr_db / 20.0) /
                           std::sqrt(static_cast<double>(d));
      for (double& di : delta) di = scale * jrng.gaussian();
    }
    double lambda = cfg.lambda_init;
    double step = cfg.step_size;
    bool window_success = false;
    const std::uint64_t run_seed = rng_seed + 0x51ed2701ull * r;

    for (int it = 1; it <= cfg.max_steps; ++it) {
      Waveform xd = x;
      for (std::size_t i = 0; i < d; ++i) xd.samples[i] += delta[i];
      const LossGrad g = eot_gradient(defense, xd, cfg.target, n,
                                      run_seed + static_cast<std::uint64_t>(it) * 0x9e37);
      const double dn = l2_norm(delta);
      for (std::size_t i = 0; i < d; ++i) {
        double gi = (g.feasible ? g.grad[i] : 0.0);
        if (dn > 0.0) gi += lambda * delta[i] / dn;
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        const double mh = m[i] / (1.0 - std::pow(beta1, it));
        const double vh = v[i] / (1.0 - std::pow(beta2, it));
        delta[i] -= step * mh / (std::sqrt(vh) + adam_eps);
      }
      res.steps_used = it;

      if (it % cfg.lambda_update_every == 0 || it == cfg.max_steps) {
        Waveform attacked = x;
        for (std::size_t i = 0; i < d; ++i) attacked.samples[i] += delta[i];
        // Judge success on two fresh defense draws so a perturbation cannot
        // overfit one lucky noise realization of the stochastic pipeline.
        Defense probe = defense;
        probe.smooth.seed = defense.smooth.seed ^ (0xd1b54a32d192ed03ull * (it + 1));
        window_success = wer(probe.transcribe(attacked), cfg.target) <= cfg.success_wer;
        if (window_success && defense.smooth.sigma > 0.0) {
          probe.smooth.seed = defense.smooth.seed ^ (0x94d049bb133111ebull * (it + 1));
          window_success = wer(probe.transcribe(attacked), cfg.target) <= cfg.success_wer;
        }
        if (window_success) {
          const double norm = l2_norm(delta);
          if (norm < best_norm) {
            best_norm = norm;
            res.delta.delta = delta;
            res.success = true;
          }
          lambda *= cfg.lambda_factor;   // shrink the perturbation further
          step *= cfg.step_decay;        // refine near the minimum
        } else {
          lambda /= cfg.lambda_factor;   // prioritize hitting the target
          step = std::min(cfg.step_size, step / cfg.step_decay);
        }
      }
    }
    last_delta = delta;
  }

  if (!res.success) res.delta.delta = last_delta;  // best effort
  Waveform attacked = x;
  for (std::size_t i = 0; i < d; ++i) attacked.samples[i] += res.delta.delta[i];
  const Transcript out = defense.transcribe(attacked);
  res.wer_ground_truth = wer(out, y_ground_truth);
  res.wer_target = wer(out, cfg.target);
  res.achieved_snr_db = snr_db(x, res.delta);
  return res;
}

}  // namespace asrlab
