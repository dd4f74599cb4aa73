// Client-side validation mirroring the server schema: invalid fields block
// submission with inline messages; nothing is sent until the config is clean.

import type { FieldError, RunConfig } from './types.js';

export function validateConfig(cfg: RunConfig): FieldError[] {
  const errors: FieldError[] = [];
  const push = (field: string, message: string) => errors.push({ field, message });

  if (!Number.isInteger(cfg.seed) || cfg.seed < 0) push('seed', 'seed must be a non-negative integer');
  if (!Number.isInteger(cfg.k) || cfg.k < 2) push('k', 'K must be >= 2');
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) push('alpha', 'alpha must lie in (0, 1)');
  if (!(cfg.beta_target > 0 && cfg.beta_target < 1)) push('beta_target', 'beta target must lie in (0, 1)');
  if (!(cfg.w >= 0)) push('w', 'extension cost must be >= 0');
  if (!Number.isInteger(cfg.horizon_max) || cfg.horizon_max < 2) push('horizon_max', 'horizon must be >= 2');
  if (!Number.isInteger(cfg.replications) || cfg.replications < 100) push('replications', 'need at least 100 replications');
  if (!Number.isInteger(cfg.grid_points) || cfg.grid_points < 2) push('grid_points', 'need at least 2 grid points');

  if (!cfg.epsilons.length) push('epsilons', 'candidate list must be nonempty');
  if (cfg.epsilons.some((e) => !(e >= 0 && e <= 1))) push('epsilons', 'every epsilon must lie in [0, 1]');

  const p = cfg.prior;
  if (p.kind === 'beta_iid') {
    if (!((p.a ?? 0) > 0) || !((p.b ?? 0) > 0)) push('prior', 'Beta prior needs a, b > 0');
  } else if (p.kind === 'gaussian_iid') {
    if (!((p.reward_scale ?? 0) > 0)) push('prior', 'Gaussian prior needs reward scale > 0');
  } else if (p.kind === 'fixed') {
    if (!p.means || p.means.length !== cfg.k) push('prior', 'fixed prior needs a means vector of length K');
    if (cfg.reward_kind === 'bernoulli' && p.means && p.means.some((m) => m < 0 || m > 1)) {
      push('prior', 'Bernoulli means must lie in [0, 1]');
    }
  }
  if (cfg.reward_kind === 'gaussian' && p.kind !== 'beta_iid' && !((p.reward_scale ?? 0) > 0)) {
    push('prior', 'gaussian rewards need reward_scale > 0');
  }
  if ((cfg.test.control_arm ?? 0) >= cfg.k) push('test', 'control arm out of range');
  if ((cfg.test.min_effect ?? 0) < 0) push('test', 'minimum effect must be >= 0');
  return errors;
}

export function parseEpsilonList(text: string): number[] | null {
  const parts = text.split(',').map((s) => s.trim()).filter((s) => s.length);
  const values = parts.map(Number);
  if (!values.length || values.some((v) => Number.isNaN(v))) return null;
  return values;
}

export function parseMeansList(text: string): number[] | null {
  return parseEpsilonList(text);
}
