import { describe, expect, it } from 'vitest';
import { parseEpsilonList, validateConfig } from '../src/validate.js';
import type { RunConfig } from '../src/types.js';

function baseConfig(): RunConfig {
  return {
    version: 1,
    seed: 42,
    k: 2,
    reward_kind: 'bernoulli',
    prior: { kind: 'fixed', means: [0.8, 0.2] },
    test: { kind: 'two_sample_t', control_arm: 0, min_effect: 0 },
    alpha: 0.05,
    beta_target: 0.2,
    w: 0.05,
    epsilons: [0.0, 1.0],
    horizon_max: 100,
    replications: 300,
    grid_points: 5,
  };
}

describe('validateConfig', () => {
  it('accepts a valid config', () => {
    expect(validateConfig(baseConfig())).toEqual([]);
  });

  it('rejects K < 2 with an inline message', () => {
    const errors = validateConfig({ ...baseConfig(), k: 1 });
    expect(errors.some((e) => e.field === 'k' && /K must be >= 2/.test(e.message))).toBe(true);
  });

  it('rejects a missing or negative seed', () => {
    expect(validateConfig({ ...baseConfig(), seed: -1 }).some((e) => e.field === 'seed')).toBe(true);
    expect(validateConfig({ ...baseConfig(), seed: NaN }).some((e) => e.field === 'seed')).toBe(true);
  });

  it('rejects fixed means of the wrong length', () => {
    const cfg = { ...baseConfig(), k: 3 };
    expect(validateConfig(cfg).some((e) => e.field === 'prior')).toBe(true);
  });

  it('rejects epsilons outside [0, 1]', () => {
    const cfg = { ...baseConfig(), epsilons: [0.2, 1.4] };
    expect(validateConfig(cfg).some((e) => e.field === 'epsilons')).toBe(true);
  });

  it('rejects an out-of-range control arm', () => {
    const cfg = { ...baseConfig(), test: { ...baseConfig().test, control_arm: 5 } };
    expect(validateConfig(cfg).some((e) => e.field === 'test')).toBe(true);
  });

  it('requires reward scale for gaussian rewards', () => {
    const cfg: RunConfig = {
      ...baseConfig(),
      reward_kind: 'gaussian',
      prior: { kind: 'gaussian_iid', loc: 0.8, scale: 0.015, reward_scale: 0 },
    };
    expect(validateConfig(cfg).some((e) => e.field === 'prior')).toBe(true);
  });
});

describe('parseEpsilonList', () => {
  it('parses comma-separated values', () => {
    expect(parseEpsilonList('0, 0.3 ,1')).toEqual([0, 0.3, 1]);
  });
  it('returns null on junk', () => {
    expect(parseEpsilonList('0.2, nope')).toBeNull();
    expect(parseEpsilonList('')).toBeNull();
  });
});
