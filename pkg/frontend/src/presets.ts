// One-click scenarios for the console.

import type { RunConfig } from './types.js';

export const PRESETS: Record<string, RunConfig> = {
  'six-arm gaussian study': {
    version: 1,
    seed: 42,
    k: 6,
    reward_kind: 'gaussian',
    prior: { kind: 'gaussian_iid', loc: 0.81, scale: 0.015, reward_scale: 0.1 },
    test: { kind: 't_control', control_arm: 0, min_effect: 0.025, family_wise: false },
    alpha: 0.05,
    beta_target: 0.2,
    w: 0.01,
    epsilons: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0],
    horizon_max: 6000,
    replications: 2000,
    grid_points: 10,
  },
  'three-arm beta(5,5)': {
    version: 1,
    seed: 42,
    k: 3,
    reward_kind: 'bernoulli',
    prior: { kind: 'beta_iid', a: 5, b: 5 },
    test: { kind: 'anova', min_effect: 0.1 },
    alpha: 0.05,
    beta_target: 0.2,
    w: 0.1,
    epsilons: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0],
    horizon_max: 4000,
    replications: 2000,
    grid_points: 10,
  },
};
