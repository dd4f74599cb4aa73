// Shared shapes for the design console; mirrors the service's JSON wire formats.

export interface PriorConfig {
  kind: 'beta_iid' | 'gaussian_iid' | 'fixed';
  a?: number;
  b?: number;
  loc?: number;
  scale?: number;
  reward_scale?: number;
  means?: number[] | null;
}

export interface TestConfig {
  kind: 'two_sample_t' | 't_constant' | 't_control' | 'anova' | 'tukey_best';
  sidedness?: 'one_sided_right' | 'two_sided' | null;
  baseline?: number;
  control_arm?: number;
  min_effect?: number;
  family_wise?: boolean;
}

export interface RunConfig {
  version: number;
  seed: number;
  k: number;
  reward_kind: 'bernoulli' | 'gaussian';
  prior: PriorConfig;
  test: TestConfig;
  alpha: number;
  beta_target: number;
  w: number;
  epsilons: number[];
  horizon_max: number;
  replications: number;
  grid_points: number;
}

export interface PhiResult {
  phi: number;
  feasible: boolean;
  horizon: number | null;
  mean_reward: number | null;
  ecp: number | null;
}

export interface Recommendation {
  parameter: number;
  horizon: number;
  mean_reward: number;
  ecp: number;
  policy: string;
  feasible_set: PhiResult[];
  curves: Record<string, CurveData>;
}

export interface CurveData {
  horizon: number;
  time_grid: number[];
  beta_grid: number[];
  mean_reward_grid: number[];
}

export interface RelativeCurves {
  w: number[];
  phis: number[];
  relative: number[][]; // [phi index][w index], <= 0, 0 at the per-w optimum
  best_phi: number[];
}

export interface JobRecord {
  job_id: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: number;
  config: RunConfig;
  result: { recommendation: Recommendation; relative_curves: RelativeCurves } | null;
  error: string | null;
}

export interface EcpPerPhi {
  phi: number;
  horizon: number;
  mean_reward: number;
  ecp: number;
  relative_ecp: number;
}

export interface EcpView {
  w: number;
  per_phi: EcpPerPhi[];
  best_phi: number;
  horizon: number;
  mean_reward: number;
  ecp: number;
}

export interface FieldError {
  field: string;
  message: string;
}
