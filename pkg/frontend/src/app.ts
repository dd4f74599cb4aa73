// Page wiring for the design console: form -> submit -> poll -> results view
// with the extension-cost slider driving the recommendation panel.

import { ApiClient, ApiError, rateLimit } from './api.js';
import { nearestWIndex, renderCurveChart, renderLegend, renderRelativeEcpChart } from './chart.js';
import { fmt, renderBanner, renderFeasibleTable, renderPanel, renderProgress } from './panel.js';
import { PRESETS } from './presets.js';
import type { JobRecord, RunConfig } from './types.js';
import { parseEpsilonList, parseMeansList, validateConfig } from './validate.js';

// service origin: override by setting window.BANDITDESIGN_API before load,
// e.g. when the console is reverse-proxied behind the same host
const API_BASE =
  (globalThis as { BANDITDESIGN_API?: string }).BANDITDESIGN_API ?? 'http://127.0.0.1:8710';
const api = new ApiClient(API_BASE);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): RunConfig {
  const priorKind = (el<HTMLSelectElement>('prior-kind')).value as RunConfig['prior']['kind'];
  const means = parseMeansList(el<HTMLInputElement>('prior-means').value);
  return {
    version: 1,
    seed: Number(el<HTMLInputElement>('seed').value),
    k: Number(el<HTMLInputElement>('k').value),
    reward_kind: el<HTMLSelectElement>('reward-kind').value as RunConfig['reward_kind'],
    prior: {
      kind: priorKind,
      a: Number(el<HTMLInputElement>('prior-a').value),
      b: Number(el<HTMLInputElement>('prior-b').value),
      loc: Number(el<HTMLInputElement>('prior-loc').value),
      scale: Number(el<HTMLInputElement>('prior-scale').value),
      reward_scale: Number(el<HTMLInputElement>('prior-reward-scale').value),
      means: priorKind === 'fixed' ? means : null,
    },
    test: {
      kind: el<HTMLSelectElement>('test-kind').value as RunConfig['test']['kind'],
      control_arm: Number(el<HTMLInputElement>('control-arm').value),
      baseline: Number(el<HTMLInputElement>('baseline').value),
      min_effect: Number(el<HTMLInputElement>('min-effect').value),
      family_wise: el<HTMLInputElement>('family-wise').checked,
    },
    alpha: Number(el<HTMLInputElement>('alpha').value),
    beta_target: Number(el<HTMLInputElement>('beta-target').value),
    w: Number(el<HTMLInputElement>('w-default').value),
    epsilons: parseEpsilonList(el<HTMLInputElement>('epsilons').value) ?? [],
    horizon_max: Number(el<HTMLInputElement>('horizon-max').value),
    replications: Number(el<HTMLInputElement>('replications').value),
    grid_points: Number(el<HTMLInputElement>('grid-points').value),
  };
}

function fillForm(cfg: RunConfig): void {
  el<HTMLInputElement>('seed').value = String(cfg.seed);
  el<HTMLInputElement>('k').value = String(cfg.k);
  el<HTMLSelectElement>('reward-kind').value = cfg.reward_kind;
  el<HTMLSelectElement>('prior-kind').value = cfg.prior.kind;
  el<HTMLInputElement>('prior-a').value = String(cfg.prior.a ?? 1);
  el<HTMLInputElement>('prior-b').value = String(cfg.prior.b ?? 1);
  el<HTMLInputElement>('prior-loc').value = String(cfg.prior.loc ?? 0);
  el<HTMLInputElement>('prior-scale').value = String(cfg.prior.scale ?? 1);
  el<HTMLInputElement>('prior-reward-scale').value = String(cfg.prior.reward_scale ?? 0);
  el<HTMLInputElement>('prior-means').value = (cfg.prior.means ?? []).join(', ');
  el<HTMLSelectElement>('test-kind').value = cfg.test.kind;
  el<HTMLInputElement>('control-arm').value = String(cfg.test.control_arm ?? 0);
  el<HTMLInputElement>('baseline').value = String(cfg.test.baseline ?? 0.5);
  el<HTMLInputElement>('min-effect').value = String(cfg.test.min_effect ?? 0);
  el<HTMLInputElement>('family-wise').checked = cfg.test.family_wise ?? true;
  el<HTMLInputElement>('alpha').value = String(cfg.alpha);
  el<HTMLInputElement>('beta-target').value = String(cfg.beta_target);
  el<HTMLInputElement>('w-default').value = String(cfg.w);
  el<HTMLInputElement>('epsilons').value = cfg.epsilons.join(', ');
  el<HTMLInputElement>('horizon-max').value = String(cfg.horizon_max);
  el<HTMLInputElement>('replications').value = String(cfg.replications);
  el<HTMLInputElement>('grid-points').value = String(cfg.grid_points);
}

function showErrors(errors: Array<{ field: string; message: string }>): void {
  el('form-errors').innerHTML = errors
    .map((e) => `<div class="field-error">${e.field}: ${e.message}</div>`)
    .join('');
}

let currentJob: JobRecord | null = null;

async function refreshPanel(w: number): Promise<void> {
  if (!currentJob) return;
  try {
    const view = await api.getEcp(currentJob.job_id, w);
    if (view === null) return; // stale response discarded
    el('panel').innerHTML = renderPanel(view);
    el('feasible').innerHTML = renderFeasibleTable(view);
    if (currentJob.result) {
      el('chart').innerHTML =
        renderRelativeEcpChart(currentJob.result.relative_curves, w) +
        renderLegend(currentJob.result.relative_curves);
    }
    el('banner-slot').innerHTML = '';
  } catch (err) {
    el('banner-slot').innerHTML = renderBanner(
      err instanceof ApiError ? `score fetch failed: ${err.message}` : 'service unreachable',
    );
  }
}

// slider moves trigger at most 10 endpoint calls per second
const limitedRefresh = rateLimit((w: number) => void refreshPanel(w), 100);

function sliderW(): number {
  // slider is linear in log10(w) over [1e-4, 1]
  const raw = Number(el<HTMLInputElement>('w-slider').value);
  return 10 ** (-4 + 4 * (raw / 1000));
}

function renderResults(job: JobRecord): void {
  currentJob = job;
  if (!job.result) return;
  const w = sliderW();
  el('chart').innerHTML =
    renderRelativeEcpChart(job.result.relative_curves, w) + renderLegend(job.result.relative_curves);
  const curvesHtml = Object.entries(job.result.recommendation.curves)
    .map(([phi, curve]) => renderCurveChart(Number(phi), curve))
    .join('');
  el('curves').innerHTML = curvesHtml;
  el('results').classList.remove('hidden');
  void refreshPanel(w);
}

async function submit(): Promise<void> {
  const cfg = readForm();
  const errors = validateConfig(cfg);
  showErrors(errors);
  if (errors.length) return; // invalid fields block submission, nothing sent
  el('progress').innerHTML = 'submitting…';
  try {
    const { job_id } = await api.submitJob(cfg);
    const done = await api.pollJob(job_id, (job) => {
      el('progress').innerHTML = renderProgress(job);
    });
    if (done.status === 'failed') {
      el('banner-slot').innerHTML = renderBanner(`job failed: ${done.error ?? 'unknown error'}`);
      return;
    }
    renderResults(done);
  } catch (err) {
    if (err instanceof ApiError && err.fieldErrors.length) {
      showErrors(err.fieldErrors);
    } else {
      el('banner-slot').innerHTML = renderBanner(
        err instanceof ApiError ? err.message : 'service unreachable',
      );
    }
  }
}

export function init(): void {
  const presetSelect = el<HTMLSelectElement>('preset');
  for (const name of Object.keys(PRESETS)) {
    const opt = document.createElement('option');
    opt.value = name;
    opt.textContent = name;
    presetSelect.appendChild(opt);
  }
  presetSelect.addEventListener('change', () => {
    const preset = PRESETS[presetSelect.value];
    if (preset) fillForm(preset);
  });
  fillForm(PRESETS['six-arm gaussian study']);

  el<HTMLButtonElement>('submit').addEventListener('click', () => void submit());
  const slider = el<HTMLInputElement>('w-slider');
  slider.addEventListener('input', () => {
    const w = sliderW();
    el('w-readout').textContent = fmt(w, 5);
    limitedRefresh(w);
  });
  document.addEventListener('click', (ev) => {
    const target = ev.target as HTMLElement;
    if (target.dataset.action === 'retry') {
      el('banner-slot').innerHTML = '';
      void refreshPanel(sliderW());
    }
  });
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  init();
}
