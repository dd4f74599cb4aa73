// Pure rendering of the recommendation panel and progress/banner fragments.
// Every number shown is taken verbatim from an API payload: the console never
// computes scores locally, so what you read is exactly what the service said.

import type { EcpView, JobRecord } from './types.js';

export function fmt(x: number, digits = 4): string {
  return Number.isFinite(x) ? x.toFixed(digits) : String(x);
}

export function renderPanel(view: EcpView): string {
  return [
    '<dl class="panel-grid">',
    `<dt>extension cost w</dt><dd data-field="w">${fmt(view.w, 5)}</dd>`,
    `<dt>best epsilon</dt><dd data-field="best_phi">${view.best_phi}</dd>`,
    `<dt>horizon</dt><dd data-field="horizon">${view.horizon}</dd>`,
    `<dt>mean reward</dt><dd data-field="mean_reward">${fmt(view.mean_reward)}</dd>`,
    `<dt>score</dt><dd data-field="ecp">${fmt(view.ecp)}</dd>`,
    '</dl>',
  ].join('');
}

export function renderFeasibleTable(view: EcpView): string {
  const rows = view.per_phi
    .map(
      (r) =>
        `<tr${r.phi === view.best_phi ? ' class="best"' : ''}>` +
        `<td>${r.phi}</td><td>${r.horizon}</td><td>${fmt(r.mean_reward)}</td>` +
        `<td>${fmt(r.ecp)}</td><td>${fmt(r.relative_ecp)}</td></tr>`,
    )
    .join('');
  return (
    '<table class="feasible"><thead><tr>' +
    '<th>eps</th><th>horizon</th><th>mean reward</th><th>score</th><th>relative</th>' +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderProgress(job: JobRecord): string {
  const pct = Math.round(job.progress * 100);
  return (
    `<div class="progress-outer"><div class="progress-inner" style="width:${pct}%"></div></div>` +
    `<span class="progress-label">${job.status}: ${pct}%</span>`
  );
}

export function renderBanner(message: string): string {
  return `<div class="banner">${message} <button data-action="retry">retry</button></div>`;
}
