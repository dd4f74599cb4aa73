// Hand-rolled SVG line charts: relative score vs extension cost (log x), and
// per-candidate Type-II error / reward curves. No chart library, no implicit
// recomputation; everything drawn comes verbatim from API payloads.

import type { CurveData, RelativeCurves } from './types.js';

const PALETTE = [
  '#4269d0', '#efb118', '#ff725c', '#6cc5b0', '#3ca951',
  '#ff8ab7', '#a463f2', '#97bbf5', '#9c6b4e', '#9498a0', '#222222',
];

export function colorFor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export interface ChartGeom {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

const DEFAULT_GEOM: ChartGeom = {
  width: 680,
  height: 340,
  margin: { top: 16, right: 16, bottom: 36, left: 56 },
};

function xScale(geom: ChartGeom, wMin: number, wMax: number) {
  const { margin, width } = geom;
  const lo = Math.log10(wMin);
  const hi = Math.log10(wMax);
  return (w: number) =>
    margin.left + ((Math.log10(w) - lo) / (hi - lo)) * (width - margin.left - margin.right);
}

function yScale(geom: ChartGeom, yMin: number, yMax: number) {
  const { margin, height } = geom;
  return (y: number) =>
    height - margin.bottom - ((y - yMin) / (yMax - yMin)) * (height - margin.top - margin.bottom);
}

function polyline(points: Array<[number, number]>, color: string, width: number, dash = ''): string {
  const attr = dash ? ` stroke-dasharray="${dash}"` : '';
  const pts = points.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(' ');
  return `<polyline fill="none" stroke="${color}" stroke-width="${width}"${attr} points="${pts}"/>`;
}

/** Candidates touching zero (the per-w optimum) at a given w index. */
export function zeroTouchingPhis(curves: RelativeCurves, wIndex: number, tol = 1e-12): number[] {
  const out: number[] = [];
  curves.phis.forEach((phi, pi) => {
    if (Math.abs(curves.relative[pi][wIndex]) <= tol) out.push(phi);
  });
  return out;
}

export function nearestWIndex(curves: RelativeCurves, w: number): number {
  let best = 0;
  let dist = Infinity;
  curves.w.forEach((wi, i) => {
    const d = Math.abs(Math.log10(wi) - Math.log10(w));
    if (d < dist) {
      dist = d;
      best = i;
    }
  });
  return best;
}

/**
 * Relative-score chart: one curve per candidate, benchmarks visually
 * distinguished (pure-exploit dashed, uniform dotted), a vertical marker at
 * the slider's w, and the zero line where the optimum lives.
 */
export function renderRelativeEcpChart(
  curves: RelativeCurves,
  markerW: number,
  geom: ChartGeom = DEFAULT_GEOM,
): string {
  const wMin = curves.w[0];
  const wMax = curves.w[curves.w.length - 1];
  let yMin = 0;
  for (const row of curves.relative) {
    for (const v of row) if (Number.isFinite(v)) yMin = Math.min(yMin, v);
  }
  yMin = Math.min(yMin, -1e-6) * 1.05;
  const sx = xScale(geom, wMin, wMax);
  const sy = yScale(geom, yMin, 0);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${geom.width} ${geom.height}" class="chart">`,
  );
  // zero line and axes
  parts.push(polyline([[geom.margin.left, sy(0)], [geom.width - geom.margin.right, sy(0)]], '#888', 1));
  for (const exp of [-4, -3, -2, -1, 0]) {
    const w = 10 ** exp;
    if (w < wMin || w > wMax) continue;
    const x = sx(w);
    parts.push(polyline([[x, geom.height - geom.margin.bottom], [x, geom.margin.top]], '#eee', 1));
    parts.push(
      `<text x="${x.toFixed(1)}" y="${geom.height - 14}" text-anchor="middle" class="tick">1e${exp}</text>`,
    );
  }
  for (const frac of [0.25, 0.5, 0.75, 1.0]) {
    const y = yMin * frac;
    parts.push(
      `<text x="${geom.margin.left - 6}" y="${(sy(y) + 4).toFixed(1)}" text-anchor="end" class="tick">${y.toFixed(2)}</text>`,
    );
  }
  // candidate curves
  curves.phis.forEach((phi, pi) => {
    const pts: Array<[number, number]> = curves.w.map((w, wi) => [sx(w), sy(curves.relative[pi][wi])]);
    const dash = phi === 0 ? '7 4' : phi === 1 ? '2 3' : '';
    parts.push(polyline(pts, colorFor(pi), phi === 0 || phi === 1 ? 2.4 : 1.6, dash));
  });
  // slider marker
  const mx = sx(Math.min(Math.max(markerW, wMin), wMax));
  parts.push(polyline([[mx, geom.height - geom.margin.bottom], [mx, geom.margin.top]], '#d33', 1.5, '4 3'));
  parts.push(`<text x="${geom.margin.left}" y="12" class="tick">relative cost-penalized reward (0 = optimal)</text>`);
  parts.push('</svg>');
  return parts.join('');
}

export function renderLegend(curves: RelativeCurves): string {
  const items = curves.phis
    .map((phi, pi) => {
      const label = phi === 0 ? 'TS (eps=0)' : phi === 1 ? 'UR (eps=1)' : `eps=${phi}`;
      return `<span class="legend-item"><span class="swatch" style="background:${colorFor(pi)}"></span>${label}</span>`;
    })
    .join('');
  return `<div class="legend">${items}</div>`;
}

/** Type-II error and mean reward curves for one candidate. */
export function renderCurveChart(
  phi: number,
  curve: CurveData,
  geom: ChartGeom = DEFAULT_GEOM,
): string {
  const { time_grid, beta_grid, mean_reward_grid } = curve;
  const tMax = time_grid[time_grid.length - 1];
  const sxLin = (t: number) =>
    geom.margin.left + (t / tMax) * (geom.width - geom.margin.left - geom.margin.right);
  const sy = yScale(geom, 0, 1);
  const betaPts: Array<[number, number]> = time_grid.map((t, i) => [sxLin(t), sy(beta_grid[i])]);
  const rPts: Array<[number, number]> = time_grid.map((t, i) => [sxLin(t), sy(mean_reward_grid[i])]);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${geom.width} ${geom.height}" class="chart">`,
    polyline([[geom.margin.left, sy(0)], [geom.width - geom.margin.right, sy(0)]], '#888', 1),
    polyline(betaPts, '#ff725c', 2),
    polyline(rPts, '#4269d0', 2),
    `<text x="${geom.margin.left}" y="12" class="tick">eps=${phi}: Type-II error (red), mean reward (blue) vs steps</text>`,
    `<text x="${geom.width - geom.margin.right}" y="${geom.height - 14}" text-anchor="end" class="tick">t=${tMax}</text>`,
    '</svg>',
  ];
  return parts.join('');
}
