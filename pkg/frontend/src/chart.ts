import type { Report, ReportRow } from './api.js';

const APPROACH_LETTER: Record<string, string> = { north: 'N', east: 'E', south: 'S', west: 'W' };
const TURN_LETTER: Record<string, string> = { left: 'L', through: 'T', right: 'R' };

export function rowLabel(row: ReportRow): string {
  return `${APPROACH_LETTER[row.approach] ?? '?'}${TURN_LETTER[row.turn] ?? '?'} ${row.vclass} b${row.bin_index}`;
}

export function diffTooltip(row: ReportRow): string {
  const pct = row.pct_diff === null ? 'n/a' : `${row.pct_diff.toFixed(1)}%`;
  return `Δ${row.abs_diff} (${pct})`;
}

const BAR_W = 14;
const PAIR_GAP = 6;
const GROUP_GAP = 18;
const CHART_H = 220;
const LABEL_H = 70;

// Grouped bars, one real/simulated pair per report row; numbers are taken
// verbatim from the report.
export function renderComparison(root: HTMLElement, reports: Report[]): void {
  root.innerHTML = '';
  if (reports.length === 0 || reports.every((r) => r.rows.length === 0)) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'No comparison rows to display.';
    root.appendChild(empty);
    return;
  }

  for (const report of reports) {
    const section = document.createElement('section');
    section.className = 'comparison';

    const heading = document.createElement('h3');
    heading.textContent = `Intersection ${report.intersection_id}`;
    section.appendChild(heading);

    const table = document.createElement('table');
    table.className = 'totals';
    table.innerHTML =
      '<thead><tr><th>real</th><th>simulated</th><th>total Δ</th></tr></thead>' +
      `<tbody><tr><td>${report.totals.real}</td><td>${report.totals.simulated}</td>` +
      `<td>${report.totals.abs_diff}</td></tr></tbody>`;
    section.appendChild(table);

    section.appendChild(buildSvg(report.rows));
    root.appendChild(section);
  }
}

function buildSvg(rows: ReportRow[]): SVGSVGElement {
  const ns = 'http://www.w3.org/2000/svg';
  const svg = document.createElementNS(ns, 'svg');
  const groupW = 2 * BAR_W + PAIR_GAP;
  const width = rows.length * (groupW + GROUP_GAP) + GROUP_GAP;
  const height = CHART_H + LABEL_H;
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.setAttribute('width', String(Math.min(width, 960)));
  svg.setAttribute('class', 'comparison-chart');

  const peak = Math.max(1, ...rows.map((r) => Math.max(r.real, r.simulated)));
  rows.forEach((row, i) => {
    const x0 = GROUP_GAP + i * (groupW + GROUP_GAP);
    const group = document.createElementNS(ns, 'g');
    group.setAttribute('class', 'bar-pair');
    group.setAttribute('data-label', rowLabel(row));

    const title = document.createElementNS(ns, 'title');
    title.textContent = `${rowLabel(row)}: real ${row.real} vs simulated ${row.simulated}, ${diffTooltip(row)}`;
    group.appendChild(title);

    for (const [offset, value, cls] of [
      [0, row.real, 'bar-real'],
      [BAR_W + PAIR_GAP, row.simulated, 'bar-simulated']
    ] as const) {
      const h = (value / peak) * CHART_H;
      const rect = document.createElementNS(ns, 'rect');
      rect.setAttribute('x', String(x0 + offset));
      rect.setAttribute('y', String(CHART_H - h));
      rect.setAttribute('width', String(BAR_W));
      rect.setAttribute('height', String(h));
      rect.setAttribute('class', cls);
      group.appendChild(rect);
    }

    const label = document.createElementNS(ns, 'text');
    label.setAttribute('x', String(x0 + groupW / 2));
    label.setAttribute('y', String(CHART_H + 12));
    label.setAttribute('class', 'bar-label');
    label.setAttribute('transform', `rotate(60 ${x0 + groupW / 2} ${CHART_H + 12})`);
    label.textContent = rowLabel(row);
    group.appendChild(label);

    svg.appendChild(group);
  });
  return svg;
}
