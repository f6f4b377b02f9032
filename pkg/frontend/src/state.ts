import type { Report, SpanMap } from './api.js';

export interface VTypeForm {
  length: number;
  sigma: number;
  model: string;
}

export interface WizardState {
  step: number; // 1..6
  idsText: string;
  networkSource: 'upload' | 'auto' | null;
  networkPath: string | null; // server-side path once uploaded
  dataSource: 'upload' | 'auto' | null;
  dataPath: string | null;
  holderId: string | null; // scratch scenario that stores uploads
  ranges: SpanMap | null;
  rangeWarning: string | null;
  windowStart: string | null;
  windowEnd: string | null;
  params: { car: VTypeForm; truck: VTypeForm; bus: VTypeForm; stepLength: number };
  scenarioId: string | null;
  buildStatus: 'idle' | 'building' | 'built' | 'failed';
  artifacts: string[];
  diagnostics: string[];
  report: Report[] | null;
}

export const initialState: WizardState = {
  step: 1,
  idsText: '',
  networkSource: null,
  networkPath: null,
  dataSource: null,
  dataPath: null,
  holderId: null,
  ranges: null,
  rangeWarning: null,
  windowStart: null,
  windowEnd: null,
  params: {
    car: { length: 5.0, sigma: 0.5, model: 'Krauss' },
    truck: { length: 7.1, sigma: 0.5, model: 'Krauss' },
    bus: { length: 12.0, sigma: 0.5, model: 'Krauss' },
    stepLength: 1.0
  },
  scenarioId: null,
  buildStatus: 'idle',
  artifacts: [],
  diagnostics: [],
  report: null
};

const STORAGE_KEY = 'tmc2sumo-wizard';

export class Store {
  private state: WizardState;
  private listeners: Array<(s: WizardState) => void> = [];

  constructor(private storage?: Storage) {
    this.state = { ...initialState, ...this.restore() };
  }

  private restore(): Partial<WizardState> {
    if (!this.storage) return {};
    try {
      const raw = this.storage.getItem(STORAGE_KEY);
      if (!raw) return {};
      const saved = JSON.parse(raw) as WizardState;
      // A build that was mid-flight when the page unloaded cannot resume.
      if (saved.buildStatus === 'building') saved.buildStatus = 'idle';
      return saved;
    } catch {
      return {};
    }
  }

  get(): WizardState {
    return this.state;
  }

  set(partial: Partial<WizardState>): void {
    this.state = { ...this.state, ...partial };
    this.storage?.setItem(STORAGE_KEY, JSON.stringify(this.state));
    for (const fn of this.listeners) fn(this.state);
  }

  subscribe(fn: (s: WizardState) => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }
}

export function parseIds(text: string): string[] {
  return text
    .split(',')
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

export function validParams(p: WizardState['params']): string[] {
  const errors: string[] = [];
  for (const name of ['car', 'truck', 'bus'] as const) {
    const vt = p[name];
    if (!(vt.length > 0)) errors.push(`${name}: length must be positive`);
    if (!(vt.sigma >= 0 && vt.sigma <= 1)) errors.push(`${name}: sigma must be within [0, 1]`);
  }
  if (!(p.stepLength > 0)) errors.push('step length must be positive');
  return errors;
}

// Step N is reachable only when every earlier step is satisfied.
export function stepSatisfied(s: WizardState, step: number): boolean {
  switch (step) {
    case 1:
      return parseIds(s.idsText).length > 0;
    case 2:
      return s.networkSource === 'auto' || (s.networkSource === 'upload' && !!s.networkPath);
    case 3:
      return s.dataSource === 'auto' || (s.dataSource === 'upload' && !!s.dataPath);
    case 4:
      return !!s.windowStart && !!s.windowEnd;
    case 5:
      return validParams(s.params).length === 0;
    case 6:
      return s.buildStatus === 'built';
    default:
      return false;
  }
}

export function maxReachableStep(s: WizardState): number {
  let step = 1;
  while (step < 6 && stepSatisfied(s, step)) step += 1;
  return step;
}

// Windows usable by every selected intersection: the intersection of each
// id's availability spans. ISO timestamps compare lexicographically.
export function intersectSpans(perId: [string, string][][]): [string, string][] {
  if (perId.length === 0) return [];
  let current = [...perId[0]];
  for (const spans of perId.slice(1)) {
    const next: [string, string][] = [];
    for (const [s1, e1] of current) {
      for (const [s2, e2] of spans) {
        const start = s1 > s2 ? s1 : s2;
        const end = e1 < e2 ? e1 : e2;
        if (start < end) next.push([start, end]);
      }
    }
    current = next;
  }
  return current.sort();
}

export function spanMinutes(span: [string, string]): number {
  return (Date.parse(span[1]) - Date.parse(span[0])) / 60000;
}

export function addMinutes(iso: string, minutes: number): string {
  const d = new Date(Date.parse(iso) + minutes * 60000);
  // Keep the naive local-civil-time format the service expects.
  const pad = (n: number) => String(n).padStart(2, '0');
  return (
    `${d.getFullYear()}-${pad(d.getMonth() + 1)}-${pad(d.getDate())}` +
    `T${pad(d.getHours())}:${pad(d.getMinutes())}:${pad(d.getSeconds())}`
  );
}

export function windowInsideSpans(start: string, end: string, spans: [string, string][]): boolean {
  return spans.some(([s, e]) => start >= s && end <= e);
}
