import type { Api, Manifest } from './api.js';
import { ApiError } from './api.js';
import { renderComparison } from './chart.js';
import {
  Store,
  addMinutes,
  intersectSpans,
  maxReachableStep,
  parseIds,
  spanMinutes,
  stepSatisfied,
  validParams,
  windowInsideSpans
} from './state.js';

export interface WizardOptions {
  pollMs?: number;
}

const STEP_TITLES = [
  'Intersection IDs',
  'Network',
  'Count data',
  'Time window',
  'Parameters (optional)',
  'Build & results'
];

const PRESET_MINUTES = [15, 30, 45, 60];

export function renderWizard(root: HTMLElement, store: Store, api: Api, options: WizardOptions = {}): void {
  const pollMs = options.pollMs ?? 500;
  let buildInFlight = false;

  const container = document.createElement('div');
  container.className = 'wizard';
  const nav = document.createElement('nav');
  nav.className = 'wizard-nav';
  const content = document.createElement('section');
  content.className = 'wizard-content';
  container.appendChild(nav);
  container.appendChild(content);
  root.appendChild(container);

  // Server-path bookkeeping for uploads: files land in a scratch scenario so
  // time-range queries and the final manifest can reference them by path.
  async function ensureHolder(): Promise<string> {
    const s = store.get();
    if (s.holderId) return s.holderId;
    const placeholder: Manifest = {
      intersection_ids: parseIds(s.idsText).length ? parseIds(s.idsText) : ['pending'],
      network: { auto_fetch: true },
      data: { auto_fetch: true },
      window: { start: '2000-01-01T00:00:00', end: '2000-01-01T01:00:00' },
      vehicle_types: {},
      step_length: 1.0
    };
    const record = await api.createScenario(placeholder);
    store.set({ holderId: record.scenario_id });
    return record.scenario_id;
  }

  function manifestFromState(): Manifest {
    const s = store.get();
    return {
      intersection_ids: parseIds(s.idsText),
      network: s.networkSource === 'auto' ? { auto_fetch: true } : { path: s.networkPath ?? '' },
      data: s.dataSource === 'auto' ? { auto_fetch: true } : { path: s.dataPath ?? '' },
      window: { start: s.windowStart ?? '', end: s.windowEnd ?? '' },
      vehicle_types: {
        car: vt('car'),
        truck: vt('truck'),
        bus: vt('bus')
      },
      step_length: s.params.stepLength
    };

    function vt(name: 'car' | 'truck' | 'bus') {
      const p = store.get().params[name];
      return { length: p.length, sigma: p.sigma, car_follow_model: p.model };
    }
  }

  async function startBuild(): Promise<void> {
    if (buildInFlight) return; // double submit absorbed
    buildInFlight = true;
    store.set({ buildStatus: 'building', diagnostics: [], artifacts: [], report: null });
    try {
      const record = await api.createScenario(manifestFromState());
      store.set({ scenarioId: record.scenario_id });
      await api.startBuild(record.scenario_id);
      let delay = pollMs;
      for (;;) {
        await sleep(delay);
        delay = Math.min(delay * 2, 8 * pollMs);
        const current = await api.getScenario(record.scenario_id);
        if (current.status === 'built' && !current.building) {
          store.set({
            buildStatus: 'built',
            artifacts: Object.keys(current.artifacts),
            diagnostics: current.diagnostics
          });
          break;
        }
        if (current.status === 'failed' && !current.building) {
          store.set({ buildStatus: 'failed', diagnostics: current.diagnostics });
          break;
        }
      }
    } catch (err) {
      store.set({ buildStatus: 'failed', diagnostics: [describe(err)] });
    } finally {
      buildInFlight = false;
    }
  }

  function sync(): void {
    const s = store.get();
    const reachable = maxReachableStep(s);

    nav.innerHTML = '';
    STEP_TITLES.forEach((title, i) => {
      const step = i + 1;
      const btn = document.createElement('button');
      btn.textContent = `${step}. ${title}`;
      btn.disabled = step > reachable;
      btn.className = step === s.step ? 'active' : '';
      btn.addEventListener('click', () => {
        if (step <= reachable) store.set({ step });
      });
      nav.appendChild(btn);
    });

    content.innerHTML = '';
    RENDERERS[s.step - 1](content);
  }

  const RENDERERS: Array<(el: HTMLElement) => void> = [
    renderIdsStep,
    renderNetworkStep,
    renderDataStep,
    renderWindowStep,
    renderParamsStep,
    renderBuildStep
  ];

  function nextButton(el: HTMLElement, step: number): void {
    const btn = document.createElement('button');
    btn.className = 'next';
    btn.textContent = 'Next';
    btn.disabled = !stepSatisfied(store.get(), step);
    btn.addEventListener('click', () => store.set({ step: step + 1 }));
    el.appendChild(btn);
  }

  function renderIdsStep(el: HTMLElement): void {
    const s = store.get();
    el.appendChild(heading('Enter centreline IDs', 'Comma-separated intersection identifiers.'))

    const input = document.createElement('input');
    input.type = 'text';
    input.id = 'ids-input';
    input.placeholder = '13463414, 13463415';
    input.value = s.idsText;
    input.addEventListener('change', () => store.set({ idsText: input.value, ranges: null }));
    el.appendChild(input);
    nextButton(el, 1);
  }

  function sourceChooser(
    el: HTMLElement,
    kind: 'network' | 'data',
    current: 'upload' | 'auto' | null,
    onChoose: (choice: 'upload' | 'auto') => void,
    onFile: (name: string, text: string) => void
  ): void {
    for (const choice of ['auto', 'upload'] as const) {
      const label = document.createElement('label');
      const radio = document.createElement('input');
      radio.type = 'radio';
      radio.name = `${kind}-source`;
      radio.value = choice;
      radio.checked = current === choice;
      radio.addEventListener('change', () => onChoose(choice));
      label.appendChild(radio);
      label.append(choice === 'auto' ? ' Auto-fetch' : ' Upload a file');
      el.appendChild(label);
    }
    if (current === 'upload') {
      const file = document.createElement('input');
      file.type = 'file';
      file.id = `${kind}-file`;
      file.addEventListener('change', async () => {
        const chosen = file.files?.[0];
        if (!chosen) return;
        onFile(chosen.name, await chosen.text());
      });
      el.appendChild(file);
    }
  }

  function renderNetworkStep(el: HTMLElement): void {
    const s = store.get();
    el.appendChild(
      heading('Simulation network', 'Upload a network XML or auto-fetch the map around the intersections.')
    );
    sourceChooser(
      el,
      'network',
      s.networkSource,
      (choice) => store.set({ networkSource: choice, networkPath: null }),
      (name, text) => {
        void uploadTo('network', name, text);
      }
    );
    if (s.networkPath) el.appendChild(note(`Stored on server: ${s.networkPath}`));
    nextButton(el, 2);
  }

  function renderDataStep(el: HTMLElement): void {
    const s = store.get();
    el.appendChild(
      heading('Turning-movement counts', 'Upload a counts CSV or auto-fetch from the open-data portal.')
    );
    sourceChooser(
      el,
      'data',
      s.dataSource,
      (choice) => store.set({ dataSource: choice, dataPath: null, ranges: null }),
      (name, text) => {
        void uploadTo('data', name, text);
      }
    );
    if (s.dataPath) el.appendChild(note(`Stored on server: ${s.dataPath}`));
    nextButton(el, 3);
  }

  async function uploadTo(kind: 'network' | 'data', _name: string, text: string): Promise<void> {
    try {
      const holder = await ensureHolder();
      const stored = await api.uploadFile(holder, kind, text);
      if (kind === 'network') store.set({ networkPath: stored.stored });
      else store.set({ dataPath: stored.stored, ranges: null });
    } catch (err) {
      store.set({ diagnostics: [describe(err)] });
    }
  }

  function renderWindowStep(el: HTMLElement): void {
    const s = store.get();
    el.appendChild(
      heading('Simulation window', 'Load the available data ranges, then pick a preset or custom window.')
    );

    const load = document.createElement('button');
    load.id = 'load-ranges';
    load.textContent = 'Load time ranges';
    load.addEventListener('click', async () => {
      try {
        const ranges = await api.timerange(parseIds(s.idsText), s.dataPath ?? undefined);
        store.set({ ranges, rangeWarning: null });
      } catch (err) {
        store.set({ ranges: {}, rangeWarning: describe(err) });
      }
    });
    el.appendChild(load);

    if (s.ranges === null) return;

    const ids = parseIds(s.idsText);
    const missing = ids.filter((id) => !(s.ranges![id] ?? []).length);
    if (missing.length) {
      el.appendChild(
        note(`No data available for: ${missing.join(', ')}. Nothing to simulate.`, 'empty-state')
      );
      return;
    }

    const list = document.createElement('ul');
    list.className = 'range-list';
    for (const id of ids) {
      for (const [start, end] of s.ranges[id]) {
        const li = document.createElement('li');
        li.textContent = `${id}: ${start} → ${end}`;
        list.appendChild(li);
      }
    }
    el.appendChild(list);

    const usable = intersectSpans(ids.map((id) => s.ranges![id]));
    if (!usable.length) {
      el.appendChild(
        note('The selected intersections have no overlapping data; pick ids with a shared window.', 'warning')
      );
      return;
    }
    if (ids.length > 1) {
      el.appendChild(note('Multiple intersections: only windows covered by every id are offered.', 'warning'));
    }

    const presets = document.createElement('div');
    presets.className = 'presets';
    for (const minutes of PRESET_MINUTES) {
      const btn = document.createElement('button');
      btn.textContent = `${minutes} min`;
      btn.className = 'preset';
      const span = usable.find((sp) => spanMinutes(sp) >= minutes);
      btn.disabled = !span;
      btn.addEventListener('click', () => {
        if (!span) return;
        store.set({ windowStart: span[0], windowEnd: addMinutes(span[0], minutes) });
      });
      presets.appendChild(btn);
    }
    el.appendChild(presets);

    const custom = document.createElement('div');
    custom.className = 'custom-window';
    const startInput = document.createElement('input');
    startInput.id = 'window-start';
    startInput.value = s.windowStart ?? usable[0][0];
    const endInput = document.createElement('input');
    endInput.id = 'window-end';
    endInput.value = s.windowEnd ?? usable[0][1];
    const apply = document.createElement('button');
    apply.id = 'apply-window';
    apply.textContent = 'Apply custom window';
    const problem = document.createElement('p');
    problem.className = 'warning';
    apply.addEventListener('click', () => {
      const start = startInput.value.trim();
      const end = endInput.value.trim();
      if (!(start < end) || !windowInsideSpans(start, end, usable)) {
        problem.textContent = 'Window must lie inside an available span.';
        return;
      }
      problem.textContent = '';
      store.set({ windowStart: start, windowEnd: end });
    });
    custom.append(startInput, endInput, apply, problem);
    el.appendChild(custom);

    if (s.windowStart && s.windowEnd) {
      el.appendChild(note(`Selected window: ${s.windowStart} → ${s.windowEnd}`));
    }
    nextButton(el, 4);
  }

  function renderParamsStep(el: HTMLElement): void {
    const s = store.get();
    el.appendChild(
      heading('Vehicle & simulation parameters', 'Defaults match the simulator; adjust if needed.')
    );
    const form = document.createElement('div');
    form.className = 'params';
    for (const name of ['car', 'truck', 'bus'] as const) {
      const row = document.createElement('fieldset');
      const legend = document.createElement('legend');
      legend.textContent = name;
      row.appendChild(legend);
      row.appendChild(numberField(`${name}-length`, 'length (m)', s.params[name].length, (v) => {
        store.set({ params: { ...store.get().params, [name]: { ...store.get().params[name], length: v } } });
      }));
      row.appendChild(numberField(`${name}-sigma`, 'sigma [0..1]', s.params[name].sigma, (v) => {
        store.set({ params: { ...store.get().params, [name]: { ...store.get().params[name], sigma: v } } });
      }));
      form.appendChild(row);
    }
    form.appendChild(
      numberField('step-length', 'step length (s)', s.params.stepLength, (v) => {
        store.set({ params: { ...store.get().params, stepLength: v } });
      })
    );
    el.appendChild(form);

    const errors = validParams(s.params);
    if (errors.length) {
      const list = document.createElement('ul');
      list.className = 'errors';
      for (const e of errors) {
        const li = document.createElement('li');
        li.textContent = e;
        list.appendChild(li);
      }
      el.appendChild(list);
    }
    nextButton(el, 5);
  }

  function renderBuildStep(el: HTMLElement): void {
    const s = store.get();
    el.appendChild(heading('Build the scenario', 'Compiles flows and writes the simulator files.'));

    const start = document.createElement('button');
    start.id = 'start-build';
    start.textContent = s.buildStatus === 'building' ? 'Building…' : 'Start simulation build';
    start.disabled = s.buildStatus === 'building';
    start.addEventListener('click', () => {
      void startBuild();
    });
    el.appendChild(start);

    if (s.buildStatus === 'failed') {
      el.appendChild(note('Build failed:', 'warning'));
      const list = document.createElement('ul');
      list.className = 'diagnostics';
      for (const d of s.diagnostics) {
        const li = document.createElement('li');
        li.textContent = d; // verbatim from the service
        list.appendChild(li);
      }
      el.appendChild(list);
    }

    if (s.buildStatus === 'built' && s.scenarioId) {
      const links = document.createElement('ul');
      links.className = 'artifact-links';
      for (const kind of ['network', 'routes', 'config']) {
        if (!s.artifacts.includes(kind)) continue;
        const li = document.createElement('li');
        const a = document.createElement('a');
        a.href = api.artifactUrl(s.scenarioId, kind);
        a.textContent = `Download ${kind}`;
        a.setAttribute('download', '');
        li.appendChild(a);
        links.appendChild(li);
      }
      el.appendChild(links);

      el.appendChild(
        note(
          'Run locally: sumo-gui -c scenario.sumocfg (the config, routes, and network ' +
            'files belong in one directory). Enable vehroute output to validate below.'
        )
      );

      const validateBox = document.createElement('div');
      validateBox.className = 'validate';
      const file = document.createElement('input');
      file.type = 'file';
      file.id = 'vehroutes-file';
      const btn = document.createElement('button');
      btn.id = 'run-validate';
      btn.textContent = 'Validate vehroute output';
      btn.addEventListener('click', async () => {
        const chosen = file.files?.[0];
        if (!chosen || !s.scenarioId) return;
        try {
          const report = await api.validate(s.scenarioId, await chosen.text());
          store.set({ report });
        } catch (err) {
          store.set({ diagnostics: [describe(err)] });
        }
      });
      validateBox.append(file, btn);
      el.appendChild(validateBox);

      const chartRoot = document.createElement('div');
      chartRoot.id = 'comparison-root';
      el.appendChild(chartRoot);
      if (s.report) renderComparison(chartRoot, s.report);
    }
  }

  store.subscribe(sync);
  sync();
}

function heading(title: string, hint: string): HTMLElement {
  const wrap = document.createElement('header');
  const h = document.createElement('h2');
  h.textContent = title;
  const p = document.createElement('p');
  p.className = 'hint';
  p.textContent = hint;
  wrap.append(h, p);
  return wrap;
}

function note(text: string, cls = 'note'): HTMLElement {
  const p = document.createElement('p');
  p.className = cls;
  p.textContent = text;
  return p;
}

function numberField(id: string, label: string, value: number, onChange: (v: number) => void): HTMLElement {
  const wrap = document.createElement('label');
  wrap.className = 'field';
  wrap.textContent = `${label} `;
  const input = document.createElement('input');
  input.type = 'number';
  input.id = id;
  input.step = 'any';
  input.value = String(value);
  input.addEventListener('change', () => onChange(Number(input.value)));
  wrap.appendChild(input);
  return wrap;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
