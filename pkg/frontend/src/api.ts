export type SpanMap = Record<string, [string, string][]>;

export interface ScenarioRecord {
  scenario_id: string;
  status: 'draft' | 'built' | 'failed';
  artifacts: Record<string, string>;
  diagnostics: string[];
  building?: boolean;
}

export interface ReportRow {
  bin_index: number;
  approach: string;
  turn: string;
  vclass: string;
  real: number;
  simulated: number;
  abs_diff: number;
  pct_diff: number | null;
}

export interface Report {
  intersection_id: string;
  totals: { real: number; simulated: number; abs_diff: number };
  rows: ReportRow[];
}

export interface Manifest {
  intersection_ids: string[];
  network: { path?: string; auto_fetch?: boolean };
  data: { path?: string; auto_fetch?: boolean };
  window: { start: string; end: string };
  vehicle_types: Record<string, { length: number; sigma: number; car_follow_model: string }>;
  step_length: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(path, init);
  if (!res.ok) {
    let detail = `HTTP ${res.status}`;
    try {
      const body = await res.json();
      detail = body.error ?? body.detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export const api = {
  timerange(ids: string[], dataPath?: string): Promise<SpanMap> {
    const params = new URLSearchParams({ ids: ids.join(',') });
    if (dataPath) params.set('data', dataPath);
    return request(`/intersections/timerange?${params}`);
  },

  createScenario(manifest: Manifest): Promise<ScenarioRecord> {
    return request('/scenarios', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(manifest)
    });
  },

  getScenario(id: string): Promise<ScenarioRecord> {
    return request(`/scenarios/${id}`);
  },

  async startBuild(id: string): Promise<void> {
    try {
      await request(`/scenarios/${id}/build`, { method: 'POST' });
    } catch (err) {
      // A concurrent build is fine: keep polling the one in flight.
      if (!(err instanceof ApiError && err.status === 409)) throw err;
    }
  },

  uploadFile(id: string, kind: 'network' | 'data', content: string): Promise<{ stored: string }> {
    return request(`/scenarios/${id}/files/${kind}`, {
      method: 'POST',
      headers: { 'content-type': 'application/octet-stream' },
      body: content
    });
  },

  validate(id: string, vehroutesXml: string): Promise<Report[]> {
    return request(`/scenarios/${id}/validate`, {
      method: 'POST',
      headers: { 'content-type': 'application/xml' },
      body: vehroutesXml
    });
  },

  artifactUrl(id: string, kind: string): string {
    return `/scenarios/${id}/artifacts/${kind}`;
  }
};

export type Api = typeof api;
