/** Typed client for the clustering session service. */

export interface GraphPoint {
  objectId: number;
  value: number;
  density: number;
}

export interface GraphPayload {
  sessionId: string;
  dimIndex: number;
  dimCount: number;
  clusterCountSoFar: number;
  points: GraphPoint[];
}

export interface StepPayload {
  dimIndex: number;
  fusionClusterSizes: number[];
  finished: boolean;
}

export interface LabelEntry {
  objectId: number;
  clusterId: number;
}

export interface ResultPayload {
  finished: boolean;
  clusterCount: number;
  labels: LabelEntry[];
}

export interface SessionInfo {
  sessionId: string;
  dimCount: number;
}

export interface UploadOptions {
  missingMarker?: string;
  header?: boolean;
  normalize?: boolean;
  enhance?: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** Hand-rolled multipart encoding: identical in browsers and node. */
function multipart(fields: Record<string, string>, csvText: string) {
  const boundary = "----sdc" + Math.random().toString(16).slice(2) + Date.now().toString(16);
  let body = "";
  for (const [name, value] of Object.entries(fields)) {
    body += `--${boundary}\r\nContent-Disposition: form-data; name="${name}"\r\n\r\n${value}\r\n`;
  }
  body +=
    `--${boundary}\r\nContent-Disposition: form-data; name="file"; filename="data.csv"\r\n` +
    `Content-Type: text/csv\r\n\r\n${csvText}\r\n--${boundary}--\r\n`;
  return { body, contentType: `multipart/form-data; boundary=${boundary}` };
}

export class SdcClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const text = await resp.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = null;
    }
    if (!resp.ok) {
      const message =
        parsed && typeof parsed === "object" && "error" in (parsed as object)
          ? String((parsed as { error: string }).error)
          : `HTTP ${resp.status}`;
      throw new ApiError(resp.status, message);
    }
    return parsed as T;
  }

  async createSession(csvText: string, options: UploadOptions = {}): Promise<SessionInfo> {
    const fields: Record<string, string> = {};
    if (options.missingMarker !== undefined) fields.missingMarker = options.missingMarker;
    if (options.header !== undefined) fields.header = String(options.header);
    if (options.normalize !== undefined) fields.normalize = String(options.normalize);
    if (options.enhance !== undefined) fields.enhance = String(options.enhance);
    const { body, contentType } = multipart(fields, csvText);
    return this.request<SessionInfo>("/sessions", {
      method: "POST",
      headers: { "Content-Type": contentType },
      body,
    });
  }

  getGraph(sessionId: string): Promise<GraphPayload> {
    return this.request<GraphPayload>(`/sessions/${sessionId}/graph`);
  }

  postThresholds(sessionId: string, dimIndex: number, boundaries: number[]): Promise<StepPayload> {
    return this.request<StepPayload>(`/sessions/${sessionId}/thresholds`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dimIndex, boundaries }),
    });
  }

  getResult(sessionId: string): Promise<ResultPayload> {
    return this.request<ResultPayload>(`/sessions/${sessionId}/result`);
  }

  abort(sessionId: string): Promise<{ aborted: boolean }> {
    return this.request<{ aborted: boolean }>(`/sessions/${sessionId}`, { method: "DELETE" });
  }
}
