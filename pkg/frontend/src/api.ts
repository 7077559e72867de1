// Typed client for the workbench HTTP API. The UI never computes metrics
// itself; everything shown comes from these responses.

export interface ObjectInfo {
  object_id: string;
  super_class: string;
}

export interface ObjectsResponse {
  objects: ObjectInfo[];
  attackers: string[];
  e_max: number;
  num_super_classes: number;
  objects_per_class: Record<string, number>;
}

export interface CloudResponse {
  object_id: string;
  l: number | null;
  epoch: number | null;
  seed: number | null;
  count: number;
  points: number[][];
}

export interface LabelScore {
  label: string;
  score: number;
}

export interface EvaluateRequest {
  object_id: string;
  l: number;
  seed: number;
  attacker: string;
  rho1: number;
  rho2: number;
  max_points?: number;
}

export interface EvaluateResponse {
  object_id: string;
  super_class: string;
  l: number;
  epoch: number;
  seed: number;
  attacker: string;
  rho1: number;
  rho2: number;
  pi1: number;
  pi2: number;
  q1: number;
  q2_static: number;
  q2_dynamic: number;
  chamfer: number;
  count: number;
  points: number[][];
  super_hypothesis: LabelScore[];
  intra_hypothesis: LabelScore[];
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(private fetchImpl: FetchLike = (i, init) => fetch(i, init), private base = "") {}

  listObjects(): Promise<ObjectsResponse> {
    return this.fetchImpl(`${this.base}/objects`).then((r) => unwrap<ObjectsResponse>(r));
  }

  originalCloud(objectId: string, maxPoints?: number): Promise<CloudResponse> {
    const q = maxPoints ? `?max_points=${maxPoints}` : "";
    return this.fetchImpl(`${this.base}/object/${encodeURIComponent(objectId)}${q}`).then((r) =>
      unwrap<CloudResponse>(r),
    );
  }

  evaluate(req: EvaluateRequest): Promise<EvaluateResponse> {
    return this.fetchImpl(`${this.base}/evaluate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    }).then((r) => unwrap<EvaluateResponse>(r));
  }
}
