// Interactive view state; every field is URL-encodable so a view can be
// shared and reproduced exactly.

export const MIN_LEVEL = 0.01;

export interface ViewState {
  objectId: string | null;
  l: number;
  seed: number;
  attacker: string;
  rho1: number;
  rho2: number;
}

export const DEFAULT_STATE: ViewState = {
  objectId: null,
  l: 0.5,
  seed: 0,
  attacker: "J1",
  rho1: 0,
  rho2: 0, // 0 means "top-1 basket" (resolved against the label counts)
};

/** Clamp a slider position into the valid privilege range; 0 means no release. */
export function clampLevel(raw: number): { l: number; clamped: boolean } {
  if (!Number.isFinite(raw) || raw < MIN_LEVEL) return { l: MIN_LEVEL, clamped: true };
  if (raw > 1) return { l: 1, clamped: true };
  return { l: raw, clamped: false };
}

/** ceil(rho * n) basket size with the same clamping the server applies. */
export function basketSize(rho: number, nLabels: number): number {
  return Math.min(Math.max(Math.ceil(rho * nLabels), 1), nLabels);
}

/** rho value for a top-1 basket over n labels. */
export function topOneRho(nLabels: number): number {
  return 1 / nLabels;
}

export function encodeState(s: ViewState): string {
  const params = new URLSearchParams();
  if (s.objectId) params.set("object", s.objectId);
  params.set("l", String(s.l));
  params.set("seed", String(s.seed));
  params.set("attacker", s.attacker);
  if (s.rho1 > 0) params.set("rho1", String(s.rho1));
  if (s.rho2 > 0) params.set("rho2", String(s.rho2));
  return params.toString();
}

export function decodeState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const num = (key: string, fallback: number) => {
    const raw = params.get(key);
    if (raw === null) return fallback;
    const v = Number(raw);
    return Number.isFinite(v) ? v : fallback;
  };
  return {
    objectId: params.get("object"),
    l: clampLevel(num("l", DEFAULT_STATE.l)).l,
    seed: Math.trunc(num("seed", DEFAULT_STATE.seed)),
    attacker: params.get("attacker") ?? DEFAULT_STATE.attacker,
    rho1: num("rho1", 0),
    rho2: num("rho2", 0),
  };
}
