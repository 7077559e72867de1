import { ApiError, Client, EvaluateRequest, EvaluateResponse, ObjectsResponse } from "./api";
import { hypothesisViews, metricRows } from "./panel";
import { EvaluateScheduler } from "./scheduler";
import { basketSize, clampLevel, decodeState, encodeState, topOneRho, ViewState } from "./state";
import { DualViewer } from "./viewer";
import "./style.css";

const MAX_RENDER_POINTS = 4096;

const client = new Client();
let meta: ObjectsResponse;
let state: ViewState;
let viewer: DualViewer;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function syncUrl(): void {
  history.replaceState(null, "", `${location.pathname}?${encodeState(state)}`);
}

function intraCount(): number {
  if (!state.objectId) return 1;
  const info = meta.objects.find((o) => o.object_id === state.objectId);
  return info ? meta.objects_per_class[info.super_class] : 1;
}

function currentRequest(): EvaluateRequest {
  return {
    object_id: state.objectId!,
    l: state.l,
    seed: state.seed,
    attacker: state.attacker,
    rho1: state.rho1 > 0 ? state.rho1 : topOneRho(meta.num_super_classes),
    rho2: state.rho2 > 0 ? state.rho2 : topOneRho(intraCount()),
    max_points: MAX_RENDER_POINTS,
  };
}

function applyResponse(resp: EvaluateResponse): void {
  el("error-banner").hidden = true;
  viewer.setRegen(resp.points);
  const metrics = el("metrics");
  metrics.replaceChildren();
  for (const row of metricRows(resp)) {
    const dt = document.createElement("dt");
    dt.textContent = row.label;
    const dd = document.createElement("dd");
    dd.textContent = row.value;
    dd.dataset.metric = row.key;
    metrics.append(dt, dd);
  }
  const lists = el("hypotheses");
  lists.replaceChildren();
  for (const view of hypothesisViews(resp)) {
    const h = document.createElement("h3");
    h.textContent = `${view.title} — likelihood ${view.likelihood}`;
    const ul = document.createElement("ul");
    for (const row of view.rows) {
      const li = document.createElement("li");
      li.textContent = `${row.label}: ${row.score}`;
      if (row.hit) li.classList.add("hit");
      ul.append(li);
    }
    lists.append(h, ul);
  }
}

function showError(err: unknown): void {
  const banner = el("error-banner");
  banner.hidden = false;
  banner.textContent =
    err instanceof ApiError ? `server: ${err.message} (${err.status})` : `request failed: ${err}`;
  // previous metrics and clouds stay on screen
}

const scheduler = new EvaluateScheduler<EvaluateRequest, EvaluateResponse>(
  (req) => client.evaluate(req),
  applyResponse,
  showError,
  150,
);

function requestEvaluate(immediate = false): void {
  if (!state.objectId) return;
  syncUrl();
  el("basket-info").textContent =
    `baskets: ${basketSize(state.rho1 > 0 ? state.rho1 : topOneRho(meta.num_super_classes), meta.num_super_classes)} of ` +
    `${meta.num_super_classes} classes, ` +
    `${basketSize(state.rho2 > 0 ? state.rho2 : topOneRho(intraCount()), intraCount())} of ${intraCount()} objects`;
  const req = currentRequest();
  if (immediate) scheduler.fire(req);
  else scheduler.schedule(req);
}

async function selectObject(objectId: string): Promise<void> {
  state.objectId = objectId;
  const original = await client.originalCloud(objectId, MAX_RENDER_POINTS);
  viewer.setOriginal(original.points);
  viewer.clearRegen();
  requestEvaluate(true);
}

function bindControls(): void {
  const slider = el<HTMLInputElement>("level-slider");
  const levelOut = el("level-value");
  const notice = el("release-notice");
  slider.value = String(state.l);
  levelOut.textContent = String(state.l);

  slider.addEventListener("input", () => {
    const { l, clamped } = clampLevel(Number(slider.value));
    notice.hidden = !(clamped && Number(slider.value) <= 0);
    if (clamped) slider.value = String(l);
    state.l = l;
    levelOut.textContent = String(l);
    requestEvaluate();
  });

  const seed = el<HTMLInputElement>("seed-input");
  seed.value = String(state.seed);
  seed.addEventListener("change", () => {
    state.seed = Math.trunc(Number(seed.value) || 0);
    requestEvaluate(true);
  });

  const attacker = el<HTMLSelectElement>("attacker-select");
  attacker.addEventListener("change", () => {
    state.attacker = attacker.value;
    requestEvaluate(true);
  });

  for (const [id, key] of [["rho1-input", "rho1"], ["rho2-input", "rho2"]] as const) {
    const input = el<HTMLInputElement>(id);
    if (state[key] > 0) input.value = String(state[key]);
    input.addEventListener("change", () => {
      const v = Number(input.value);
      if (input.value !== "" && (!Number.isFinite(v) || v <= 0 || v > 1)) {
        input.classList.add("invalid");
        return;
      }
      input.classList.remove("invalid");
      state[key] = input.value === "" ? 0 : v;
      requestEvaluate(true);
    });
  }

  const objects = el<HTMLSelectElement>("object-select");
  objects.addEventListener("change", () => void selectObject(objects.value));
}

async function init(): Promise<void> {
  state = decodeState(location.search);
  meta = await client.listObjects();
  viewer = new DualViewer(el("original-pane"), el("regen-pane"));

  const objects = el<HTMLSelectElement>("object-select");
  for (const obj of meta.objects) {
    const opt = document.createElement("option");
    opt.value = obj.object_id;
    opt.textContent = `${obj.object_id} (${obj.super_class})`;
    objects.append(opt);
  }
  const attacker = el<HTMLSelectElement>("attacker-select");
  for (const kind of meta.attackers) {
    const opt = document.createElement("option");
    opt.value = kind;
    opt.textContent = kind;
    attacker.append(opt);
  }
  if (!state.attacker || !meta.attackers.includes(state.attacker)) {
    state.attacker = meta.attackers[0];
  }
  attacker.value = state.attacker;

  bindControls();

  const target = state.objectId && meta.objects.some((o) => o.object_id === state.objectId)
    ? state.objectId
    : meta.objects[0]?.object_id;
  if (target) {
    objects.value = target;
    await selectObject(target);
  }
}

void init().catch((err) => showError(err));
