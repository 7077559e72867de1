"""End-to-end experiment orchestration.

A run: build or load a corpus, fit RANSAC planes on the originals, regenerate
test clouds over the privilege grid, train each attacker on its reference set,
score every test cloud, sweep the hypothesis-basket ratios, compute privacy
and utility records plus baselines, aggregate, and integrate the
privacy-utility tradeoff curves. Every stage draws from seeds derived off the
config's root seed, so identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .attacker import (
    AttackerModel,
    AttackerProfile,
    ReferenceSet,
    ScoreDistribution,
    basket_size,
    build_reference_set,
    fit_attacker,
    hypothesize_topn,
    save_score_table,
)
from .config import ExperimentConfig
from .corpus import Corpus, generate_synthetic_corpus, ingest_directory, load_corpus, write_corpus
from .errors import WorkbenchError
from .geometry import PointCloud, chamfer, save_xyz
from .planes import NoHorizontalPlane, PlaneErrorComponents, PlanePatch, plane_error_components, ransac_horizontal_plane
from .privacy import BaselineResult, PrivacyRecord, baseline_privacy, evaluate_privacy, pi1, pi2
from .regen import (
    PrivilegeLevel,
    RegenSpec,
    SurrogateRegenerator,
    load_external_regenerations,
    mix_seed,
    privilege_to_epoch,
)
from .utility import MinMaxStats, UtilityRecord, auc_privacy_utility, fit_minmax, q1_bbox, q2

PRIVACY_COLUMNS = ("query_id", "super", "intra", "l", "epoch", "rho1", "rho2",
                   "pi1", "pi2", "top1_super_hit", "top1_intra_hit")
UTILITY_COLUMNS = ("query_id", "l", "epoch", "q1", "q2_static", "q2_dynamic", "chamfer")


class StageFailure(WorkbenchError):
    """Wraps any error raised inside a pipeline stage with the stage's name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class TestSample:
    query_id: str
    super_class: str
    intra_class: str
    level: float
    epoch: int
    replicate: int
    seed: int
    cloud: PointCloud


@dataclass
class RunState:
    """Everything needed to evaluate a single query; also the service's state."""

    config: ExperimentConfig
    corpus: Corpus
    regenerator: object
    models: dict[str, AttackerModel] = field(default_factory=dict)
    original_patches: dict[str, PlanePatch | None] = field(default_factory=dict)
    minmax: MinMaxStats | None = None


@dataclass
class RunResult:
    output_dir: Path
    state: RunState
    samples: list[TestSample]
    utility_records: list[UtilityRecord]
    privacy_records: dict[str, list[PrivacyRecord]]
    baselines: list[BaselineResult]
    auc_table: dict[str, dict[str, float]]
    elapsed: float = 0.0


def build_regenerator(config: ExperimentConfig):
    if config.external_manifest:
        return load_external_regenerations(config.external_manifest)
    return SurrogateRegenerator(e_max=config.e_max, count=config.effective_regen_count)


def build_corpus(config: ExperimentConfig) -> Corpus:
    spec = config.corpus
    if spec.source == "synthetic":
        return generate_synthetic_corpus(
            num_classes=spec.num_classes,
            objects_per_class=spec.objects_per_class,
            points_per_cloud=spec.points_per_cloud,
            seed=config.seed,
            families=spec.families,
        )
    path = Path(spec.path)
    if path.is_dir():
        return ingest_directory(path)
    return load_corpus(path)


def fit_original_planes(state: RunState) -> None:
    """RANSAC each original once; objects without a horizontal plane are recorded as None."""
    for obj in state.corpus:
        seed = mix_seed(state.config.seed, "ransac-original", obj.intra_class)
        try:
            patch = ransac_horizontal_plane(obj.cloud, state.config.ransac, seed=seed)
        except NoHorizontalPlane:
            patch = None
        state.original_patches[obj.intra_class] = patch


def resolve_levels(config: ExperimentConfig) -> list[tuple[float, int]]:
    """(level, epoch) pairs the run evaluates: the privilege grid, or every even epoch."""
    if config.privilege_grid is not None:
        return [(l, privilege_to_epoch(l, config.e_max)) for l in config.privilege_grid]
    return [(epoch / config.e_max, epoch) for epoch in range(2, config.e_max + 1, 2)]


def build_test_set(corpus: Corpus, regenerator, config: ExperimentConfig,
                   levels: list[tuple[float, int]] | None = None) -> list[TestSample]:
    """Regenerate every object at every test level, ``test_replicates`` times.

    Test seeds are derived under a tag disjoint from the reference-set tag, so
    the attacker never trains on a test regeneration.
    """
    if levels is None:
        levels = resolve_levels(config)
    samples = []
    for li, (level, epoch) in enumerate(levels):
        for obj in corpus:
            for rep in range(config.test_replicates):
                seed = mix_seed(config.seed, "test", obj.intra_class, epoch, rep)
                spec = RegenSpec(level=PrivilegeLevel(level), epoch=epoch, seed=seed)
                cloud = regenerator.regenerate(obj.intra_class, obj.cloud, spec)
                samples.append(TestSample(
                    query_id=f"{obj.intra_class}_l{li:02d}_e{epoch:04d}_r{rep}",
                    super_class=obj.super_class,
                    intra_class=obj.intra_class,
                    level=level,
                    epoch=epoch,
                    replicate=rep,
                    seed=seed,
                    cloud=cloud,
                ))
    return samples


def write_test_set(samples: list[TestSample], out_dir: Path) -> Path:
    """Persist the test regenerations with their labeled manifest.

    The manifest rows let an external scorer consume exactly the clouds the
    run evaluated; imported score tables key on the same query_id.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.jsonl"
    with manifest.open("w") as fh:
        for s in samples:
            rel = f"{s.query_id}.xyz"
            save_xyz(out_dir / rel, s.cloud)
            fh.write(json.dumps({
                "cloud_path": rel,
                "super_class": s.super_class,
                "intra_class": s.intra_class,
                "source": "regenerated",
                "epoch": s.epoch,
                "l": s.level,
                "seed": s.seed,
                "query_id": s.query_id,
            }) + "\n")
    return manifest


def aggregate(rows: list[dict], group_keys: list[str]) -> pd.DataFrame:
    """Mean, standard deviation and count of every numeric column per group.

    Population standard deviation, so a singleton group reports 0.
    """
    if not rows:
        raise ValueError("nothing to aggregate")
    df = pd.DataFrame(rows)
    metrics = [c for c in df.columns if c not in group_keys and pd.api.types.is_numeric_dtype(df[c])]
    agg = {}
    for m in metrics:
        agg[f"{m}_mean"] = (m, "mean")
        agg[f"{m}_sd"] = (m, lambda x: float(np.std(x)))
    return df.groupby(group_keys, sort=True).agg(n=(metrics[0], "size"), **agg).reset_index()


def compute_utility(state: RunState, samples: list[TestSample]):
    """First pass: raw utility ingredients per sample; then min-max fit; then Q2.

    Samples whose regeneration exposes no horizontal plane (or whose original
    has none) get zero anchoring utility and are excluded from the min-max
    population.
    """
    raw: list[tuple[TestSample, float, float, PlaneErrorComponents | None]] = []
    for s in samples:
        original = state.corpus.by_id(s.intra_class)
        q1 = q1_bbox(original.cloud, s.cloud)
        cd = chamfer(original.cloud, s.cloud)
        orig_patch = state.original_patches[s.intra_class]
        components = None
        if orig_patch is not None:
            try:
                regen_patch = ransac_horizontal_plane(
                    s.cloud, state.config.ransac,
                    seed=mix_seed(state.config.seed, "ransac-regen", s.query_id),
                )
                components = plane_error_components(orig_patch, regen_patch)
            except NoHorizontalPlane:
                components = None
        raw.append((s, q1, cd, components))

    population = [c for _, _, _, c in raw if c is not None]
    stats = fit_minmax(population) if population else None

    records, comp_rows = [], []
    for s, q1, cd, components in raw:
        if components is not None and stats is not None:
            q2s, q2d = q2(components, stats)
        else:
            q2s, q2d = 0.0, 0.0
        records.append(UtilityRecord(
            query_id=s.query_id, level=s.level, epoch=s.epoch,
            q1=q1, q2_static=q2s, q2_dynamic=q2d, chamfer=cd,
        ))
        row = {"query_id": s.query_id, "l": s.level, "epoch": s.epoch,
               "plane_ok": components is not None}
        row.update(components.as_dict() if components is not None
                   else {"angle": "", "offset": "", "area": "", "cd": ""})
        comp_rows.append(row)
    return records, stats, comp_rows


def score_tables(model: AttackerModel, samples: list[TestSample]):
    """One classifier pass per test cloud; both metrics and all rho sweeps reuse it."""
    sigma1: dict[str, ScoreDistribution] = {}
    sigma2: dict[str, ScoreDistribution] = {}
    for s in samples:
        sigma1[s.query_id] = model.sigma1(s.cloud)
        sigma2[s.query_id] = model.sigma2(s.cloud, s.super_class)
    return sigma1, sigma2


def privacy_sweep(samples: list[TestSample], sigma1, sigma2,
                  rho1_grid, rho2_grid) -> list[PrivacyRecord]:
    records = []
    for s in samples:
        for rho1 in rho1_grid:
            for rho2 in rho2_grid:
                records.append(evaluate_privacy(
                    query_id=s.query_id, true_super=s.super_class, true_intra=s.intra_class,
                    sigma1=sigma1[s.query_id], sigma2_true=sigma2[s.query_id],
                    rho1=rho1, rho2=rho2, level=s.level, epoch=s.epoch,
                ))
    return records


def tradeoff_auc_table(samples, sigma1, sigma2, utility_records) -> dict[str, dict[str, float]]:
    """AUC of each privacy metric against each utility axis, at top-1 hypotheses.

    Curve points are per-privilege-level means; the Chamfer axis is mapped into
    [0, 1] by dividing by its largest per-level mean.
    """
    util_by_id = {u.query_id: u for u in utility_records}
    per_level: dict[float, dict[str, list[float]]] = {}
    for s in samples:
        n1 = basket_size(1.0 / len(sigma1[s.query_id]), len(sigma1[s.query_id]))
        n2 = basket_size(1.0 / len(sigma2[s.query_id]), len(sigma2[s.query_id]))
        h1 = hypothesize_topn(sigma1[s.query_id], n1)
        h2 = hypothesize_topn(sigma2[s.query_id], n2)
        u = util_by_id[s.query_id]
        bucket = per_level.setdefault(s.level, {k: [] for k in
                                                ("pi1", "pi2", "q1", "q2_static", "q2_dynamic", "chamfer")})
        bucket["pi1"].append(pi1(s.super_class, h1))
        bucket["pi2"].append(pi2(s.super_class, s.intra_class, sigma1[s.query_id], h2, sigma2[s.query_id]))
        bucket["q1"].append(u.q1)
        bucket["q2_static"].append(u.q2_static)
        bucket["q2_dynamic"].append(u.q2_dynamic)
        bucket["chamfer"].append(u.chamfer)

    levels = sorted(per_level)
    means = {key: [float(np.mean(per_level[l][key])) for l in levels]
             for key in ("pi1", "pi2", "q1", "q2_static", "q2_dynamic", "chamfer")}
    max_cd = max(means["chamfer"])
    cd_axis = [c / max_cd for c in means["chamfer"]] if max_cd > 0 else means["chamfer"]

    axes = {"q1": means["q1"], "q2_static": means["q2_static"],
            "q2_dynamic": means["q2_dynamic"], "chamfer": cd_axis}
    table: dict[str, dict[str, float]] = {}
    for pi_key in ("pi1", "pi2"):
        table[pi_key] = {}
        for axis_key, axis in axes.items():
            table[pi_key][axis_key] = auc_privacy_utility(list(zip(axis, means[pi_key])))
    return table


# ---------------------------------------------------------------------------
# CSV / JSON writers. Floats are written with repr so reruns are byte-identical.

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_privacy_csv(path: Path, records: list[PrivacyRecord]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PRIVACY_COLUMNS)
        for r in records:
            w.writerow([_fmt(v) for v in (r.query_id, r.super_class, r.intra_class, r.level,
                                          r.epoch, r.rho1, r.rho2, r.pi1, r.pi2,
                                          r.top1_super_hit, r.top1_intra_hit)])


def write_utility_csv(path: Path, records: list[UtilityRecord]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(UTILITY_COLUMNS)
        for r in records:
            w.writerow([_fmt(v) for v in (r.query_id, r.level, r.epoch, r.q1,
                                          r.q2_static, r.q2_dynamic, r.chamfer)])


def _write_components_csv(path: Path, rows: list[dict]) -> None:
    cols = ("query_id", "l", "epoch", "plane_ok", "angle", "offset", "area", "cd")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(row[c]) if row[c] != "" else "" for c in cols])


def _with_overall(rows: list[dict], keys_grouped: list[str], keys_overall: list[str]) -> pd.DataFrame:
    per_group = aggregate(rows, keys_grouped)
    overall = aggregate(rows, keys_overall)
    overall.insert(0, "super", "__all__")
    return pd.concat([per_group, overall], ignore_index=True)


def _aggregate_privacy(records: list[PrivacyRecord]) -> pd.DataFrame:
    rows = [{
        "super": r.super_class, "l": r.level, "rho1": r.rho1, "rho2": r.rho2,
        "pi1": r.pi1, "pi2": r.pi2,
        "super_acc": float(r.top1_super_hit), "intra_acc": float(r.top1_intra_hit),
    } for r in records]
    return _with_overall(rows, ["super", "l", "rho1", "rho2"], ["l", "rho1", "rho2"])


def _aggregate_utility(records: list[UtilityRecord], samples: list[TestSample]) -> pd.DataFrame:
    supers = {s.query_id: s.super_class for s in samples}
    rows = [{
        "super": supers[r.query_id], "l": r.level,
        "q1": r.q1, "q2_static": r.q2_static, "q2_dynamic": r.q2_dynamic, "chamfer": r.chamfer,
    } for r in records]
    return _with_overall(rows, ["super", "l"], ["l"])


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Execute the full pipeline; any stage error aborts, naming the stage."""
    import time

    started = time.perf_counter()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StageFailure:
            raise
        except Exception as e:
            raise StageFailure(name, e) from e

    corpus = stage("corpus", build_corpus, config)
    regenerator = stage("regenerator", build_regenerator, config)
    state = RunState(config=config, corpus=corpus, regenerator=regenerator)
    stage("corpus-write", write_corpus, corpus, out / "corpus")
    stage("original-planes", fit_original_planes, state)

    samples = stage("test-set", build_test_set, corpus, regenerator, config)
    stage("test-set-write", write_test_set, samples, out / "test_set")

    utility_records, minmax, comp_rows = stage("utility", compute_utility, state, samples)
    state.minmax = minmax
    stage("utility-write", write_utility_csv, out / "utility.csv", utility_records)
    stage("utility-write", _write_components_csv, out / "plane_components.csv", comp_rows)
    if minmax is not None:
        minmax.to_json(out / "minmax.json")

    label_space = corpus.label_space()
    rho1_grid = config.resolved_rho1(len(label_space.super_classes))
    privacy_records: dict[str, list[PrivacyRecord]] = {}
    auc_inputs = None

    for kind in config.attackers:
        profile = AttackerProfile(kind)

        def build_and_fit() -> tuple[ReferenceSet, AttackerModel]:
            ref = build_reference_set(
                profile, corpus.rows(), regenerator,
                count_per_object=config.count_per_object,
                seed=mix_seed(config.seed, "train"),
                e_max=config.e_max,
                noise_sigma=config.j1_noise_sigma,
                bins=config.descriptor.bins, max_dist=config.descriptor.max_dist,
            )
            return ref, fit_attacker(ref, label_space, tau=config.descriptor.tau)

        ref, model = stage(f"attacker-{kind}", build_and_fit)
        state.models[kind] = model
        adir = out / "attackers" / kind
        adir.mkdir(parents=True, exist_ok=True)
        model.save(adir)
        with (adir / "reference.jsonl").open("w") as fh:
            for row in ref.manifest_rows():
                fh.write(json.dumps(row) + "\n")

        sigma1, sigma2 = stage(f"score-{kind}", score_tables, model, samples)
        save_score_table(adir / "scores_sigma1.json", sigma1)
        save_score_table(adir / "scores_sigma2.json", sigma2)

        rho2_grid = config.resolved_rho2(min(len(v) for v in label_space.intra_classes.values()))
        records = stage(f"privacy-{kind}", privacy_sweep, samples, sigma1, sigma2, rho1_grid, rho2_grid)
        privacy_records[kind] = records
        write_privacy_csv(adir / "privacy.csv", records)
        _aggregate_privacy(records).to_csv(adir / "summary_privacy.csv", index=False)

        if kind == config.auc_attacker:
            auc_inputs = (sigma1, sigma2)

    baselines: list[BaselineResult] = []
    if "J1" in state.models:
        def run_baselines():
            rows = corpus.rows()
            rho2_grid = config.resolved_rho2(min(len(v) for v in label_space.intra_classes.values()))
            return [baseline_privacy(state.models["J1"], rows, r1, r2)
                    for r1 in rho1_grid for r2 in rho2_grid]

        baselines = stage("baseline", run_baselines)
        with (out / "baseline.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("rho1", "rho2", "pi1_mean", "pi2_mean",
                        "top1_super_accuracy", "top1_intra_accuracy", "n"))
            for b in baselines:
                w.writerow([_fmt(v) for v in (b.rho1, b.rho2, b.pi1_mean, b.pi2_mean,
                                              b.top1_super_accuracy, b.top1_intra_accuracy, b.count)])
        top1 = baselines[0]
        (out / "baseline.json").write_text(json.dumps({
            "rho1": top1.rho1, "rho2": top1.rho2,
            "pi1_baseline": top1.pi1_mean, "pi2_baseline": top1.pi2_mean,
            "top1_super_accuracy": top1.top1_super_accuracy,
            "top1_intra_accuracy": top1.top1_intra_accuracy,
        }, sort_keys=True))

    auc_table: dict[str, dict[str, float]] = {}
    if auc_inputs is not None:
        auc_table = stage("auc", tradeoff_auc_table, samples, auc_inputs[0], auc_inputs[1], utility_records)
        (out / "auc.json").write_text(json.dumps(auc_table, indent=2, sort_keys=True))
        with (out / "auc.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("privacy_metric", "utility_metric", "auc"))
            for pi_key in sorted(auc_table):
                for axis in sorted(auc_table[pi_key]):
                    w.writerow((pi_key, axis, _fmt(auc_table[pi_key][axis])))

    stage("aggregate", lambda: _aggregate_utility(utility_records, samples)
          .to_csv(out / "summary_utility.csv", index=False))

    config.with_output_dir(str(out)).write_json(out / "config_resolved.json")

    return RunResult(
        output_dir=out,
        state=state,
        samples=samples,
        utility_records=utility_records,
        privacy_records=privacy_records,
        baselines=baselines,
        auc_table=auc_table,
        elapsed=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Single-query evaluation shared by the batch CLI and the HTTP service.


class ObjectNotFound(WorkbenchError):
    pass


class AttackerNotTrained(WorkbenchError):
    pass


class InvalidParameter(WorkbenchError):
    pass


def load_run_state(results_dir: str | Path) -> RunState:
    """Reload a finished run so single queries reproduce its numbers exactly."""
    results_dir = Path(results_dir)
    config = ExperimentConfig.from_json(results_dir / "config_resolved.json")
    corpus = load_corpus(results_dir / "corpus" / "manifest.jsonl")
    state = RunState(config=config, corpus=corpus, regenerator=build_regenerator(config))
    fit_original_planes(state)
    attackers_dir = results_dir / "attackers"
    if attackers_dir.is_dir():
        for adir in sorted(attackers_dir.iterdir()):
            if (adir / "classifiers.json").exists():
                state.models[adir.name] = AttackerModel.load(adir)
    minmax_path = results_dir / "minmax.json"
    if minmax_path.exists():
        state.minmax = MinMaxStats.from_json(minmax_path)
    return state


def evaluate_one(state: RunState, object_id: str, level: float, seed: int,
                 attacker: str, rho1: float, rho2: float) -> dict:
    """Evaluate one (object, privilege, seed, attacker, rho) tuple.

    Returns all metrics plus both hypothesis baskets; identical inputs produce
    identical outputs whether called from the CLI or the HTTP service.
    """
    try:
        obj = state.corpus.by_id(object_id)
    except KeyError:
        raise ObjectNotFound(f"unknown object '{object_id}'") from None
    try:
        priv = PrivilegeLevel(level)
    except ValueError as e:
        raise InvalidParameter(str(e)) from e
    if not 0 < rho1 <= 1 or not 0 < rho2 <= 1:
        raise InvalidParameter(f"rho values must lie in (0, 1], got rho1={rho1}, rho2={rho2}")
    if attacker not in state.models:
        raise AttackerNotTrained(
            f"attacker '{attacker}' is not trained (available: {sorted(state.models)})")

    config = state.config
    epoch = privilege_to_epoch(priv, config.e_max)
    spec = RegenSpec(level=priv, epoch=epoch, seed=seed)
    regen_cloud = state.regenerator.regenerate(object_id, obj.cloud, spec)

    cd = chamfer(obj.cloud, regen_cloud)
    q1 = q1_bbox(obj.cloud, regen_cloud)
    q2s, q2d = 0.0, 0.0
    orig_patch = state.original_patches.get(object_id)
    if orig_patch is not None and state.minmax is not None:
        try:
            regen_patch = ransac_horizontal_plane(
                regen_cloud, config.ransac,
                seed=mix_seed(config.seed, "ransac-serve", object_id, epoch, seed),
            )
            q2s, q2d = q2(plane_error_components(orig_patch, regen_patch), state.minmax)
        except NoHorizontalPlane:
            pass

    model = state.models[attacker]
    sigma1 = model.sigma1(regen_cloud)
    sigma2 = model.sigma2(regen_cloud, obj.super_class)
    h1 = hypothesize_topn(sigma1, basket_size(rho1, len(sigma1)))
    h2 = hypothesize_topn(sigma2, basket_size(rho2, len(sigma2)))

    return {
        "object_id": object_id,
        "super_class": obj.super_class,
        "l": priv.value,
        "epoch": epoch,
        "seed": seed,
        "attacker": attacker,
        "rho1": rho1,
        "rho2": rho2,
        "points": regen_cloud.points,
        "pi1": pi1(obj.super_class, h1),
        "pi2": pi2(obj.super_class, obj.intra_class, sigma1, h2, sigma2),
        "q1": q1,
        "q2_static": q2s,
        "q2_dynamic": q2d,
        "chamfer": cd,
        "super_hypothesis": [{"label": lab, "score": sigma1.scores[lab]} for lab in h1.labels],
        "intra_hypothesis": [{"label": lab, "score": sigma2.scores[lab]} for lab in h2.labels],
    }
