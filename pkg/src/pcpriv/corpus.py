"""Object corpus: synthetic shape families at desk scale, plus directory ingestion.

The synthetic corpus stands in for a scanned-household-object dataset: each
super-class is a parametric shape family with strong horizontal surfaces, and
each object is one random dimension vector within the family. Ingestion
accepts the same layout real data would use: one directory per super-class,
one cloud file per object.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attacker import LabelSpace
from .geometry import PointCloud, load_cloud, normalize, save_xyz
from .regen import mix_seed

FAMILY_ORDER = ("box", "cylinder", "lbracket", "slab", "lamp")


@dataclass(frozen=True)
class CorpusObject:
    super_class: str
    intra_class: str
    cloud: PointCloud


@dataclass
class Corpus:
    objects: list[CorpusObject]

    def __post_init__(self):
        if len({o.intra_class for o in self.objects}) != len(self.objects):
            raise ValueError("intra-class ids must be unique")

    def __len__(self) -> int:
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    def rows(self) -> list[tuple[str, str, PointCloud]]:
        return [(o.super_class, o.intra_class, o.cloud) for o in self.objects]

    def by_id(self, intra_class: str) -> CorpusObject:
        for o in self.objects:
            if o.intra_class == intra_class:
                return o
        raise KeyError(intra_class)

    def label_space(self) -> LabelSpace:
        supers: dict[str, list[str]] = {}
        for o in self.objects:
            supers.setdefault(o.super_class, []).append(o.intra_class)
        return LabelSpace(
            super_classes=tuple(sorted(supers)),
            intra_classes={k: tuple(sorted(v)) for k, v in supers.items()},
        )


# --- shape samplers --------------------------------------------------------
# Each returns (n, 3) surface points, area-uniform across faces, z vertical.

def _sample_faces(rng, n, faces):
    """faces: list of (area, sampler(rng, count) -> (count, 3))."""
    areas = np.array([a for a, _ in faces])
    counts = rng.multinomial(n, areas / areas.sum())
    parts = [faces[i][1](rng, c) for i, c in enumerate(counts) if c > 0]
    return np.vstack(parts)


def _box_faces(a, b, c, center=(0.0, 0.0, 0.0)):
    ha, hb, hc = a / 2, b / 2, c / 2

    def face(axis, sign, d1, d2, h):
        def sample(rng, count):
            u = rng.uniform(-d1 / 2, d1 / 2, count)
            v = rng.uniform(-d2 / 2, d2 / 2, count)
            w = np.full(count, sign * h)
            cols = {0: (w, u, v), 1: (u, w, v), 2: (u, v, w)}[axis]
            return np.column_stack(cols) + np.array(center)
        return sample

    return [
        (b * c, face(0, +1, b, c, ha)), (b * c, face(0, -1, b, c, ha)),
        (a * c, face(1, +1, a, c, hb)), (a * c, face(1, -1, a, c, hb)),
        (a * b, face(2, +1, a, b, hc)), (a * b, face(2, -1, a, b, hc)),
    ]


def _cylinder_faces(radius, height, center=(0.0, 0.0, 0.0)):
    cx, cy, cz = center

    def lateral(rng, count):
        th = rng.uniform(0, 2 * math.pi, count)
        z = rng.uniform(-height / 2, height / 2, count)
        return np.column_stack((cx + radius * np.cos(th), cy + radius * np.sin(th), cz + z))

    def cap(sign):
        def sample(rng, count):
            r = radius * np.sqrt(rng.uniform(0, 1, count))
            th = rng.uniform(0, 2 * math.pi, count)
            z = np.full(count, cz + sign * height / 2)
            return np.column_stack((cx + r * np.cos(th), cy + r * np.sin(th), z))
        return sample

    cap_area = math.pi * radius ** 2
    return [
        (2 * math.pi * radius * height, lateral),
        (cap_area, cap(+1)),
        (cap_area, cap(-1)),
    ]


def _sample_box(rng, n, dims):
    return _sample_faces(rng, n, _box_faces(*dims))


def _sample_cylinder(rng, n, dims):
    return _sample_faces(rng, n, _cylinder_faces(*dims))


def _sample_lbracket(rng, n, dims):
    # horizontal base slab plus a vertical wall along one edge
    a, b, t, h = dims
    base = _box_faces(a, b, t, center=(0.0, 0.0, t / 2))
    wall = _box_faces(a, t, h, center=(0.0, -(b - t) / 2, t + h / 2))
    return _sample_faces(rng, n, base + wall)


def _sample_slab(rng, n, dims):
    return _sample_faces(rng, n, _box_faces(*dims))


def _sample_lamp(rng, n, dims):
    pole_r, pole_h, shade_r = dims
    base = _cylinder_faces(shade_r * 0.8, 0.04, center=(0.0, 0.0, 0.02))
    pole = _cylinder_faces(pole_r, pole_h, center=(0.0, 0.0, 0.04 + pole_h / 2))
    shade = _cylinder_faces(shade_r, 0.06, center=(0.0, 0.0, 0.04 + pole_h + 0.03))
    return _sample_faces(rng, n, base + pole + shade)


# Dimension ranges are deliberately tight (+-8% around the family center):
# families stay separable on sharp scans yet coarse regenerations confuse
# them, and each object's identity rests partly on its frozen surface sample,
# which is what a regime-matched attacker can exploit.
_FAMILIES = {
    "box": (_sample_box, lambda rng: rng.uniform([0.644, 0.644, 0.552], [0.756, 0.756, 0.648])),
    "cylinder": (_sample_cylinder, lambda rng: rng.uniform([0.322, 0.552], [0.378, 0.648])),
    "lbracket": (_sample_lbracket, lambda rng: rng.uniform([0.644, 0.644, 0.1472, 0.46], [0.756, 0.756, 0.1728, 0.54])),
    "slab": (_sample_slab, lambda rng: rng.uniform([0.874, 0.874, 0.2024], [1.026, 1.026, 0.2376])),
    "lamp": (_sample_lamp, lambda rng: rng.uniform([0.04, 0.92, 0.322], [0.06, 1.08, 0.378])),
}


def generate_synthetic_corpus(
    num_classes: int,
    objects_per_class: int,
    points_per_cloud: int,
    seed: int,
    families: tuple[str, ...] | None = None,
) -> Corpus:
    """Deterministic desk-scale corpus: ``num_classes`` shape families, each with
    ``objects_per_class`` randomly dimensioned objects, normalized clouds."""
    if num_classes < 2:
        raise ValueError("need at least 2 super-classes (attackers require >= 2)")
    if objects_per_class < 2:
        raise ValueError("need at least 2 objects per super-class")
    if points_per_cloud < 4:
        raise ValueError("points_per_cloud must be >= 4")
    chosen = families if families is not None else FAMILY_ORDER[:num_classes]
    if len(chosen) != num_classes:
        raise ValueError(f"{num_classes} classes requested but {len(chosen)} families given")
    unknown = [f for f in chosen if f not in _FAMILIES]
    if unknown:
        raise ValueError(f"unknown shape families: {unknown} (available: {sorted(_FAMILIES)})")

    objects = []
    for family in chosen:
        sampler, draw_dims = _FAMILIES[family]
        for j in range(objects_per_class):
            rng = np.random.Generator(np.random.PCG64(mix_seed(seed, "corpus", family, j)))
            dims = draw_dims(rng)
            pts = sampler(rng, points_per_cloud, dims)
            objects.append(CorpusObject(
                super_class=family,
                intra_class=f"{family}_{j:03d}",
                cloud=normalize(PointCloud(pts)),
            ))
    return Corpus(objects)


# --- persistence -----------------------------------------------------------

def write_corpus(corpus: Corpus, out_dir: str | Path) -> Path:
    """Write clouds in the <super_class>/<intra_class>.xyz layout plus a manifest."""
    out_dir = Path(out_dir)
    rows = []
    for obj in corpus:
        class_dir = out_dir / obj.super_class
        class_dir.mkdir(parents=True, exist_ok=True)
        rel = f"{obj.super_class}/{obj.intra_class}.xyz"
        save_xyz(out_dir / rel, obj.cloud)
        rows.append({
            "cloud_path": rel,
            "super_class": obj.super_class,
            "intra_class": obj.intra_class,
            "source": "original",
        })
    manifest = out_dir / "manifest.jsonl"
    with manifest.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return manifest


def load_corpus(manifest_path: str | Path, min_points: int = 4) -> Corpus:
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    objects = []
    for lineno, line in enumerate(manifest_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise ValueError(f"{manifest_path}:{lineno}: invalid JSON ({e.msg})") from e
        for key in ("cloud_path", "super_class", "intra_class"):
            if key not in row:
                raise ValueError(f"{manifest_path}:{lineno}: missing field '{key}'")
        objects.append(CorpusObject(
            super_class=row["super_class"],
            intra_class=row["intra_class"],
            cloud=load_cloud(base / row["cloud_path"], min_points=min_points),
        ))
    if not objects:
        raise ValueError(f"{manifest_path}: empty manifest")
    return Corpus(objects)


def ingest_directory(root: str | Path, min_points: int = 4) -> Corpus:
    """Scan a <super_class>/<object file> tree into a corpus, normalizing each cloud."""
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"{root} is not a directory")
    objects = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for f in sorted(class_dir.iterdir()):
            if f.suffix.lower() not in (".xyz", ".txt", ".bin"):
                continue
            cloud = load_cloud(f, min_points=min_points)
            objects.append(CorpusObject(
                super_class=class_dir.name,
                intra_class=f"{class_dir.name}_{f.stem}",
                cloud=normalize(cloud),
            ))
    if not objects:
        raise ValueError(f"{root}: no cloud files found (expected <class>/<object>.xyz|.bin)")
    return Corpus(objects)
