"""Capture explorer test fixtures from a real server over a real run.

Runs the desk-scale experiment, serves it in-process, samples evaluate
responses (verifying they match the direct batch call to 1e-9), and freezes
them for the vitest suite.

Usage: python3 frontend/scripts/capture_fixtures.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from pcpriv.config import ExperimentConfig
from pcpriv.harness import evaluate_one, load_run_state, run_experiment
from pcpriv.service import create_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
METRICS = ("pi1", "pi2", "q1", "q2_static", "q2_dynamic", "chamfer")


def main():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = ExperimentConfig().with_output_dir(Path(tmp) / "run")
        run_experiment(cfg)
        state = load_run_state(cfg.output_dir)
        client = TestClient(create_app(state))

        objects = [o.intra_class for o in state.corpus]
        space = state.corpus.label_space()
        rng = np.random.default_rng(2718)

        samples = []
        for i in range(10):
            object_id = objects[int(rng.integers(0, len(objects)))]
            obj = state.corpus.by_id(object_id)
            level = float(np.round(rng.uniform(0.05, 1.0), 2))
            seed = int(rng.integers(0, 10_000))
            attacker = ["J1", "J2", "J3", "J4"][i % 4]
            rho1 = float([1.0 / len(space.super_classes), 0.5, 1.0][i % 3])
            rho2 = float([1.0 / len(space.intra_classes[obj.super_class]), 0.5, 1.0][(i + 1) % 3])
            resp = client.post("/evaluate", json={
                "object_id": object_id, "l": level, "seed": seed, "attacker": attacker,
                "rho1": rho1, "rho2": rho2, "max_points": 64,
            })
            resp.raise_for_status()
            body = resp.json()
            direct = evaluate_one(state, object_id, level, seed, attacker, rho1, rho2)
            for key in METRICS:
                assert abs(body[key] - direct[key]) <= 1e-9, (key, body[key], direct[key])
            samples.append(body)

        sweep_object = objects[0]
        sweep = []
        for level in np.linspace(0.05, 0.95, 11):
            resp = client.post("/evaluate", json={
                "object_id": sweep_object, "l": float(level), "seed": 2, "max_points": 16,
            })
            resp.raise_for_status()
            sweep.append(resp.json())

        FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
        (FIXTURE_DIR / "evaluate_samples.json").write_text(json.dumps(samples, indent=1))
        (FIXTURE_DIR / "evaluate_sweep.json").write_text(json.dumps(sweep, indent=1))
        decreasing = sum(b["chamfer"] < a["chamfer"] for a, b in zip(sweep, sweep[1:]))
        print(f"captured 10 samples + {len(sweep)}-point sweep "
              f"({decreasing}/10 steps decreasing) into {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
