"""Run persistence and reporting.

A run artifact is a single schema-versioned JSON document. Everything that
is a pure function of the instance and the config lives under the "run" key
and is covered by a reproducibility hash; timestamps and tool metadata live
under "meta", outside the hash, so two runs with the same seed produce
byte-identical hashed sections.
"""
from __future__ import annotations

import hashlib
import io
import json
import tarfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import __version__
from .cnf import CnfFormula, CostParams, default_params, load_instance_file
from .evolve import GaConfig, final_sample_stream, optimize
from .oracle import (
    DistributionTable,
    GUARD_MAX_N,
    enumerate_h,
    exact_h_distribution,
)
from .qsim import AngleVector, prepare_state, sample
from .shaping import (
    CostHistogram,
    cost_histogram,
    h_histogram,
    histogram_to_json_obj,
    nearest_rank_quantile,
)

__all__ = [
    "RUN_SCHEMA",
    "SAMPLE_SCHEMA",
    "SATLIB_UF20_URL",
    "instance_fingerprint",
    "canonical_json",
    "repro_hash",
    "run_optimize",
    "run_sample",
    "load_artifact",
    "save_artifact",
    "artifact_angles",
    "artifact_histogram",
    "histogram_summary",
    "improvement_factor",
    "fetch_satlib",
]

RUN_SCHEMA = "ranksat-run/1"
SAMPLE_SCHEMA = "ranksat-sample/1"
SATLIB_UF20_URL = (
    "https://www.cs.ubc.ca/~hoos/SATLIB/Benchmarks/SAT/RND3SAT/uf20-91.tar.gz"
)
FINAL_SHOTS_DEFAULT = 100_000


def instance_fingerprint(path: str) -> dict:
    data = Path(path).read_bytes()
    return {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def repro_hash(run_obj: dict) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(run_obj).encode()).hexdigest()


def _meta(command: str) -> dict:
    return {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "tool_version": __version__,
        "command": command,
    }


def _sample_section(f: CnfFormula, hist: CostHistogram, shots: int) -> dict:
    return {
        "shots": shots,
        "h_histogram": histogram_to_json_obj(hist, value_label="h"),
        "p_h0": float(hist.counts[0] / hist.total) if hist.values[0] == 0 else 0.0,
        "mean_h": hist.mean,
        "e_0.1": nearest_rank_quantile(hist.values, hist.cumfreq, 0.1),
        "e_0.5": nearest_rank_quantile(hist.values, hist.cumfreq, 0.5),
    }


def improvement_factor(final_p0: float, initial: DistributionTable) -> float | None:
    """Ratio of the final h=0 probability to the uniform baseline."""
    baseline = initial.probability_at(0)
    if baseline == 0.0:
        return None
    return final_p0 / baseline


def run_optimize(
    instance_path: str,
    cfg: GaConfig,
    params: CostParams | None = None,
    final_shots: int = FINAL_SHOTS_DEFAULT,
    oracle_max_n: int = GUARD_MAX_N,
) -> dict:
    """Optimize angles, draw the final report sample, assemble the artifact."""
    f = load_instance_file(instance_path)
    if params is None:
        params = default_params(f)
    best_angles, history = optimize(f, cfg)

    state = prepare_state(f.n, best_angles)
    shots = sample(state, final_shots, final_sample_stream(cfg.seed))
    final_hist = h_histogram(f, shots)
    final_section = _sample_section(f, final_hist, final_shots)

    oracle_section = None
    factor = None
    if f.n <= oracle_max_n:
        initial = enumerate_h(f, max_n=oracle_max_n)
        exact_final = exact_h_distribution(f, best_angles, max_n=oracle_max_n)
        factor = improvement_factor(final_section["p_h0"], initial)
        exact_factor = improvement_factor(exact_final.probability_at(0), initial)
        oracle_section = {
            "initial_h": initial.to_json_obj(),
            "exact_final_h": exact_final.to_json_obj(),
            "p_h0_uniform": initial.probability_at(0),
            "p_h0_exact_final": exact_final.probability_at(0),
            "improvement_factor_exact": exact_factor,
        }

    run = {
        "instance": {**instance_fingerprint(instance_path), "n": f.n, "m": f.m},
        "config": cfg.to_json_obj(),
        "cost_params": {"zeta": params.zeta, "vartheta": params.vartheta},
        "best_angles": best_angles.to_json_obj(),
        "best_fitness": history.records[-1].best_so_far_fitness,
        "history": history.to_json_obj(),
        "final_sample": final_section,
        "oracle": oracle_section,
        "improvement_factor": factor,
    }
    return {
        "schema": RUN_SCHEMA,
        "meta": _meta("optimize"),
        "run": run,
        "repro_hash": repro_hash(run),
    }


def run_sample(
    instance_path: str,
    angles: AngleVector,
    shots: int,
    seed: int,
) -> dict:
    """Sample a fixed-angle state and wrap the histogram in an artifact."""
    f = load_instance_file(instance_path)
    if angles is None:
        raise ValueError("angles required")
    state = prepare_state(f.n, angles)
    drawn = sample(state, shots, final_sample_stream(seed))
    hist = h_histogram(f, drawn)
    run = {
        "instance": {**instance_fingerprint(instance_path), "n": f.n, "m": f.m},
        "angles": angles.to_json_obj(),
        "seed": seed,
        "final_sample": _sample_section(f, hist, shots),
    }
    return {
        "schema": SAMPLE_SCHEMA,
        "meta": _meta("sample"),
        "run": run,
        "repro_hash": repro_hash(run),
    }


def save_artifact(artifact: dict, path: str) -> None:
    Path(path).write_text(json.dumps(artifact, indent=2) + "\n", encoding="utf-8")


def load_artifact(path: str) -> dict:
    artifact = json.loads(Path(path).read_text(encoding="utf-8"))
    if artifact.get("schema") not in (RUN_SCHEMA, SAMPLE_SCHEMA):
        raise ValueError(f"{path}: unknown artifact schema {artifact.get('schema')!r}")
    run = artifact.get("run")
    if run is None or repro_hash(run) != artifact.get("repro_hash"):
        raise ValueError(f"{path}: reproducibility hash does not match contents")
    return artifact


def artifact_angles(artifact: dict) -> AngleVector:
    run = artifact["run"]
    obj = run.get("best_angles") or run.get("angles")
    if obj is None:
        raise ValueError("artifact carries no angles")
    return AngleVector.from_json_obj(obj)


def artifact_histogram(artifact: dict) -> CostHistogram:
    rows = artifact["run"]["final_sample"]["h_histogram"]
    return CostHistogram.from_pairs((row["h"], row["count"]) for row in rows)


def histogram_summary(hist: CostHistogram) -> dict:
    p0 = float(hist.counts[0] / hist.total) if hist.values[0] == 0 else 0.0
    return {
        "p_h0": p0,
        "e_0.1": nearest_rank_quantile(hist.values, hist.cumfreq, 0.1),
        "e_0.5": nearest_rank_quantile(hist.values, hist.cumfreq, 0.5),
        "mean_h": hist.mean,
    }


def regenerate_g_histogram(artifact: dict) -> CostHistogram:
    """Rebuild the final sample at g-cost level from the stored seed.

    Sampling is deterministic given the artifact's seed, so the g-level view
    does not need to be stored.
    """
    run = artifact["run"]
    f = load_instance_file(run["instance"]["path"])
    angles = artifact_angles(artifact)
    shots_n = run["final_sample"]["shots"]
    if artifact["schema"] == RUN_SCHEMA:
        rng = final_sample_stream(run["config"]["seed"])
        cp = run["cost_params"]
        params = CostParams(zeta=cp["zeta"], vartheta=cp["vartheta"])
    else:
        rng = final_sample_stream(run["seed"])
        params = default_params(f)
    state = prepare_state(f.n, angles)
    return cost_histogram(f, sample(state, shots_n, rng), params)


# ---------------------------------------------------------------------------
# SATLIB ingestion

def _download(url: str, timeout: float = 120.0) -> bytes:
    import requests

    resp = requests.get(url, timeout=timeout)
    resp.raise_for_status()
    return resp.content


def fetch_satlib(
    dest_dir: str,
    url: str = SATLIB_UF20_URL,
    expected_count: int = 1000,
    download: Callable[[str], bytes] = _download,
) -> int:
    """Download the uf20-91 tarball and unpack its .cnf files into dest_dir.

    Extraction is flat (member basenames only). Raises RuntimeError when the
    archive does not contain the expected number of instances.
    """
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    payload = download(url)
    count = 0
    with tarfile.open(fileobj=io.BytesIO(payload), mode="r:*") as tar:
        for member in tar:
            name = Path(member.name).name
            if not member.isfile() or not name.endswith(".cnf"):
                continue
            fh = tar.extractfile(member)
            if fh is None:
                continue
            (dest / name).write_bytes(fh.read())
            count += 1
    if count != expected_count:
        raise RuntimeError(
            f"expected {expected_count} instances in {url}, extracted {count}"
        )
    return count
