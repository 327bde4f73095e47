"""Corpus-level analyses over per-network SHAP signatures."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .atlas import CATEGORY_NAMES, DEFAULT_ATLAS, FEATURE_NAMES, OrbitAtlas
from .errors import AnalysisError, DataError

log = logging.getLogger(__name__)


@dataclass
class NetworkRecord:
    name: str
    path: str
    domain: str
    subdomain: str | None = None
    shap_signature: list = field(default_factory=list)   # mean signed phi, N1..M12
    mean_abs: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in ("shap_signature", "mean_abs"):
            v = getattr(self, key)
            if v and len(v) != len(FEATURE_NAMES):
                raise DataError(f"{self.name}: {key} needs {len(FEATURE_NAMES)} entries, got {len(v)}")

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "path": self.path, "domain": self.domain,
                           "subdomain": self.subdomain, "shap_signature": list(self.shap_signature),
                           "mean_abs": list(self.mean_abs), "metrics": self.metrics}, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "NetworkRecord":
        return cls(**json.loads(line))


def write_records(records: Iterable[NetworkRecord], dest) -> None:
    with open(dest, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_records(path) -> list[NetworkRecord]:
    with open(path, encoding="utf-8") as fh:
        return [NetworkRecord.from_json(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    name: str
    domain: str
    subdomain: str | None


def read_corpus_index(path) -> list[CorpusEntry]:
    """CSV with header ``path,name,domain,subdomain``; relative paths resolve
    against the index's directory."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for i, r in enumerate(rows, start=2):
        if not r.get("path") or not r.get("domain"):
            raise DataError(f"corpus index line {i}: path and domain are required")
        p = r["path"] if os.path.isabs(r["path"]) else os.path.join(base, r["path"])
        out.append(CorpusEntry(p, r.get("name") or os.path.basename(p), r["domain"], r.get("subdomain") or None))
    return out


# -- PCA ---------------------------------------------------------------------

@dataclass
class PCAResult:
    coords: np.ndarray            # (n, 2)
    explained_variance_ratio: np.ndarray
    components: np.ndarray        # (2, d)


def pca_2d(signatures) -> PCAResult:
    """Project rows onto the two leading covariance eigenvectors.

    Each component's sign is fixed so its largest-magnitude loading is
    positive (the first such loading on ties).
    """
    X = np.asarray(signatures, dtype=np.float64)
    if X.ndim != 2 or len(X) < 3:
        raise AnalysisError("PCA needs at least 3 signatures")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (len(X) - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order[:2]].T.copy()
    for k in range(len(vecs)):
        j = int(np.argmax(np.abs(vecs[k])))
        if vecs[k, j] < 0:
            vecs[k] = -vecs[k]
    total = vals.sum()
    ratio = vals[:2] / total if total > 0 else np.zeros(2)
    coords = Xc @ vecs.T
    if coords.shape[1] < 2:
        coords = np.pad(coords, ((0, 0), (0, 2 - coords.shape[1])))
    return PCAResult(coords, ratio, vecs)


# -- clustering statistic ----------------------------------------------------

@dataclass
class ClusteringStat:
    domain: str
    d_bar: float
    d_tilde_mean: float
    p_value: float | str
    runs: int
    exceed: int

    def row(self) -> list:
        return [self.domain, repr(self.d_bar), repr(self.d_tilde_mean), str(self.p_value), self.runs]


def mean_pairwise_distance(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        raise AnalysisError("mean pairwise distance needs at least two points")
    return float(pdist(pts).mean())


def clustering_stat(coords, labels: Sequence[str], domain: str, S: int = 100, seed: int = 0) -> ClusteringStat:
    """Observed mean pairwise distance of ``domain`` against ``S`` random
    draws of the same number of points.  ``p = s / S`` where ``s`` counts
    draws at least as tight; ``s == 0`` is reported as ``"< 1/S"``."""
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    if S < 100:
        raise AnalysisError("clustering statistic needs S >= 100 null runs")
    members = np.flatnonzero(labels == domain)
    if len(members) < 2:
        raise AnalysisError(f"domain {domain!r} has fewer than two networks")
    d_bar = mean_pairwise_distance(coords[members])
    rng = np.random.default_rng(seed)
    # sorted draws so an identical point set reproduces d_bar bit for bit
    null = np.array([mean_pairwise_distance(coords[np.sort(rng.choice(len(coords), size=len(members), replace=False))])
                     for _ in range(S)])
    s = int((null <= d_bar).sum())
    p = s / S if s else f"< {1 / S:g}"
    return ClusteringStat(domain, d_bar, float(null.mean()), p, S, s)


# -- winning rates -----------------------------------------------------------

def _top_index(values) -> int:
    """Index of the maximum; the lowest index wins ties."""
    return int(np.argmax(np.asarray(values, dtype=np.float64)))


def winning_rates(records: Sequence[NetworkRecord], atlas: OrbitAtlas = DEFAULT_ATLAS,
                  granularity: str = "feature", group_by: str = "domain") -> dict:
    """``{group: {item: fraction of networks whose top item it is}}``.

    ``granularity`` is ``"feature"`` (27 items) or ``"category"`` (five
    items, summing mean |phi| within each category).
    """
    if granularity not in ("feature", "category"):
        raise AnalysisError("granularity must be 'feature' or 'category'")
    items = list(atlas.feature_names) if granularity == "feature" else list(CATEGORY_NAMES)
    cat_index = [CATEGORY_NAMES.index(atlas.category_of(f)) for f in atlas.feature_names]
    groups: dict[str, list] = {}
    for r in records:
        key = getattr(r, group_by) or "(none)"
        groups.setdefault(key, []).append(r)
    out = {}
    for key in sorted(groups):
        recs = [r for r in groups[key] if r.mean_abs]
        if not recs:
            log.warning("domain %s has no records with SHAP values; skipped", key)
            continue
        counts = np.zeros(len(items))
        for r in recs:
            v = np.asarray(r.mean_abs, dtype=np.float64)
            if granularity == "category":
                v = np.bincount(cat_index, weights=v, minlength=len(CATEGORY_NAMES))
            counts[_top_index(v)] += 1
        out[key] = dict(zip(items, (counts / len(recs)).tolist()))
    return out


# -- violin data -------------------------------------------------------------

def violin_data(scores) -> tuple[np.ndarray, bool]:
    """Reversed min-max normalisation: the maximum maps to 0, the minimum to 1.

    Returns the values and a flag that is True when the scores are constant
    (the values are then all zero).
    """
    s = np.asarray(scores, dtype=np.float64)
    if not len(s):
        return s, True
    hi, lo = s.max(), s.min()
    if hi == lo:
        return np.zeros_like(s), True
    return (hi - s) / (hi - lo), False


# -- CSV writers -------------------------------------------------------------

def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def pca_csv(records: Sequence[NetworkRecord], pca: PCAResult) -> str:
    return _csv([[r.name, r.domain, r.subdomain or "", repr(float(a)), repr(float(b))]
                 for r, (a, b) in zip(records, pca.coords.tolist())],
                ["name", "domain", "subdomain", "pc1", "pc2"])


def clustering_csv(stats: Sequence[ClusteringStat]) -> str:
    return _csv([s.row() for s in stats], ["domain", "d_bar", "d_tilde_mean", "p_value", "runs"])


def winning_csv(rates: dict) -> str:
    rows = [[g, item, repr(v)] for g, table in rates.items() for item, v in table.items()]
    return _csv(rows, ["group", "item", "rate"])
