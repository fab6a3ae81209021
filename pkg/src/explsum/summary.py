"""The serialized co-cluster summary consumed by the service and the UI.

The artifact records cluster memberships, per-co-cluster statistics with a
20-bin descending value histogram, class-to-cluster prediction flows, and
per-feature-cluster legends. It intentionally omits raw entry values (subset
extraction goes back to the matrix); it does keep each instance's nonzero
feature indices so filters can be evaluated exactly from the artifact alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .cost import Clustering, CostBreakdown, marginals
from .errors import ConfigError, NotFoundError, ShapeError
from .formats import dumps_canonical
from .matrix import ExplanationMatrix

HIST_BINS = 20


_BOUNDS_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _bin_bounds(n: int, bins: int) -> np.ndarray:
    key = (n, bins)
    hit = _BOUNDS_CACHE.get(key)
    if hit is None:
        hit = np.linspace(0, n, bins + 1).astype(int)
        if len(_BOUNDS_CACHE) < 4096:
            _BOUNDS_CACHE[key] = hit
    return hit


def value_histogram(values, bins: int = HIST_BINS) -> list[float]:
    """Equal-count bins over the descending-sorted values (non-increasing).

    With fewer values than bins, empty bins take the value at their start
    rank, so the histogram stays monotone and fixed-width.
    """
    vals = np.asarray(values, dtype=float)
    n = len(vals)
    if n == 0:
        return [0.0] * bins
    if n == 1:
        return [float(vals[0])] * bins
    vals = np.sort(vals)[::-1]
    bounds = _bin_bounds(n, bins)
    out = []
    for i in range(bins):
        lo, hi = bounds[i], bounds[i + 1]
        if hi > lo:
            out.append(float(vals[lo:hi].mean()))
        else:
            out.append(float(vals[min(lo, n - 1)]))
    return out


@dataclass(frozen=True)
class Instance:
    id: str
    class_label: str
    predicted: str
    correct: bool
    nnz: tuple[int, ...]  # column indices with nonzero attribution


@dataclass(frozen=True)
class RowGroup:
    cluster: int
    instances: tuple[Instance, ...]


@dataclass(frozen=True)
class ColGroup:
    cluster: int
    features: tuple[int, ...]


@dataclass(frozen=True)
class Block:
    r: int
    c: int
    mass: float
    nnz: int
    mean: float
    hist: tuple[float, ...]


@dataclass(frozen=True)
class Flow:
    class_label: str
    cluster: int
    correct: int
    incorrect: int


@dataclass(frozen=True)
class LegendFeature:
    col: int  # column index in the matrix
    id: str
    name: str
    group: str | None
    mass: float
    hist: tuple[float, ...]


@dataclass(frozen=True)
class Legend:
    cluster: int
    features: tuple[LegendFeature, ...]


@dataclass(frozen=True)
class SummaryArtifact:
    meta: dict
    rows: tuple[RowGroup, ...]
    cols: tuple[ColGroup, ...]
    blocks: tuple[Block, ...]
    flows: tuple[Flow, ...]
    legends: tuple[Legend, ...]

    def row_group(self, cluster: int) -> RowGroup:
        for g in self.rows:
            if g.cluster == cluster:
                return g
        raise NotFoundError(f"unknown row cluster {cluster}")

    def col_group(self, cluster: int) -> ColGroup:
        for g in self.cols:
            if g.cluster == cluster:
                return g
        raise NotFoundError(f"unknown column cluster {cluster}")

    def classes(self) -> list[str]:
        return sorted({i.class_label for g in self.rows for i in g.instances})


def build_summary(
    matrix: ExplanationMatrix,
    clustering: Clustering,
    cost: CostBreakdown,
    config: dict | None = None,
    seed: int = 0,
) -> SummaryArtifact:
    """Materialize the engine output into the summary artifact.

    Clusters are renumbered 1..K per side, ordered by their smallest member
    index; blocks within a row cluster are ordered by descending mass.
    """
    clustering.validate(matrix.n_rows, matrix.n_cols)
    marg = marginals(matrix, clustering)

    def renumber(clusters):
        order = sorted(range(len(clusters)), key=lambda i: min(clusters[i].members))
        # position in `clusters` -> 1-based artifact id
        mapping = {pos: rank + 1 for rank, pos in enumerate(order)}
        return order, mapping

    row_order, row_map = renumber(clustering.row_clusters)
    col_order, col_map = renumber(clustering.col_clusters)

    nnz_of_row: list[list[int]] = [[] for _ in range(matrix.n_rows)]
    for r, c in zip(matrix.rows, matrix.cols):
        nnz_of_row[int(r)].append(int(c))

    rows = []
    for pos in row_order:
        cl = clustering.row_clusters[pos]
        instances = tuple(
            Instance(
                id=matrix.row_meta[i].id,
                class_label=matrix.row_meta[i].class_label,
                predicted=matrix.row_meta[i].predicted,
                correct=matrix.row_meta[i].correct,
                nnz=tuple(nnz_of_row[i]),
            )
            for i in sorted(cl.members)
        )
        rows.append(RowGroup(cluster=row_map[pos], instances=instances))

    cols = [
        ColGroup(
            cluster=col_map[pos],
            features=tuple(sorted(clustering.col_clusters[pos].members)),
        )
        for pos in col_order
    ]

    # group entries by co-cluster once (segment sort) for block statistics
    ri = marg.row_assign[matrix.rows]
    ci = marg.col_assign[matrix.cols]
    kc = len(clustering.col_clusters)
    flat = ri * kc + ci
    order = np.argsort(flat, kind="stable")
    flat_sorted = flat[order]
    vals_sorted = matrix.vals[order]
    seg_starts = np.flatnonzero(
        np.concatenate(([True], flat_sorted[1:] != flat_sorted[:-1]))
    )
    seg_ends = np.concatenate((seg_starts[1:], [len(flat_sorted)]))
    blocks = []
    for start, end in zip(seg_starts, seg_ends):
        pair = int(flat_sorted[start])
        r_pos, c_pos = pair // kc, pair % kc
        vals = vals_sorted[start:end]
        blocks.append(
            Block(
                r=row_map[r_pos],
                c=col_map[c_pos],
                mass=float(vals.sum()),
                nnz=int(end - start),
                mean=float(vals.mean()),
                hist=tuple(value_histogram(vals)),
            )
        )
    blocks.sort(key=lambda b: (b.r, -b.mass, b.c))

    flow_counts: dict[tuple[str, int], list[int]] = {}
    for group in rows:
        for inst in group.instances:
            key = (inst.class_label, group.cluster)
            cell = flow_counts.setdefault(key, [0, 0])
            cell[0 if inst.correct else 1] += 1
    flows = tuple(
        Flow(class_label=cls, cluster=cluster, correct=counts[0], incorrect=counts[1])
        for (cls, cluster), counts in sorted(flow_counts.items())
    )

    col_mass = matrix.col_masses()
    values_of_col: list[list[float]] = [[] for _ in range(matrix.n_cols)]
    for c, v in zip(matrix.cols, matrix.vals):
        values_of_col[int(c)].append(float(v))
    legends = []
    for group in cols:
        feats = sorted(group.features, key=lambda j: (-col_mass[j], j))
        legends.append(
            Legend(
                cluster=group.cluster,
                features=tuple(
                    LegendFeature(
                        col=int(j),
                        id=matrix.col_meta[j].id,
                        name=matrix.col_meta[j].name,
                        group=matrix.col_meta[j].group,
                        mass=float(col_mass[j]),
                        hist=tuple(value_histogram(values_of_col[j])),
                    )
                    for j in feats
                ),
            )
        )

    meta = {
        "config": dict(config) if config else {},
        "seed": int(seed),
        "cost": {
            "model": float(cost.model_cost),
            "loss": float(cost.loss),
            "total": float(cost.total),
        },
    }
    artifact = SummaryArtifact(
        meta=meta,
        rows=tuple(rows),
        cols=tuple(cols),
        blocks=tuple(blocks),
        flows=tuple(flows),
        legends=tuple(legends),
    )
    total_mass = sum(b.mass for b in artifact.blocks)
    if abs(total_mass - 1.0) > 1e-9:
        raise ShapeError(f"block masses sum to {total_mass}, not 1")
    return artifact


# ---------------------------------------------------------------------------
# serialization ("summary-json v1")


def summary_document(artifact: SummaryArtifact) -> dict:
    return {
        "meta": artifact.meta,
        "rows": [
            {
                "cluster": g.cluster,
                "instances": [
                    {
                        "id": i.id,
                        "class": i.class_label,
                        "pred": i.predicted,
                        "correct": i.correct,
                        "nnz": list(i.nnz),
                    }
                    for i in g.instances
                ],
            }
            for g in artifact.rows
        ],
        "cols": [
            {"cluster": g.cluster, "features": list(g.features)}
            for g in artifact.cols
        ],
        "blocks": [
            {
                "r": b.r,
                "c": b.c,
                "mass": b.mass,
                "nnz": b.nnz,
                "mean": b.mean,
                "hist": list(b.hist),
            }
            for b in artifact.blocks
        ],
        "flows": [
            {
                "class": f.class_label,
                "cluster": f.cluster,
                "correct": f.correct,
                "incorrect": f.incorrect,
            }
            for f in artifact.flows
        ],
        "legends": [
            {
                "cluster": legend.cluster,
                "features": [
                    {
                        "col": f.col,
                        "id": f.id,
                        "name": f.name,
                        "group": f.group,
                        "mass": f.mass,
                        "hist": list(f.hist),
                    }
                    for f in legend.features
                ],
            }
            for legend in artifact.legends
        ],
    }


def serialize_summary(artifact: SummaryArtifact) -> str:
    return dumps_canonical(summary_document(artifact))


def parse_summary(text: str | dict) -> SummaryArtifact:
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ShapeError(f"not valid JSON: {err}") from None
    else:
        doc = text
    try:
        rows = tuple(
            RowGroup(
                cluster=int(g["cluster"]),
                instances=tuple(
                    Instance(
                        id=str(i["id"]),
                        class_label=str(i["class"]),
                        predicted=str(i["pred"]),
                        correct=bool(i["correct"]),
                        nnz=tuple(int(x) for x in i["nnz"]),
                    )
                    for i in g["instances"]
                ),
            )
            for g in doc["rows"]
        )
        cols = tuple(
            ColGroup(
                cluster=int(g["cluster"]),
                features=tuple(int(x) for x in g["features"]),
            )
            for g in doc["cols"]
        )
        blocks = tuple(
            Block(
                r=int(b["r"]),
                c=int(b["c"]),
                mass=float(b["mass"]),
                nnz=int(b["nnz"]),
                mean=float(b["mean"]),
                hist=tuple(float(x) for x in b["hist"]),
            )
            for b in doc["blocks"]
        )
        flows = tuple(
            Flow(
                class_label=str(f["class"]),
                cluster=int(f["cluster"]),
                correct=int(f["correct"]),
                incorrect=int(f["incorrect"]),
            )
            for f in doc["flows"]
        )
        legends = tuple(
            Legend(
                cluster=int(g["cluster"]),
                features=tuple(
                    LegendFeature(
                        col=int(f["col"]),
                        id=str(f["id"]),
                        name=str(f["name"]),
                        group=f.get("group"),
                        mass=float(f["mass"]),
                        hist=tuple(float(x) for x in f["hist"]),
                    )
                    for f in g["features"]
                ),
            )
            for g in doc["legends"]
        )
        meta = dict(doc["meta"])
    except (KeyError, TypeError, ValueError) as err:
        raise ShapeError(f"malformed summary document: {err}") from None
    return SummaryArtifact(
        meta=meta, rows=rows, cols=cols, blocks=blocks, flows=flows, legends=legends
    )


# ---------------------------------------------------------------------------
# filtering and subset extraction


@dataclass(frozen=True)
class FilterSpec:
    classes: frozenset[str] | None = None
    features: frozenset[str] | None = None
    outcome: str = "any"  # any | correct | incorrect
    min_cluster_size: int = 0
    min_mean_value: float = 0.0

    def validate(self) -> None:
        if self.outcome not in ("any", "correct", "incorrect"):
            raise ConfigError(f"unknown outcome filter {self.outcome!r}")
        if self.min_cluster_size < 0 or self.min_mean_value < 0:
            raise ConfigError("filter thresholds must be nonnegative")

    @staticmethod
    def from_document(doc: dict) -> "FilterSpec":
        if not isinstance(doc, dict):
            raise ConfigError("filter spec must be a JSON object")
        known = {
            "classes",
            "features",
            "outcome",
            "min_cluster_size",
            "min_mean_value",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown filter fields: {sorted(unknown)}")
        classes = doc.get("classes")
        features = doc.get("features")
        if classes is not None and (
            not isinstance(classes, list)
            or not all(isinstance(x, str) for x in classes)
        ):
            raise ConfigError("classes must be a list of strings")
        if features is not None and (
            not isinstance(features, list)
            or not all(isinstance(x, str) for x in features)
        ):
            raise ConfigError("features must be a list of strings")
        try:
            spec = FilterSpec(
                classes=frozenset(classes) if classes is not None else None,
                features=frozenset(features) if features is not None else None,
                outcome=doc.get("outcome", "any"),
                min_cluster_size=int(doc.get("min_cluster_size", 0)),
                min_mean_value=float(doc.get("min_mean_value", 0.0)),
            )
        except (TypeError, ValueError) as err:
            raise ConfigError(f"malformed filter spec: {err}") from None
        spec.validate()
        return spec

    def document(self) -> dict:
        return {
            "classes": sorted(self.classes) if self.classes is not None else None,
            "features": sorted(self.features) if self.features is not None else None,
            "outcome": self.outcome,
            "min_cluster_size": self.min_cluster_size,
            "min_mean_value": self.min_mean_value,
        }


@dataclass(frozen=True)
class ClassTotal:
    class_label: str
    total: int
    retained: int


@dataclass(frozen=True)
class FilteredView:
    artifact: SummaryArtifact  # retained instances, re-flowed
    spec: FilterSpec
    class_totals: tuple[ClassTotal, ...]


def apply_filter(artifact: SummaryArtifact, spec: FilterSpec) -> FilteredView:
    """Instance-level predicate, then cluster-level thresholds, then re-flow.

    The original artifact is untouched; unknown class or feature names raise
    :class:`NotFoundError` listing the offenders.
    """
    spec.validate()
    known_classes = set(artifact.classes())
    if spec.classes is not None:
        bad = sorted(spec.classes - known_classes)
        if bad:
            raise NotFoundError(f"unknown classes: {bad}", offenders=bad)
    feature_cols: set[int] | None = None
    if spec.features is not None:
        id_to_col = feature_id_to_column(artifact)
        bad = sorted(set(spec.features) - set(id_to_col))
        if bad:
            raise NotFoundError(f"unknown features: {bad}", offenders=bad)
        feature_cols = {id_to_col[f] for f in spec.features}

    def keep(inst: Instance) -> bool:
        if spec.classes is not None and inst.class_label not in spec.classes:
            return False
        if spec.outcome == "correct" and not inst.correct:
            return False
        if spec.outcome == "incorrect" and inst.correct:
            return False
        if feature_cols is not None and not feature_cols.intersection(inst.nnz):
            return False
        return True

    totals: dict[str, list[int]] = {c: [0, 0] for c in sorted(known_classes)}
    new_rows = []
    visible_clusters = set()
    for group in artifact.rows:
        kept = tuple(i for i in group.instances if keep(i))
        for inst in group.instances:
            totals[inst.class_label][0] += 1
        if len(kept) == 0 or len(kept) < spec.min_cluster_size:
            continue
        for inst in kept:
            totals[inst.class_label][1] += 1
        visible_clusters.add(group.cluster)
        new_rows.append(RowGroup(cluster=group.cluster, instances=kept))

    new_blocks = tuple(
        b
        for b in artifact.blocks
        if b.r in visible_clusters and b.mean >= spec.min_mean_value
    )
    flow_counts: dict[tuple[str, int], list[int]] = {}
    for group in new_rows:
        for inst in group.instances:
            cell = flow_counts.setdefault((inst.class_label, group.cluster), [0, 0])
            cell[0 if inst.correct else 1] += 1
    new_flows = tuple(
        Flow(class_label=cls, cluster=cluster, correct=c[0], incorrect=c[1])
        for (cls, cluster), c in sorted(flow_counts.items())
    )
    filtered = replace(
        artifact, rows=tuple(new_rows), blocks=new_blocks, flows=new_flows
    )
    class_totals = tuple(
        ClassTotal(class_label=cls, total=t[0], retained=t[1])
        for cls, t in sorted(totals.items())
    )
    return FilteredView(artifact=filtered, spec=spec, class_totals=class_totals)


def feature_id_to_column(artifact: SummaryArtifact) -> dict[str, int]:
    """Feature id -> matrix column index, read off the legends."""
    mapping: dict[str, int] = {}
    for legend in artifact.legends:
        for feat in legend.features:
            mapping[feat.id] = feat.col
    return mapping


def extract_subset(
    artifact: SummaryArtifact,
    matrix: ExplanationMatrix,
    row_cluster: int,
    col_cluster: int | None = None,
    threshold: float = 0.0,
) -> "Subset":
    """Raw sub-matrix of a row cluster (optionally one co-cluster).

    Entries below ``threshold`` are dropped; instances keep their metadata
    even when every entry filters out.
    """
    row_group = artifact.row_group(row_cluster)
    if col_cluster is None:
        feature_indices = list(range(matrix.n_cols))
    else:
        feature_indices = sorted(artifact.col_group(col_cluster).features)
    id_to_index = {meta.id: i for i, meta in enumerate(matrix.row_meta)}
    try:
        instance_indices = [id_to_index[i.id] for i in row_group.instances]
    except KeyError as err:
        raise ShapeError(f"artifact instance {err} not in the matrix") from None
    rows_set = {idx: k for k, idx in enumerate(instance_indices)}
    cols_set = {idx: k for k, idx in enumerate(feature_indices)}
    entries = []
    for r, c, v in zip(matrix.rows, matrix.cols, matrix.vals):
        li = rows_set.get(int(r))
        lj = cols_set.get(int(c))
        if li is None or lj is None or v < threshold:
            continue
        entries.append((li, lj, float(v)))
    return Subset(
        row_cluster=row_cluster,
        col_cluster=col_cluster,
        threshold=threshold,
        instances=row_group.instances,
        features=tuple(
            (matrix.col_meta[j].id, matrix.col_meta[j].name)
            for j in feature_indices
        ),
        entries=tuple(entries),
    )


@dataclass(frozen=True)
class Subset:
    row_cluster: int
    col_cluster: int | None
    threshold: float
    instances: tuple[Instance, ...]
    features: tuple[tuple[str, str], ...]  # (id, name)
    entries: tuple[tuple[int, int, float], ...]  # (local row, local col, value)


def view_document(view: FilteredView) -> dict:
    doc = summary_document(view.artifact)
    return {
        "spec": view.spec.document(),
        "classes": [
            {"class": t.class_label, "total": t.total, "retained": t.retained}
            for t in view.class_totals
        ],
        "rows": doc["rows"],
        "cols": doc["cols"],
        "blocks": doc["blocks"],
        "flows": doc["flows"],
    }


def subset_document(subset: Subset) -> dict:
    return {
        "row_cluster": subset.row_cluster,
        "col_cluster": subset.col_cluster,
        "threshold": subset.threshold,
        "instances": [
            {
                "id": i.id,
                "class": i.class_label,
                "pred": i.predicted,
                "correct": i.correct,
            }
            for i in subset.instances
        ],
        "features": [{"id": fid, "name": name} for fid, name in subset.features],
        "entries": [[r, c, v] for r, c, v in subset.entries],
    }


def serialize_view(view: FilteredView) -> str:
    return dumps_canonical(view_document(view))


def serialize_subset(subset: Subset) -> str:
    return dumps_canonical(subset_document(subset))
