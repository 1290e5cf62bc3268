"""Declarative experiment descriptions and their JSON form.

A spec document looks like::

    {
      "setting": "regression",            # or "known_sigma", "normal_mean"
      "dims": {"n": 30, "p": 10, "q": 1},
      "grid": [{"norm_beta": 0.0}, {"norm_beta": 1.0}],
      "estimators": [{"name": "AICC"}, {"name": "MAICC", "c_ratio": 1.0}],
      "baseline": "AICC",
      "reps": 100000,
      "seed": 12345,
      "redraw_x": true,
      "sweep_axis": "norm_beta"
    }

Grid points may override ``n``, ``p``, ``q`` and set the truth through one of
``norm_beta`` (σ₁ of B, others zero), ``singular_values``, ``beta`` or ``B``
(``M`` in the normal-mean setting), and the noise through ``noise_var``
(Σ = σ² I), ``r`` (unit variances, all correlations r) or ``Sigma``.
``c_ratio`` on a point scales the default constant of MAIC/MAICc estimators
that do not fix their own ``c``.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..criteria import CriterionName, ModelDims, cbar_value, maic_constant
from ..errors import ValidationError
from ..matstat import cholesky
from ..regression import coefficients_from_singular_values

SETTINGS = ("regression", "known_sigma", "normal_mean")

ALLOWED = {
    "regression": {CriterionName.AIC, CriterionName.AICC, CriterionName.MAICC},
    "known_sigma": {CriterionName.AIC_KNOWN, CriterionName.MAIC, CriterionName.SURE_MAT},
    "normal_mean": {
        CriterionName.SURE_MAT,
        CriterionName.SURE_VEC,
        CriterionName.JOHNSTONE,
        CriterionName.THM1,
        CriterionName.MATSUDA,
    },
}

TUNABLE = {CriterionName.MAIC, CriterionName.MAICC}

POINT_KEYS = {
    "n", "p", "q", "norm_beta", "singular_values", "beta", "B", "M",
    "noise_var", "r", "Sigma", "c_ratio", "label",
}

SPEC_KEYS = {
    "setting", "dims", "grid", "estimators", "baseline", "reps", "seed",
    "redraw_x", "sweep_axis", "candidate_orders", "x_source", "block_size",
    "description",
}

DEFAULT_BLOCK_SIZE = 2048


@dataclass(frozen=True)
class EstimatorSpec:
    name: CriterionName
    c: Optional[float] = None
    c_ratio: Optional[float] = None
    label: Optional[str] = None

    @property
    def key(self) -> str:
        if self.label:
            return self.label
        if self.c is not None:
            return f"{self.name.value}(c={self.c:g})"
        if self.c_ratio is not None:
            return f"{self.name.value}(c/cbar={self.c_ratio:g})"
        return self.name.value

    def constant(self, dims: ModelDims, point_ratio: Optional[float] = None):
        """Tuning constant at ``dims``; None for estimators without one."""
        if self.name not in TUNABLE:
            return None
        if self.c is not None:
            return float(self.c)
        if self.name is CriterionName.MAICC:
            ref = float(cbar_value(dims.n, dims.p, dims.q))
        else:
            ref = maic_constant(dims.p, dims.q)
        ratio = self.c_ratio if self.c_ratio is not None else point_ratio
        return ref if ratio is None else float(ratio) * ref


@dataclass(frozen=True)
class GridPoint:
    """One truth configuration, already resolved to arrays."""

    index: int
    dims: ModelDims
    coef: np.ndarray  # B (p×q) or M (p×q) in the normal-mean setting
    Sigma: np.ndarray
    c_ratio: Optional[float]
    raw: dict = field(repr=False, compare=False)

    def axis_value(self, axis: Optional[str]):
        if axis is None:
            return float(self.index)
        if axis in self.raw:
            v = self.raw[axis]
            return float(v) if np.isscalar(v) else float(np.asarray(v).ravel()[0])
        sv = np.linalg.svd(self.coef, compute_uv=False)
        derived = {
            "sigma1": sv[0],
            "sigma2": sv[1] if sv.size > 1 else 0.0,
            "norm_beta": np.linalg.norm(self.coef),
            "n": self.dims.n,
            "p": self.dims.p,
            "q": self.dims.q,
            "r": self.Sigma[0, 1] / np.sqrt(self.Sigma[0, 0] * self.Sigma[1, 1])
            if self.dims.q > 1 else 0.0,
            "noise_var": self.Sigma[0, 0],
            "c_ratio": np.nan if self.c_ratio is None else self.c_ratio,
        }
        if axis not in derived:
            raise ValidationError(f"unknown sweep_axis {axis!r}")
        return float(derived[axis])


@dataclass(frozen=True)
class ExperimentSpec:
    setting: str
    dims: ModelDims
    grid: tuple
    estimators: tuple
    reps: int
    seed: int
    baseline: Optional[str] = None
    redraw_x: bool = True
    sweep_axis: Optional[str] = None
    candidate_orders: Optional[tuple] = None
    x_source: object = "generated"
    block_size: int = DEFAULT_BLOCK_SIZE

    @property
    def baseline_key(self) -> str:
        return self.baseline or self.estimators[0].key

    def with_overrides(self, seed=None, reps=None) -> "ExperimentSpec":
        from dataclasses import replace

        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if reps is not None:
            if int(reps) < 1:
                raise ValidationError("reps must be >= 1")
            kw["reps"] = int(reps)
        return replace(self, **kw)


def _sigma_for(point: dict, q: int) -> np.ndarray:
    given = [k for k in ("noise_var", "r", "Sigma") if k in point]
    if len(given) > 1 and set(given) != {"noise_var", "r"}:
        raise ValidationError(f"conflicting noise specifications {given}")
    var = float(point.get("noise_var", 1.0))
    if "Sigma" in point:
        S = np.asarray(point["Sigma"], dtype=np.float64).reshape(q, q)
    else:
        r = float(point.get("r", 0.0))
        S = np.full((q, q), r) + (1.0 - r) * np.eye(q)
        S = var * S
    cholesky(S, "Sigma")
    return S


def _coef_for(point: dict, p: int, q: int, setting: str) -> np.ndarray:
    keys = [k for k in ("norm_beta", "singular_values", "beta", "B", "M") if k in point]
    if len(keys) > 1:
        raise ValidationError(f"conflicting truth specifications {keys}")
    if not keys:
        return np.zeros((p, q))
    k = keys[0]
    if k == "norm_beta":
        return coefficients_from_singular_values(p, q, [float(point[k])])
    if k == "singular_values":
        return coefficients_from_singular_values(p, q, point[k])
    arr = np.asarray(point[k], dtype=np.float64)
    if k == "beta":
        arr = arr.reshape(-1, 1) if q == 1 else arr
    if arr.shape != (p, q):
        raise ValidationError(f"{k} must have shape ({p}, {q}), got {arr.shape}")
    return arr


def resolve_point(index: int, point: dict, base: ModelDims, setting: str) -> GridPoint:
    unknown = set(point) - POINT_KEYS
    if unknown:
        raise ValidationError(f"grid point {index}: unknown keys {sorted(unknown)}")
    p = int(point.get("p", base.p))
    q = int(point.get("q", base.q))
    n = int(point.get("n", base.n))
    if setting == "normal_mean":
        n = max(n, p)
    dims = ModelDims(n, p, q)
    coef = _coef_for(point, p, q, setting)
    Sigma = _sigma_for(point, q)
    c_ratio = point.get("c_ratio")
    return GridPoint(index, dims, coef, Sigma, None if c_ratio is None else float(c_ratio), dict(point))


def validate(spec: ExperimentSpec) -> None:
    """Raise :class:`ValidationError` unless every estimator is usable everywhere."""
    if spec.setting not in SETTINGS:
        raise ValidationError(f"setting must be one of {SETTINGS}, got {spec.setting!r}")
    if spec.reps < 1:
        raise ValidationError("reps must be >= 1")
    if not spec.grid:
        raise ValidationError("grid is empty")
    if not spec.estimators:
        raise ValidationError("no estimators given")
    if spec.block_size < 1:
        raise ValidationError("block_size must be >= 1")
    keys = [e.key for e in spec.estimators]
    if len(set(keys)) != len(keys):
        raise ValidationError(f"duplicate estimator labels {keys}; set 'label' to disambiguate")
    if spec.baseline_key not in keys:
        raise ValidationError(f"baseline {spec.baseline_key!r} is not among estimators {keys}")
    allowed = ALLOWED[spec.setting]
    for est in spec.estimators:
        if est.name not in allowed:
            raise ValidationError(
                f"{est.name.value} is not available in the {spec.setting!r} setting"
            )
    for pt in spec.grid:
        d = pt.dims
        if spec.setting == "normal_mean":
            if d.p < d.q:
                raise ValidationError(f"grid point {pt.index}: need p >= q")
            for est in spec.estimators:
                if est.name in (CriterionName.JOHNSTONE, CriterionName.SURE_VEC) and d.q != 1:
                    raise ValidationError(f"{est.name.value} needs q = 1")
            continue
        if d.n - d.p < d.q:
            raise ValidationError(
                f"grid point {pt.index}: n - p = {d.n - d.p} < q = {d.q}, SigmaHat would be singular"
            )
        for est in spec.estimators:
            if est.name in (CriterionName.AICC, CriterionName.MAICC) and d.dof_margin <= 0:
                raise ValidationError(
                    f"grid point {pt.index}: {est.name.value} needs n - p - q - 1 > 0"
                )
    if spec.candidate_orders is not None:
        p_max = max(pt.dims.p for pt in spec.grid)
        for k in spec.candidate_orders:
            if not 1 <= k <= p_max:
                raise ValidationError(f"candidate order {k} outside 1..{p_max}")


def _parse_estimator(obj) -> EstimatorSpec:
    if isinstance(obj, str):
        obj = {"name": obj}
    try:
        name = CriterionName(str(obj["name"]).upper())
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad estimator entry {obj!r}") from exc
    extra = set(obj) - {"name", "c", "c_ratio", "label"}
    if extra:
        raise ValidationError(f"estimator {obj['name']}: unknown keys {sorted(extra)}")
    c = obj.get("c")
    c_ratio = obj.get("c_ratio")
    if (c is not None or c_ratio is not None) and name not in TUNABLE:
        raise ValidationError(f"{name.value} has no tuning constant")
    if c is not None and c_ratio is not None:
        raise ValidationError(f"{name.value}: give c or c_ratio, not both")
    return EstimatorSpec(
        name,
        None if c is None else float(c),
        None if c_ratio is None else float(c_ratio),
        obj.get("label"),
    )


def spec_from_dict(doc: dict) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ValidationError("spec document must be a JSON object")
    unknown = set(doc) - SPEC_KEYS
    if unknown:
        raise ValidationError(f"unknown spec keys {sorted(unknown)}")
    for k in ("dims", "grid", "estimators", "reps", "seed"):
        if k not in doc:
            raise ValidationError(f"spec is missing {k!r}")
    setting = doc.get("setting", "regression")
    dims_doc = doc["dims"]
    try:
        p = int(dims_doc["p"])
        q = int(dims_doc["q"])
        n = int(dims_doc.get("n", p))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad dims {dims_doc!r}") from exc
    base = ModelDims(n, p, q)
    grid = tuple(resolve_point(i, pt, base, setting) for i, pt in enumerate(doc["grid"]))
    estimators = tuple(_parse_estimator(e) for e in doc["estimators"])
    seed = int(doc["seed"])
    if not 0 <= seed < 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    orders = doc.get("candidate_orders")
    spec = ExperimentSpec(
        setting=setting,
        dims=base,
        grid=grid,
        estimators=estimators,
        reps=int(doc["reps"]),
        seed=seed,
        baseline=doc.get("baseline"),
        redraw_x=bool(doc.get("redraw_x", True)),
        sweep_axis=doc.get("sweep_axis"),
        candidate_orders=None if orders is None else tuple(int(k) for k in orders),
        x_source=doc.get("x_source", "generated"),
        block_size=int(doc.get("block_size", DEFAULT_BLOCK_SIZE)),
    )
    validate(spec)
    return spec


BUNDLED_DIR = Path(__file__).resolve().parent.parent / "specs"


def bundled_specs() -> list:
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.json"))


def load_spec(path) -> ExperimentSpec:
    """Load a spec from a path, or by bare name from the bundled specs."""
    path = Path(path)
    if not path.exists():
        candidate = BUNDLED_DIR / (path.name if path.suffix == ".json" else path.name + ".json")
        if not candidate.exists():
            raise ValidationError(f"no spec file {str(path)!r} (bundled: {bundled_specs()})")
        path = candidate
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    spec = spec_from_dict(doc)
    if isinstance(spec.x_source, dict) and "file" in spec.x_source:
        f = Path(spec.x_source["file"])
        if not f.is_absolute():
            from dataclasses import replace

            spec = replace(spec, x_source={**spec.x_source, "file": str(path.parent / f)})
    return spec
