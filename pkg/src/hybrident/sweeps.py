"""Parameter sweeps, block-map export and serialized outputs."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .channels import LossSpec, apply_losses, phase_noise_channel
from .fock import DensityOperator, ModeSpace, PureState, TruncationError, partial_trace
from .metrics import (DEFAULT_GRID, block_origin_value, entanglement_negativity,
                      hybrid_blocks)
from .schemes import (SCHEMES, HeraldedState, SchemeParams, balancing_mu, central_r_for_mu, exact_scheme,
                      perturbative_scheme)
from .states import db_to_zeta, squeezed_vacuum_dim

OUTPUT_ENV = "HYBRIDENT_OUT"
CONVERGENCE_TOL = 1e-6
CONVERGENCE_STEP = 5
METRICS = ("negativity", "wigner0", "wigner1", "purity")
FORMATS = ("csv", "json")
# swept names that are not Scenario fields
ALIASES = {"eta": ("eta_a", "eta_b")}


@dataclass(frozen=True)
class Scenario:
    """One operating point of a generation scheme.

    ``mu`` is either a number or ``"balanced"`` for the scheme's balancing
    condition (the lossy one for the qubit scheme, the lossless one for the
    others).  ``model`` picks the perturbative closed-form states or the
    exact truncated evolution.  ``dim`` is a lower bound on the CV
    truncation; it is raised automatically to hold the squeezed source.
    """

    scheme: str = "qubit"
    squeezing_db: float = 3.0
    mu: Union[float, str] = 1.0
    eta_a: float = 1.0
    eta_b: float = 1.0
    sigma_deg: float = 0.0
    dim: int = 20
    model: str = "perturbative"
    tap_theta: float = 0.05
    tmss_lambda: float = 0.05

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.model not in ("perturbative", "exact"):
            raise ValueError(f"unknown model {self.model!r}")
        if isinstance(self.mu, str) and self.mu != "balanced":
            raise ValueError(f"mu must be a number or 'balanced', got {self.mu!r}")
        if self.squeezing_db < 0:
            raise ValueError("squeezing_db must be nonnegative")
        if self.scheme != "qubit" and self.squeezing_db == 0 and self.model == "exact":
            raise ValueError(f"the exact {self.scheme} scheme needs nonzero squeezing")
        if self.sigma_deg < 0:
            raise ValueError("sigma_deg must be nonnegative")
        if self.dim < 4:
            raise ValueError("dim must be at least 4")
        LossSpec(self.eta_a, self.eta_b)

    @property
    def zeta(self) -> float:
        return db_to_zeta(self.squeezing_db)

    @property
    def loss(self) -> LossSpec:
        return LossSpec(self.eta_a, self.eta_b)

    @property
    def unsqueezed_limit(self) -> bool:
        """True when the state is the zeta -> 0 limit of a scheme that needs squeezing."""
        return self.scheme != "qubit" and self.squeezing_db == 0

    def resolved_mu(self) -> float:
        if self.unsqueezed_limit:
            return math.inf if self.mu == "balanced" else float(self.mu)
        if self.mu == "balanced":
            loss = self.loss if self.scheme == "qubit" else None
            return balancing_mu(self.scheme, self.zeta, loss)
        return float(self.mu)

    def cv_dim(self) -> int:
        """Requested dim, raised until the subtracted squeezed vacua fit.

        The exact model keeps the requested dim since its cost grows as
        dim^4 or dim^5; too small a value raises TruncationError.
        """
        if self.model == "exact":
            return self.dim
        return max(self.dim, squeezed_vacuum_dim(self.zeta, extra=6))

    def with_param(self, name: str, value: float) -> "Scenario":
        if name in ALIASES:
            return replace(self, **{k: value for k in ALIASES[name]})
        return replace(self, **{name: value})


def sweepable() -> tuple[str, ...]:
    skip = {"scheme", "model", "dim"}
    return tuple(f.name for f in fields(Scenario) if f.name not in skip) + tuple(ALIASES)


def unsqueezed_limit_state(scheme: str, balanced: bool, dim: int, dv_dim: int) -> PureState:
    """zeta -> 0 limit of the enhanced and qutrit states.

    At fixed mu both collapse onto |0,0>.  With the balancing condition the
    weights stay comparable: the enhanced state tends to (|0,0> + |1,1>)/sqrt 2
    and the qutrit state to (|0> + |2>)|0>/sqrt 2.
    """
    vec = np.zeros((dv_dim, dim))
    vec[0, 0] = 1.0
    if balanced:
        if scheme == "enhanced":
            vec[1, 1] = 1.0
        else:
            vec[2, 0] = 1.0
    return PureState(ModeSpace((dv_dim, dim), ("A", "B")), vec.reshape(-1) / np.linalg.norm(vec))


def build_state(scn: Scenario, dim: Optional[int] = None) -> tuple[DensityOperator, float]:
    """Heralded state of ``scn`` with loss and phase noise, and its herald probability.

    Without squeezing the enhanced and qutrit heralds never fire at finite
    reflectivity, so their limit states are reported with probability 0.
    """
    dim = scn.cv_dim() if dim is None else dim
    mu = scn.resolved_mu()
    if scn.unsqueezed_limit:
        dv_dim = 2 if scn.scheme == "enhanced" else 3
        psi = unsqueezed_limit_state(scn.scheme, scn.mu == "balanced", dim, dv_dim)
        h = HeraldedState(apply_losses(psi.to_density(), scn.loss), 0.0, mu)
    elif scn.model == "perturbative":
        h = perturbative_scheme(scn.scheme, mu, scn.zeta, dim, loss=scn.loss,
                                tap_theta=scn.tap_theta, tmss_lambda=scn.tmss_lambda)
    else:
        p = SchemeParams(zeta=scn.zeta, tap_theta=scn.tap_theta, tap_theta0=scn.tap_theta,
                         tmss_lambda=scn.tmss_lambda, loss=scn.loss)
        p = replace(p, central_r=central_r_for_mu(mu, p))
        h = exact_scheme(scn.scheme, p, dim)
    rho = h.state
    if scn.sigma_deg > 0:
        rho = phase_noise_channel(rho, "A", math.radians(scn.sigma_deg))
    return rho, h.herald_probability


def compute_metric(name: str, rho: DensityOperator) -> float:
    if name == "negativity":
        return entanglement_negativity(rho, ["A"])
    if name == "wigner0":
        return block_origin_value(rho, 0)
    if name == "wigner1":
        return block_origin_value(rho, 1)
    if name == "purity":
        m = rho.matrix
        return float(np.real(np.vdot(m, m)))
    raise ValueError(f"unknown metric {name!r}; choose from {METRICS}")


@dataclass(frozen=True)
class Row:
    param: float
    metrics: dict
    prob: float
    converged: bool


def evaluate(scn: Scenario, metrics: Sequence[str] = ("negativity",), param: float = math.nan) -> Row:
    """Metrics at the auto-selected truncation, checked against dim + 5."""
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}; choose from {METRICS}")
    dim = scn.cv_dim()
    rho, prob = build_state(scn, dim)
    vals = {m: compute_metric(m, rho) for m in metrics}
    try:
        rho2, prob2 = build_state(scn, dim + CONVERGENCE_STEP)
        drift = max([abs(vals[m] - compute_metric(m, rho2)) for m in metrics] + [abs(prob - prob2)])
        converged = drift < CONVERGENCE_TOL
    except TruncationError:
        converged = False
    if not all(math.isfinite(v) for v in vals.values()):
        raise ArithmeticError(f"non-finite metric at {param}: {vals}")
    return Row(param, vals, prob, converged)


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep over a fixed :class:`Scenario`."""

    param: str
    start: float
    stop: float
    steps: int
    base: Scenario = field(default_factory=Scenario)
    metrics: tuple = ("negativity",)
    out: Optional[str] = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if self.param not in sweepable():
            raise ValueError(f"cannot sweep {self.param!r}; choose from {sweepable()}")
        if self.fmt not in FORMATS:
            raise ValueError(f"unknown format {self.fmt!r}")
        for m in self.metrics:
            if m not in METRICS:
                raise ValueError(f"unknown metric {m!r}; choose from {METRICS}")
        # validate the end points eagerly so errors surface before any work
        self.base.with_param(self.param, self.start)
        self.base.with_param(self.param, self.stop)

    def values(self) -> list[float]:
        if self.start == self.stop:
            return [float(self.start)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class SweepResult:
    """Sweep rows; ``param=None`` marks a single point without a parameter column."""

    param: Optional[str]
    metrics: tuple
    rows: tuple

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.rows)

    def records(self) -> list[dict]:
        out = []
        for r in self.rows:
            rec = {} if self.param is None else {self.param: r.param}
            rec.update((m, r.metrics[m]) for m in self.metrics)
            rec["prob"] = r.prob
            rec["converged"] = r.converged
            out.append(rec)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = [] if self.param is None else [self.param]
        w.writerow([*head, *self.metrics, "prob", "converged"])
        for rec in self.records():
            w.writerow([repr(v) if isinstance(v, float) else str(v).lower() for v in rec.values()])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.records(), indent=1) + "\n"

    def dumps(self, fmt: str = "csv") -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """Evaluate every sweep point; rows come back in parameter order.

    Points are evaluated on a thread pool; ``workers=1`` runs serially.  If
    ``spec.out`` is set the result is also written there.
    """
    values = spec.values()
    scns = [spec.base.with_param(spec.param, v) for v in values]
    workers = workers or min(len(values), os.cpu_count() or 1)

    def one(args):
        scn, v = args
        return evaluate(scn, spec.metrics, v)

    if workers <= 1:
        rows = [one(a) for a in zip(scns, values)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, zip(scns, values)))
    result = SweepResult(spec.param, tuple(spec.metrics), tuple(rows))
    if spec.out:
        write_text(spec.out, result.dumps(spec.fmt))
    return result


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _fmt_axis(name: str, axis) -> str:
    return f"# {name}: " + ",".join(repr(float(v)) for v in axis)


def write_grid(path, x_axis, p_axis, values: np.ndarray, part: str) -> Path:
    """CSV matrix with axis header lines; row i is x_axis[i], column j is p_axis[j]."""
    lines = [_fmt_axis("x", x_axis), _fmt_axis("p", p_axis), f"# part: {part}"]
    for row in np.asarray(values):
        lines.append(",".join(repr(float(v)) for v in row))
    return write_text(path, "\n".join(lines) + "\n")


def read_grid(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line:
            rows.append([float(v) for v in line.split(",")])
    x = np.array([float(v) for v in meta["x"].split(",")])
    p = np.array([float(v) for v in meta["p"].split(",")])
    return x, p, np.array(rows), meta["part"]


def emit_blocks(scheme: str, params: Optional[Scenario] = None, basis: str = "number",
                grid: Optional[tuple] = None, output=None) -> list[Path]:
    """Write the Wigner map of every block <k|rho|l> plus an ``index.json`` manifest.

    Diagonal and k > l blocks are written as real parts, k < l blocks as
    imaginary parts.  Returns the written paths, manifest last.
    """
    params = replace(params or Scenario(), scheme=scheme)
    x_axis, p_axis = grid if grid is not None else (DEFAULT_GRID, DEFAULT_GRID)
    output = Path(output) if output is not None else default_output_dir() / f"blocks_{scheme}"
    rho, prob = build_state(params)
    levels = 3 if scheme == "qutrit" else 2
    bg = hybrid_blocks(rho, basis, x_axis, p_axis, levels=levels)
    written = []
    entries = []
    for (k, l), g in sorted(bg.blocks.items()):
        part = "imag" if k < l else "real"
        vals = g.imag if part == "imag" else g.real
        name = f"block_{k}_{l}.csv"
        written.append(write_grid(output / name, g.x_axis, g.p_axis, vals, part))
        entries.append({"k": k, "l": l, "label": f"<{bg.labels[k]}|rho|{bg.labels[l]}>",
                        "part": part, "file": name, "min": float(vals.min()),
                        "max": float(vals.max())})
    dv = partial_trace(rho, ["A"]).matrix
    manifest = {"scheme": scheme, "basis": basis, "labels": list(bg.labels),
                "scenario": asdict(params), "herald_probability": prob,
                "dv_populations": [float(v) for v in np.real(np.diag(dv))[:levels]],
                "blocks": entries}
    written.append(write_text(output / "index.json", json.dumps(manifest, indent=1) + "\n"))
    return written
