"""Perturbation schemes and the stability experiment runner.

Each run perturbs a base measure along a schedule, re-evaluates the
mean-risk objective on the decision grid, and reports per step the weak
distance, the gauge-weighted distance, the optimal-value drift, the sup
deviation of Q, and the one-sided argmin excess — always against the base
measure, since the theory is about continuity at the base.  A uniform
integrability diagnosis of the generated family travels with the report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptySet,
    InvalidSpec,
    MeanRiskError,
    OutOfRange,
    UnknownColumn,
)
from .measure import (
    DiscreteMeasure,
    canonicalize,
    empirical,
    measure_sampler,
    mix,
)
from .metrics import bounded_lipschitz, diagnose_uniform_integrability, psi_metric
from .objective import MeanRiskModel, argmin_set, q_profile

COLUMNS = ("step", "param", "d_bl", "d_psi", "delta_phi_abs", "sup_delta_q", "argmin_excess", "error")

SCHEME_KINDS = ("saa", "contamination", "jitter", "discretize")


@dataclass(frozen=True)
class PerturbationScheme:
    """One of four perturbation families:

    saa            empirical measures of the base, sizes n_schedule
    contamination  (1-t) base + t direction, t_schedule decreasing
    jitter         coordinate-wise uniform noise of half-width sigma
    discretize     atoms snapped to a grid of increasing resolution
    """

    kind: str
    n_schedule: tuple = ()
    seed: int = 0
    direction: DiscreteMeasure | None = None
    t_schedule: tuple = ()
    sigma_schedule: tuple = ()
    grid_schedule: tuple = ()

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise InvalidSpec(f"unknown scheme kind {self.kind!r}")
        object.__setattr__(self, "n_schedule", tuple(int(n) for n in self.n_schedule))
        object.__setattr__(self, "t_schedule", tuple(float(t) for t in self.t_schedule))
        object.__setattr__(self, "sigma_schedule", tuple(float(s) for s in self.sigma_schedule))
        object.__setattr__(self, "grid_schedule", tuple(float(g) for g in self.grid_schedule))
        if self.kind == "saa":
            ns = self.n_schedule
            if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
                raise InvalidSpec("saa needs a strictly increasing positive n_schedule")
        if self.kind == "contamination":
            ts = self.t_schedule
            if self.direction is None or not ts:
                raise InvalidSpec("contamination needs a direction and a t_schedule")
            if any(not (0.0 <= t <= 1.0) for t in ts) or any(
                b >= a for a, b in zip(ts, ts[1:])
            ):
                raise InvalidSpec("t_schedule must strictly decrease within [0,1]")
        if self.kind == "jitter":
            ss = self.sigma_schedule
            if not ss or any(s <= 0 for s in ss) or any(b >= a for a, b in zip(ss, ss[1:])):
                raise InvalidSpec("sigma_schedule must be positive and strictly decreasing")
        if self.kind == "discretize":
            gs = self.grid_schedule
            if not gs or any(g <= 0 for g in gs) or any(b <= a for a, b in zip(gs, gs[1:])):
                raise InvalidSpec("grid_schedule must be positive and strictly increasing")

    @property
    def params(self) -> tuple:
        return {
            "saa": self.n_schedule,
            "contamination": self.t_schedule,
            "jitter": self.sigma_schedule,
            "discretize": self.grid_schedule,
        }[self.kind]

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "saa":
            out["n_schedule"] = list(self.n_schedule)
            out["seed"] = int(self.seed)
        elif self.kind == "contamination":
            out["direction"] = self.direction.to_dict()
            out["t_schedule"] = list(self.t_schedule)
        elif self.kind == "jitter":
            out["sigma_schedule"] = list(self.sigma_schedule)
            out["seed"] = int(self.seed)
        else:
            out["grid_schedule"] = list(self.grid_schedule)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationScheme":
        kind = data["kind"]
        return cls(
            kind=kind,
            n_schedule=tuple(data.get("n_schedule", ())),
            seed=int(data.get("seed", 0)),
            direction=(
                DiscreteMeasure.from_dict(data["direction"]) if "direction" in data else None
            ),
            t_schedule=tuple(data.get("t_schedule", ())),
            sigma_schedule=tuple(data.get("sigma_schedule", ())),
            grid_schedule=tuple(data.get("grid_schedule", ())),
        )


def generate_sequence(scheme: PerturbationScheme, base: DiscreteMeasure):
    """Deterministic perturbed sequence; per-step randomness is keyed by
    (seed, step index) so steps are independent of evaluation order."""
    out = []
    if scheme.kind == "saa":
        sampler = measure_sampler(base)
        for k, n in enumerate(scheme.n_schedule):
            out.append(empirical(sampler, n, seed=(scheme.seed, k)))
    elif scheme.kind == "contamination":
        for t in scheme.t_schedule:
            out.append(mix(base, scheme.direction, t))
    elif scheme.kind == "jitter":
        for k, sigma in enumerate(scheme.sigma_schedule):
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence((scheme.seed, k)))
            )
            noise = rng.uniform(-sigma, sigma, size=base.points.shape)
            out.append(
                canonicalize(list(zip(base.points + noise, base.weights)))
            )
    else:
        for res in scheme.grid_schedule:
            snapped = np.round(base.points * res) / res
            out.append(canonicalize(list(zip(snapped, base.weights))))
    return out


@dataclass(frozen=True)
class StabilityRow:
    step: int
    param: float
    d_bl: float
    d_psi: float
    delta_phi_abs: float
    sup_delta_q: float
    argmin_excess: float
    error: str = ""

    def as_list(self):
        return [
            self.step,
            self.param,
            self.d_bl,
            self.d_psi,
            self.delta_phi_abs,
            self.sup_delta_q,
            self.argmin_excess,
            self.error,
        ]


@dataclass(frozen=True)
class StabilityReport:
    rows: tuple
    ui_verdict: bool
    ui_sup_tails: tuple
    ui_grid: tuple
    metadata: dict = field(compare=False)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS or name == "error":
            raise UnknownColumn(f"no numeric column {name!r}")
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv_text(self) -> str:
        lines = [",".join(COLUMNS)]
        for r in self.rows:
            vals = r.as_list()
            lines.append(
                ",".join(str(v) if isinstance(v, (int, str)) else repr(v) for v in vals)
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "columns": list(COLUMNS),
            "rows": [r.as_list() for r in self.rows],
            "uniform_integrability": {
                "verdict": bool(self.ui_verdict),
                "grid": list(self.ui_grid),
                "sup_tails": list(self.ui_sup_tails),
            },
            "metadata": self.metadata,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1) + "\n"


def argmin_excess(candidate, reference) -> float:
    """One-sided Hausdorff excess max_{x in candidate} min_{x' in reference}
    ||x - x'||; zero iff the candidate set is contained in the reference."""
    cand = np.atleast_2d(np.asarray(getattr(candidate, "points", candidate), dtype=float))
    ref = np.atleast_2d(np.asarray(getattr(reference, "points", reference), dtype=float))
    if cand.size == 0 or ref.size == 0:
        raise EmptySet("argmin excess needs nonempty sets")
    d = np.linalg.norm(cand[:, None, :] - ref[None, :, :], axis=2)
    return float(np.max(np.min(d, axis=1)))


def _default_ui_grid(base: DiscreteMeasure, q: float) -> np.ndarray:
    """Threshold grid topping out at 1e3 times the base measure's own
    gauge scale, so families escaping far beyond the base fail the verdict
    while compactly supported perturbations pass."""
    scale = max(1.0, float(np.max(base.norms()) ** q))
    return np.logspace(0.0, np.log10(1e3 * scale), 25)


def run_experiment(
    model: MeanRiskModel,
    base: DiscreteMeasure,
    scheme: PerturbationScheme | None = None,
    sequence=None,
    params=None,
    argmin_tol: float = 1e-8,
    ui_grid=None,
    ui_eps: float = 1e-9,
) -> StabilityReport:
    """Measure stability of phi and the argmin map along a perturbation
    path.  Either a scheme or an explicit measure sequence must be given;
    a step whose evaluation fails carries an error marker instead of
    aborting the run."""
    if sequence is None:
        if scheme is None:
            raise InvalidSpec("need a scheme or an explicit sequence")
        sequence = generate_sequence(scheme, base)
        params = list(scheme.params)
    if params is None:
        params = list(range(1, len(sequence) + 1))
    if len(params) != len(sequence):
        raise InvalidSpec("one param per generated measure required")

    qp = model.gamma * model.p
    base_q = q_profile(model, base)
    base_phi = float(np.min(base_q))
    base_arg = argmin_set(model, base, argmin_tol)

    rows = []
    for k, (nu, par) in enumerate(zip(sequence, params)):
        d_bl = bounded_lipschitz(nu, base)
        d_psi = psi_metric(nu, base, qp)
        try:
            qk = q_profile(model, nu)
            sup_dq = float(np.max(np.abs(qk - base_q)))
            dphi = abs(float(np.min(qk)) - base_phi)
            exc = argmin_excess(argmin_set(model, nu, argmin_tol), base_arg)
            rows.append(
                StabilityRow(k, float(par), d_bl, d_psi, dphi, sup_dq, exc)
            )
        except MeanRiskError as err:
            rows.append(
                StabilityRow(
                    k, float(par), d_bl, d_psi, float("nan"), float("nan"), float("nan"),
                    error=f"{type(err).__name__}: {err}",
                )
            )

    grid = np.asarray(ui_grid, dtype=float) if ui_grid is not None else _default_ui_grid(base, qp)
    ui = diagnose_uniform_integrability(list(sequence) + [base], qp, grid, eps=ui_eps)

    metadata = {
        "model_hash": model.digest(),
        "base_hash": base.digest(),
        "scheme": scheme.to_dict() if scheme is not None else {"kind": "explicit"},
        "seed": int(scheme.seed) if scheme is not None else None,
        "gauge_exponent": qp,
        "argmin_tol": argmin_tol,
    }
    return StabilityReport(
        rows=tuple(rows),
        ui_verdict=ui.verdict,
        ui_sup_tails=tuple(float(v) for v in ui.sup_tails),
        ui_grid=tuple(float(a) for a in ui.a_grid),
        metadata=metadata,
    )


@dataclass(frozen=True)
class TrendResult:
    passed: bool
    slope: float
    first: float
    last: float


def trend_check(report: StabilityReport, column: str, factor: float) -> TrendResult:
    """Gate: last value <= first value / factor; also fits the slope of
    log(value) against log(step index) over the positive entries."""
    if not (factor > 1.0):
        raise OutOfRange("factor must exceed 1")
    values = report.column(column)
    if len(values) < 3:
        raise OutOfRange("trend check needs at least 3 rows")
    first, last = float(values[0]), float(values[-1])
    passed = bool(last <= first / factor)
    steps = np.arange(1, len(values) + 1, dtype=float)
    pos = values > 0
    if np.count_nonzero(pos) >= 2:
        x = np.log(steps[pos])
        y = np.log(values[pos])
        slope = float(np.polyfit(x, y, 1)[0])
    else:
        slope = 0.0
    return TrendResult(passed=passed, slope=slope, first=first, last=last)
