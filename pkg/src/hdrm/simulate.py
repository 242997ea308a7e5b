"""Gaussian data generation, exact trace oracles and Monte Carlo experiments.

Experiments derive one independent stream per replication from
``SeedSequence(seed, spawn_key=(rep,))`` so their results depend only on
the seed, never on scheduling.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import engine
from .data import Dataset
from .estimators._common import SubsampleBudget, group_forms
from .estimators import homog, multi, single
from .exceptions import DegenerateError, DimensionError, HdrmError
from .hypotheses import HypothesisSpec, ProjectionPair, build_grouped, build_single

#: Largest ``a * d`` for which the oracle forms ``T Sigma_N T`` densely.
ORACLE_DENSE_CAP = 4000


@dataclass(frozen=True)
class CovarianceTemplate:
    """Parametric covariance: identity, compound symmetry, AR(1) or spike plus ridge.

    ``spike_plus_ridge`` is ``spike * v v' + ridge * I`` with unit ``v``.
    """

    kind: str
    d: int
    rho: float = 0.0
    spike: float = 1.0
    ridge: float = 0.0
    direction: tuple[float, ...] | None = None
    scale: float = 1.0

    @classmethod
    def identity(cls, d: int, scale: float = 1.0) -> CovarianceTemplate:
        return cls("identity", d, scale=scale)

    @classmethod
    def compound_symmetry(cls, d: int, rho: float, scale: float = 1.0) -> CovarianceTemplate:
        return cls("cs", d, rho=rho, scale=scale)

    @classmethod
    def ar1(cls, d: int, rho: float, scale: float = 1.0) -> CovarianceTemplate:
        return cls("ar1", d, rho=rho, scale=scale)

    @classmethod
    def spike_plus_ridge(cls, d: int, spike: float = 5.0, ridge: float = 0.1,
                         direction: Sequence[float] | None = None, scale: float = 1.0) -> CovarianceTemplate:
        v = tuple(float(x) for x in direction) if direction is not None else None
        return cls("spike", d, spike=spike, ridge=ridge, direction=v, scale=scale)

    def scaled(self, factor: float) -> CovarianceTemplate:
        return CovarianceTemplate(self.kind, self.d, self.rho, self.spike, self.ridge, self.direction,
                                  self.scale * factor)

    def _direction(self) -> np.ndarray:
        if self.direction is not None:
            v = np.asarray(self.direction, dtype=float)
            if v.shape != (self.d,):
                raise DimensionError(f"spike direction must have length {self.d}")
        else:
            # a non-constant default so that centering does not remove the spike
            v = np.arange(1.0, self.d + 1.0)
        return v / np.linalg.norm(v)

    def matrix(self) -> np.ndarray:
        d = self.d
        if self.kind == "identity":
            s = np.eye(d)
        elif self.kind == "cs":
            s = (1 - self.rho) * np.eye(d) + self.rho * np.ones((d, d))
        elif self.kind == "ar1":
            idx = np.arange(d)
            s = self.rho ** np.abs(idx[:, None] - idx[None, :])
        elif self.kind == "spike":
            v = self._direction()
            s = self.spike * np.outer(v, v) + self.ridge * np.eye(d)
        else:
            raise HdrmError(f"unknown covariance template {self.kind!r}")
        return self.scale * s

    def cholesky(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.matrix())
        except np.linalg.LinAlgError as exc:
            raise DegenerateError(f"covariance template {self.kind!r} is not positive definite") from exc

    @classmethod
    def parse(cls, text: str, d: int) -> CovarianceTemplate:
        """``identity``, ``cs:RHO``, ``ar1:RHO`` or ``spike:SPIKE,RIDGE``, optionally ``*SCALE``."""
        body, _, scale = text.strip().partition("*")
        scale_value = float(scale) if scale else 1.0
        name, _, args = body.partition(":")
        name = name.strip().lower()
        nums = [float(x) for x in args.split(",") if x.strip()]
        if name == "identity":
            return cls.identity(d, scale_value)
        if name == "cs":
            return cls.compound_symmetry(d, nums[0], scale_value)
        if name == "ar1":
            return cls.ar1(d, nums[0], scale_value)
        if name == "spike":
            spike, ridge = (nums + [5.0, 0.1][len(nums):])[:2]
            return cls.spike_plus_ridge(d, spike, ridge, scale=scale_value)
        raise HdrmError(f"unknown covariance template {text!r}")


def sample_dataset(
    templates: Sequence[CovarianceTemplate],
    n: Sequence[int],
    seed: int | np.random.Generator | None = None,
    means: Sequence[np.ndarray] | None = None,
) -> Dataset:
    """``X_ij = mu_i + chol(Sigma_i) z`` with independent standard normal ``z``."""
    if len(templates) != len(n):
        raise DimensionError("one covariance template per group required")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    groups = []
    for i, (tmpl, k) in enumerate(zip(templates, n)):
        if k < 1:
            raise DimensionError(f"group {i + 1} needs at least one subject")
        chol = tmpl.cholesky()
        x = rng.standard_normal((k, tmpl.d)) @ chol.T
        if means is not None:
            x = x + np.asarray(means[i], dtype=float)
        groups.append(x)
    return Dataset.from_groups(groups, [f"g{i + 1}" for i in range(len(groups))])


@dataclass(frozen=True)
class OracleReport:
    tr1: float
    tr2: float
    tr3: float
    eigenvalues: np.ndarray
    beta1: float
    f_p_exact: float
    tau_exact: float
    degenerate: bool = False


def sigma_n(templates: Sequence[CovarianceTemplate], n: Sequence[int]) -> np.ndarray:
    """Block diagonal ``sum_i (N / n_i) Sigma_i``."""
    N = sum(n)
    d = templates[0].d
    out = np.zeros((len(n) * d, len(n) * d))
    for i, (tmpl, k) in enumerate(zip(templates, n)):
        out[i * d:(i + 1) * d, i * d:(i + 1) * d] = N / k * tmpl.matrix()
    return out


def oracle(templates: Sequence[CovarianceTemplate], n: Sequence[int], pair: ProjectionPair,
           dense_cap: int = ORACLE_DENSE_CAP) -> OracleReport:
    """Exact traces and spectrum of ``T Sigma_N T``.

    The spectrum is taken from the reduced ``L Sigma_N L'`` with
    ``L = L_W kron L_S`` when companion factors exist.
    """
    a, d = len(n), templates[0].d
    if a * d > dense_cap:
        raise DimensionError(f"oracle limited to a*d <= {dense_cap}, got {a * d}")
    sn = sigma_n(templates, n)
    if pair.rank == 0:
        return OracleReport(0.0, 0.0, 0.0, np.zeros(0), 0.0, math.nan, math.nan, degenerate=True)
    if pair.lw is not None and pair.ls is not None:
        L = np.kron(pair.lw.L, pair.ls.L)
        m = L @ sn @ L.T
    else:
        t = pair.full()
        m = t @ sn @ t
    lam = np.sort(np.linalg.eigvalsh((m + m.T) / 2))[::-1]
    tr1, tr2, tr3 = (float(np.sum(lam**k)) for k in (1, 2, 3))
    if tr2 <= 0:
        return OracleReport(tr1, tr2, tr3, lam, 0.0, math.nan, math.nan, degenerate=True)
    f = tr2**3 / tr3**2
    return OracleReport(tr1, tr2, tr3, lam, float(lam[0] / math.sqrt(tr2)), f, 1.0 / f)


def component_traces(templates: Sequence[CovarianceTemplate], pair: ProjectionPair) -> dict:
    """Exact subplot-level traces used as unbiasedness targets."""
    ts = pair.ts.matrix
    m = [ts @ t.matrix() for t in templates]
    out = {}
    for i, mi in enumerate(m):
        out[("tr1", i)] = float(np.trace(mi))
        out[("tr2", i)] = float(np.trace(mi @ mi))
        out[("tr3", i)] = float(np.trace(mi @ mi @ mi))
        for r in range(i):
            out[("cross", i, r)] = float(np.trace(mi @ m[r]))
    return out


# Monte Carlo experiments

@dataclass(frozen=True)
class Design:
    """Covariance templates, group sizes and hypothesis for simulated data."""

    templates: tuple[CovarianceTemplate, ...]
    n: tuple[int, ...]
    hypothesis: str = "flat"
    cov_equal: bool = False
    subsampling: bool = False
    budget: str = "1000*N"

    @property
    def a(self) -> int:
        return len(self.n)

    @property
    def d(self) -> int:
        return self.templates[0].d

    def pair(self) -> ProjectionPair:
        spec = HypothesisSpec.parse(self.hypothesis)
        if self.a == 1:
            return build_single(spec, self.d)
        return build_grouped(spec, self.a, self.d)


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))


def replication_seed(seed: int, rep: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(rep, 1)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class LevelResult:
    rate: float
    se: float
    rejections: int
    replications: int
    alpha: float

    @property
    def z(self) -> float:
        nominal_se = math.sqrt(self.alpha * (1 - self.alpha) / self.replications) if 0 < self.alpha < 1 else 0.0
        return (self.rate - self.alpha) / nominal_se if nominal_se > 0 else 0.0


def _run(ds: Dataset, design: Design, pair: ProjectionPair, seed: int) -> engine.TestResult:
    if design.a == 1:
        return engine.run_single(ds, pair)
    return engine.run_grouped(ds, pair, cov_equal=design.cov_equal, subsampling=design.subsampling,
                              budget=design.budget, seed=seed)


def level_experiment(design: Design, alpha: float = 0.05, replications: int = 2000, seed: int = 0) -> LevelResult:
    """Rejection rate of the test on null data (all means zero)."""
    if replications < 100:
        raise HdrmError(f"level experiment needs at least 100 replications, got {replications}")
    pair = design.pair()
    rejections = 0
    for rep in range(replications):
        ds = sample_dataset(design.templates, design.n, replication_rng(seed, rep))
        result = _run(ds, design, pair, replication_seed(seed, rep))
        rejections += result.reject(alpha)
    rate = rejections / replications
    return LevelResult(rate, math.sqrt(rate * (1 - rate) / replications), rejections, replications, alpha)


ESTIMATORS = ("A1", "A2", "A3", "B_i1", "B2", "B_ir3", "B_i4", "B5", "B6*", "C1", "C2", "C3*")


def estimator_battery(ds: Dataset, pair: ProjectionPair, ids: Sequence[str], budget: int | None,
                      seed: int) -> dict[str, float]:
    """Evaluate several estimators on one dataset, sharing the transformed data.

    ``budget`` applies to the starred estimators only; the others are exact.
    """
    forms = group_forms(ds, pair)
    out = {}
    for key in ids:
        if key == "A1":
            out[key] = single.a1_from_forms(forms)
        elif key == "A2":
            out[key] = single.a2_from_forms(forms)
        elif key == "A3":
            out[key] = single.a3_from_forms(forms)
        elif key == "B_i1":
            out[key] = multi.b_i1_from_forms(forms, 0)
        elif key == "B2":
            out[key] = multi.b2_from_forms(forms)
        elif key == "B_ir3":
            out[key] = multi.b_ir3_from_forms(forms, 1, 0)
        elif key == "B_i4":
            out[key] = multi.b_i4_from_forms(forms, 0)
        elif key == "B5":
            out[key] = multi.b5_from_forms(forms)
        elif key == "B6*":
            out[key] = multi.b6_subsampled_from_forms(forms, budget, seed)
        elif key == "C1":
            out[key] = homog.c1_from_forms(forms)
        elif key == "C2":
            out[key] = homog.c2_from_forms(forms)
        elif key == "C3*":
            out[key] = homog.c3_subsampled_from_forms(forms, budget, seed)
        else:
            raise HdrmError(f"unknown estimator {key!r}; expected one of {', '.join(ESTIMATORS)}")
    return out


def estimator_targets(design: Design, pair: ProjectionPair) -> dict[str, float]:
    """Exact expectation of every estimator under ``design``."""
    comp = component_traces(design.templates, pair)
    rep = oracle(design.templates, design.n, pair)
    out = {
        "A1": rep.tr1, "A2": rep.tr2, "A3": rep.tr3,
        "B_i1": comp[("tr1", 0)], "B2": rep.tr1, "B_i4": comp[("tr2", 0)],
        "B5": rep.tr2, "B6*": rep.tr3,
        # pooled estimators target the first group's covariance (common under cov_equal)
        "C1": comp[("tr1", 0)], "C2": comp[("tr2", 0)], "C3*": comp[("tr3", 0)],
    }
    if design.a > 1:
        out["B_ir3"] = comp[("cross", 1, 0)]
    return out


@dataclass(frozen=True)
class UnbiasednessResult:
    estimator: str
    mean: float
    se: float
    target: float
    replications: int

    @property
    def z(self) -> float:
        if self.se == 0:
            return 0.0 if self.mean == self.target else math.inf
        return (self.mean - self.target) / self.se

    @property
    def passed(self) -> bool:
        return abs(self.z) <= 3.0


def unbiasedness_experiment(
    estimators: str | Sequence[str],
    design: Design,
    replications: int = 5000,
    seed: int = 0,
    progress: Callable[[int], None] | None = None,
) -> dict[str, UnbiasednessResult]:
    """Monte Carlo mean of each estimator against its exact target."""
    ids = (estimators,) if isinstance(estimators, str) else tuple(estimators)
    pair = design.pair()
    targets = estimator_targets(design, pair)
    budget = SubsampleBudget.parse(design.budget).resolve(sum(design.n))
    draws = np.empty((replications, len(ids)))
    for rep in range(replications):
        ds = sample_dataset(design.templates, design.n, replication_rng(seed, rep))
        vals = estimator_battery(ds, pair, ids, budget, replication_seed(seed, rep))
        draws[rep] = [vals[k] for k in ids]
        if progress is not None:
            progress(rep)
    means = draws.mean(axis=0)
    ses = draws.std(axis=0, ddof=1) / math.sqrt(replications)
    return {
        k: UnbiasednessResult(k, float(means[j]), float(ses[j]), targets[k], replications)
        for j, k in enumerate(ids)
    }


# configuration files and CSV output

RESULT_FIELDS = ("experiment", "estimate", "target", "se", "z", "pass")


@dataclass
class ExperimentConfig:
    name: str
    kind: str
    design: Design
    alpha: float = 0.05
    replications: int = 1000
    seed: int = 0
    estimators: tuple[str, ...] = field(default_factory=tuple)


def _bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise HdrmError(f"not a boolean: {text!r}")


def parse_config(text: str) -> list[ExperimentConfig]:
    """One experiment per ``[section]`` of a key = value file.

    Keys: ``type`` (level | unbiasedness), ``d``, ``n`` (comma list),
    ``covariance`` (template per group separated by ``;``, or one for all),
    ``hypothesis``, ``cov_equal``, ``subsampling``, ``budget``, ``alpha``,
    ``replications``, ``seed``, ``estimators`` (comma list).
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise HdrmError(f"cannot parse experiment config: {exc}") from exc
    out = []
    for name in parser.sections():
        sec = parser[name]
        try:
            d = int(sec["d"])
            n = tuple(int(x) for x in sec["n"].split(","))
            covs = [c for c in sec.get("covariance", "identity").split(";") if c.strip()]
            if len(covs) == 1:
                covs = covs * len(n)
            if len(covs) != len(n):
                raise HdrmError(f"[{name}] needs one covariance per group or a single one")
            design = Design(
                templates=tuple(CovarianceTemplate.parse(c, d) for c in covs),
                n=n,
                hypothesis=sec.get("hypothesis", "flat"),
                cov_equal=_bool(sec.get("cov_equal", "false")),
                subsampling=_bool(sec.get("subsampling", "false")),
                budget=sec.get("budget", "1000*N"),
            )
            kind = sec.get("type", "level").strip().lower()
            if kind not in ("level", "unbiasedness"):
                raise HdrmError(f"[{name}] unknown experiment type {kind!r}")
            ests = tuple(e.strip() for e in sec.get("estimators", "").split(",") if e.strip())
            out.append(ExperimentConfig(
                name=name, kind=kind, design=design,
                alpha=float(sec.get("alpha", "0.05")),
                replications=int(sec.get("replications", "1000")),
                seed=int(sec.get("seed", "0")),
                estimators=ests,
            ))
        except KeyError as exc:
            raise HdrmError(f"[{name}] missing key {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise HdrmError(f"[{name}] invalid value: {exc}") from exc
    if not out:
        raise HdrmError("experiment config defines no [sections]")
    return out


def run_config(cfg: ExperimentConfig) -> list[dict]:
    """Rows with the columns of :data:`RESULT_FIELDS`."""
    if cfg.kind == "level":
        res = level_experiment(cfg.design, cfg.alpha, cfg.replications, cfg.seed)
        lo, hi = cfg.alpha - 3 * math.sqrt(cfg.alpha * (1 - cfg.alpha) / cfg.replications), \
            cfg.alpha + 3 * math.sqrt(cfg.alpha * (1 - cfg.alpha) / cfg.replications)
        return [{
            "experiment": cfg.name, "estimate": res.rate, "target": cfg.alpha, "se": res.se,
            "z": res.z, "pass": lo <= res.rate <= hi,
        }]
    ids = cfg.estimators or ESTIMATORS
    results = unbiasedness_experiment(ids, cfg.design, cfg.replications, cfg.seed)
    return [
        {"experiment": f"{cfg.name}:{k}", "estimate": r.mean, "target": r.target, "se": r.se,
         "z": r.z, "pass": r.passed}
        for k, r in results.items()
    ]


def write_rows(rows: list[dict], handle: io.TextIOBase) -> None:
    writer = csv.DictWriter(handle, fieldnames=RESULT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def run_config_file(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise HdrmError(f"config file not found: {path}")
    rows = []
    for cfg in parse_config(path.read_text(encoding="utf-8")):
        rows.extend(run_config(cfg))
    return rows
