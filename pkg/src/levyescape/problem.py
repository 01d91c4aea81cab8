"""Problem specification and drift-landscape classification.

An ``EscapeProblem`` bundles the drift, the diffusion, the jump measure with
its intensity, the open interval the process starts in, and which side of the
exterior counts as the target.  ``classify_case`` sorts a pure-jump problem
into one of the four drift landscapes the singular expansion knows how to
handle: everywhere-positive drift, everywhere-negative drift, a single
unstable interior equilibrium, or a single stable interior equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import ConfigError, DomainValidationError
from .stable import FULL_POWER_LAW, TRUNCATED_POWER_LAW, LevyMeasureSpec, _check_alpha

TARGET_RIGHT = "right"
TARGET_LEFT = "left"

DEFAULT_SCAN_POINTS = 2048


@dataclass(frozen=True)
class DriftSpec:
    """Drift field b(x).

    Supported kinds: ``zero``, ``constant`` (value ``c``), ``linear_ou``
    (b(x) = -x), ``tumor`` (logistic growth with treatment loss,
    b(x) = x(1 - theta x) - beta_t x/(x+1)), and ``tabulated`` (monotone cubic
    interpolation of samples; evaluation outside the tabulated range is an
    error).
    """

    kind: str
    c: float | None = None
    theta: float | None = None
    beta_t: float | None = None
    grid: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if self.c is None:
                raise DomainValidationError("constant drift needs a value c")
        elif self.kind == "tumor":
            th, bt = self.theta, self.beta_t
            if th is None or bt is None or not 0 < th < 1:
                raise DomainValidationError("tumor drift needs 0 < theta < 1")
            if not 1 < bt < (th + 1) ** 2 / (4 * th):
                raise DomainValidationError(
                    "tumor drift needs 1 < beta_t < (theta+1)^2/(4 theta)"
                )
        elif self.kind == "tabulated":
            if self.grid is None or self.values is None or len(self.grid) != len(self.values):
                raise DomainValidationError("tabulated drift needs matching grid/values")
            if len(self.grid) < 4:
                raise DomainValidationError("tabulated drift needs at least 4 samples")
            if np.any(np.diff(self.grid) <= 0):
                raise DomainValidationError("tabulated grid must be strictly increasing")
        elif self.kind not in ("zero", "linear_ou"):
            raise DomainValidationError(f"unknown drift kind {self.kind!r}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, c: float):
        return cls("constant", c=float(c))

    @classmethod
    def linear_ou(cls):
        return cls("linear_ou")

    @classmethod
    def tumor(cls, theta: float, beta_t: float):
        return cls("tumor", theta=float(theta), beta_t=float(beta_t))

    @classmethod
    def tabulated(cls, grid, values):
        return cls("tabulated", grid=tuple(float(g) for g in grid),
                   values=tuple(float(v) for v in values))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(x)
        elif self.kind == "constant":
            out = np.full_like(x, self.c)
        elif self.kind == "linear_ou":
            out = -x
        elif self.kind == "tumor":
            out = x * (1.0 - self.theta * x) - self.beta_t * x / (x + 1.0)
        else:
            g = np.asarray(self.grid)
            if np.any(x < g[0] - 1e-12) or np.any(x > g[-1] + 1e-12):
                raise DomainValidationError("tabulated drift evaluated outside its grid")
            out = PchipInterpolator(g, np.asarray(self.values))(np.clip(x, g[0], g[-1]))
        return out if out.ndim else float(out)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


@dataclass(frozen=True)
class DiffusionSpec:
    """Diffusion field sigma(x): ``zero``, ``constant``, or ``tabulated``."""

    kind: str
    sigma0: float | None = None
    grid: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if self.sigma0 is None:
                raise DomainValidationError("constant diffusion needs sigma0")
        elif self.kind == "tabulated":
            if self.grid is None or self.values is None or len(self.grid) != len(self.values):
                raise DomainValidationError("tabulated diffusion needs matching grid/values")
        elif self.kind != "zero":
            raise DomainValidationError(f"unknown diffusion kind {self.kind!r}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, sigma0: float):
        return cls("constant", sigma0=float(sigma0))

    @classmethod
    def tabulated(cls, grid, values):
        return cls("tabulated", grid=tuple(float(g) for g in grid),
                   values=tuple(float(v) for v in values))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(x)
        elif self.kind == "constant":
            out = np.full_like(x, self.sigma0)
        else:
            g = np.asarray(self.grid)
            if np.any(x < g[0] - 1e-12) or np.any(x > g[-1] + 1e-12):
                raise DomainValidationError("tabulated diffusion evaluated outside its grid")
            out = PchipInterpolator(g, np.asarray(self.values))(np.clip(x, g[0], g[-1]))
        return out if out.ndim else float(out)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


@dataclass(frozen=True)
class EscapeProblem:
    """Scalar escape problem on an open interval (a, b).

    The process is dX = b(X) dt + sigma(X) dW + epsilon dL with L the
    unit-intensity jump motion described by ``measure``.  ``target`` picks the
    exterior side whose hitting counts as escape; the exterior data is 1 on
    the target side and 0 on the other, and is derived from ``target`` rather
    than stored.
    """

    drift: DriftSpec
    diffusion: DiffusionSpec
    epsilon: float
    alpha: float
    a: float
    b: float
    target: str = TARGET_RIGHT
    measure: LevyMeasureSpec | None = None

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.a < self.b:
            raise DomainValidationError("domain requires a < b")
        if self.epsilon < 0:
            raise DomainValidationError("epsilon must be nonnegative")
        if self.epsilon == 0 and self.diffusion.is_zero:
            raise DomainValidationError("epsilon = 0 requires a nonzero diffusion")
        if self.target not in (TARGET_RIGHT, TARGET_LEFT):
            raise DomainValidationError(f"target must be 'right' or 'left', got {self.target!r}")
        if self.measure is None:
            object.__setattr__(self, "measure", LevyMeasureSpec.full_power_law(self.alpha))
        elif self.measure.alpha != self.alpha:
            raise DomainValidationError("measure.alpha must match problem alpha")

    def exterior_values(self) -> tuple[float, float]:
        """(left, right) exterior data implied by the target side."""
        return (0.0, 1.0) if self.target == TARGET_RIGHT else (1.0, 0.0)

    def with_(self, **kw) -> "EscapeProblem":
        """Copy with fields replaced; re-syncs a default measure to alpha."""
        if "alpha" in kw and "measure" not in kw:
            if self.measure.kind == FULL_POWER_LAW:
                kw["measure"] = LevyMeasureSpec.full_power_law(kw["alpha"])
            else:
                kw["measure"] = LevyMeasureSpec.truncated_power_law(
                    kw["alpha"], self.measure.kappa
                )
        return replace(self, **kw)


@dataclass(frozen=True)
class CaseLabel:
    """Outcome of the drift-landscape classification.

    ``kind`` is one of ``case1`` (drift positive throughout), ``case2``
    (negative throughout), ``case3`` (single unstable equilibrium), ``case4``
    (single stable equilibrium), or ``unsupported``.  For case3/case4 the
    equilibrium ``x_eq`` and the drift slope there are recorded.
    """

    kind: str
    x_eq: float | None = None
    slope: float | None = None
    reason: str | None = None


def tumor_equilibria(theta: float, beta_t: float) -> tuple[float, float, float]:
    """The three rest points of the tumor drift, in increasing order.

    x1 = 0 is always a root; x2 < x3 are the roots of the quadratic factor
    theta x^2 - (1-theta) x + (beta_t - 1).  Parameters must satisfy
    0 < theta < 1 and 1 < beta_t < (theta+1)^2/(4 theta) so that the roots are
    real, distinct, and positive.
    """
    if not 0 < theta < 1:
        raise DomainValidationError("require 0 < theta < 1")
    if not 1 < beta_t < (theta + 1) ** 2 / (4 * theta):
        raise DomainValidationError("require 1 < beta_t < (theta+1)^2/(4 theta)")
    disc = (1 - theta) ** 2 - 4 * theta * (beta_t - 1)
    root = math.sqrt(disc)
    x2 = (1 - theta - root) / (2 * theta)
    x3 = (1 - theta + root) / (2 * theta)
    return 0.0, x2, x3


def classify_case(
    problem: EscapeProblem,
    scan_points: int = DEFAULT_SCAN_POINTS,
    eq_tol: float | None = None,
) -> CaseLabel:
    """Classify the drift landscape of a pure-jump problem.

    Scans b on a uniform closed grid; returns case1/case2 for single-signed
    drifts, locates a single sign change by bisection and returns case3/case4
    according to the slope there, and otherwise reports the sign-change count
    as unsupported.  The case4 route additionally requires the drift to be
    nonzero at both endpoints.
    """
    if scan_points < 8:
        raise DomainValidationError("scan_points too small")
    xs = np.linspace(problem.a, problem.b, scan_points)
    bs = np.asarray(problem.drift(xs), dtype=float)
    scale = float(np.max(np.abs(bs)))
    if eq_tol is None:
        eq_tol = 1e-9 * scale if scale > 0 else 1e-9
    if scale == 0.0:
        return CaseLabel("unsupported", reason="drift vanishes identically (0 sign changes)")
    if np.all(bs > eq_tol):
        return CaseLabel("case1")
    if np.all(bs < -eq_tol):
        return CaseLabel("case2")

    signs = np.where(bs > eq_tol, 1, np.where(bs < -eq_tol, -1, 0))
    nonzero = signs[signs != 0]
    flips = int(np.count_nonzero(np.diff(nonzero) != 0))
    if flips != 1:
        return CaseLabel("unsupported", reason=f"{flips} sign changes detected")

    # bracket the single crossing: last node of the first sign run (zeros
    # skipped) against the first node carrying the opposite sign
    first_sign = nonzero[0]
    nz_idx = np.nonzero(signs)[0]
    k = int(nz_idx[np.argmax(signs[nz_idx] != first_sign)])
    j = int(nz_idx[nz_idx < k][-1])
    x_eq = brentq(lambda t: float(problem.drift(t)), xs[j], xs[k], xtol=1e-14, rtol=8.9e-16)

    h = max(1e-7 * (problem.b - problem.a), 1e-9)
    slope = (float(problem.drift(x_eq + h)) - float(problem.drift(x_eq - h))) / (2 * h)
    if slope > 0:
        return CaseLabel("case3", x_eq=x_eq, slope=slope)
    if slope < 0:
        b_a = float(problem.drift(problem.a))
        b_b = float(problem.drift(problem.b))
        if abs(b_a) <= eq_tol or abs(b_b) <= eq_tol:
            return CaseLabel(
                "unsupported",
                reason="stable-equilibrium route requires nonzero drift at both endpoints",
            )
        return CaseLabel("case4", x_eq=x_eq, slope=slope)
    return CaseLabel("unsupported", reason="flat equilibrium (zero slope)")


# ---------------------------------------------------------------------------
# problem files: flat key = value text
# ---------------------------------------------------------------------------

def _parse_params(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    if not text.strip():
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ConfigError(f"malformed parameter entry {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise ConfigError(f"non-numeric parameter {item!r}") from exc
    return out


def parse_problem_text(text: str) -> EscapeProblem:
    """Parse the flat key = value problem format (see ``parse_problem_file``)."""
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        kv[key.strip()] = val.strip()

    def need(key: str) -> str:
        if key not in kv:
            raise ConfigError(f"missing required key {key!r}")
        return kv[key]

    def fnum(key: str) -> float:
        try:
            return float(need(key))
        except ValueError as exc:
            raise ConfigError(f"key {key!r} is not a number: {kv[key]!r}") from exc

    drift_kind = need("drift.kind").lower()
    dp = _parse_params(kv.get("drift.params", ""))
    try:
        if drift_kind == "zero":
            drift = DriftSpec.zero()
        elif drift_kind == "constant":
            drift = DriftSpec.constant(dp["c"])
        elif drift_kind == "linear_ou":
            drift = DriftSpec.linear_ou()
        elif drift_kind == "tumor":
            drift = DriftSpec.tumor(dp["theta"], dp["beta_t"])
        else:
            raise ConfigError(f"unsupported drift.kind {drift_kind!r} in problem files")
    except KeyError as exc:
        raise ConfigError(f"drift.params missing entry {exc}") from exc

    diff_kind = kv.get("diffusion.kind", "zero").lower()
    sp = _parse_params(kv.get("diffusion.params", ""))
    try:
        if diff_kind == "zero":
            diffusion = DiffusionSpec.zero()
        elif diff_kind == "constant":
            diffusion = DiffusionSpec.constant(sp["sigma0"])
        else:
            raise ConfigError(f"unsupported diffusion.kind {diff_kind!r} in problem files")
    except KeyError as exc:
        raise ConfigError(f"diffusion.params missing entry {exc}") from exc

    alpha = fnum("alpha")
    measure_kind = kv.get("measure.kind", "full").lower()
    if measure_kind in ("full", "full_power_law"):
        measure = LevyMeasureSpec.full_power_law(alpha)
    elif measure_kind in ("truncated", "truncated_power_law"):
        measure = LevyMeasureSpec.truncated_power_law(alpha, fnum("measure.kappa"))
    else:
        raise ConfigError(f"unknown measure.kind {measure_kind!r}")

    target = kv.get("target", TARGET_RIGHT).lower()
    if target not in (TARGET_RIGHT, TARGET_LEFT):
        raise ConfigError("target must be 'right' or 'left'")

    try:
        return EscapeProblem(
            drift=drift,
            diffusion=diffusion,
            epsilon=fnum("epsilon"),
            alpha=alpha,
            a=fnum("domain.a"),
            b=fnum("domain.b"),
            target=target,
            measure=measure,
        )
    except DomainValidationError as exc:
        raise ConfigError(str(exc)) from exc


def parse_problem_file(path: str | Path) -> EscapeProblem:
    """Load an ``EscapeProblem`` from a flat key = value text file.

    Recognized keys: drift.kind, drift.params, diffusion.kind,
    diffusion.params, epsilon, alpha, measure.kind, measure.kappa, domain.a,
    domain.b, target.  ``#`` starts a comment.
    """
    return parse_problem_text(Path(path).read_text())
