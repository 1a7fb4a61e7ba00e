"""Experiment engine: time stepping, method lanes, comparison reports, file output.

An experiment is a JSON-described run of one solution method (or all of them
side by side) for a hermitian Hamiltonian linear in the generators.  The
configured coefficients always describe the physical Hamiltonian

    H = ε_a·a + ε̄_a·a† + ε₀·K₀ + ε₊·K₊ + ε₋·K₋   (or its n-mode analogue);

the engine routes them to each method in that method's own convention — the
coherent-state lanes receive ``conjugation_dictionary``-translated
coefficients, the product-of-exponentials lane uses them as-is — so all lanes
integrate the same physics and can be compared pointwise on a common chart.

Methods: berezin-disk | berezin-fc | berezin-ball | wei-norman |
riccati-linearized | fock-oracle | compare-all.

Output: a flat CSV trajectory (`t, state columns, phi_D, phi_B, phi, energy,
margin`, header names the chart) and a JSON report with margins, drifts,
residuals, and in compare mode pairwise deviations.  Identical config and
build produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.linalg import expm

from .algebra import (
    BallCoefficients,
    ComplexCoefficients,
    RealCoefficients,
    coeffs_from_real,
    coeffs_to_real,
)
from .berezin import (
    PhaseRecord,
    _berry_raw,
    _energy_raw,
    _rhs_ball_raw,
    _rhs_disk_raw,
    _rhs_fc_raw,
    hc_matrix,
)
from .fockoracle import FockBasisSpec, chart_state_vector, hamiltonian_matrix
from .geometry import BargmannIndex, _ball_margin
from .weinorman import (
    RealState,
    conjugation_dictionary,
    quasienergy_coeffs,
    wn_phase_rhs,
    wn_rhs,
)

__all__ = [
    "GRID_STEPS_MAX",
    "RK45_ATOL",
    "RK45_RTOL",
    "DEFAULT_TOLERANCES",
    "ConfigError",
    "InvariantViolation",
    "StepUnderflowError",
    "TimeGrid",
    "Trajectory",
    "ExperimentConfig",
    "integrate",
    "run_experiment",
]

GRID_STEPS_MAX = 10**7
RK45_ATOL = 1e-10
RK45_RTOL = 1e-8

#: compare/oracle gate defaults (overridable per config)
DEFAULT_TOLERANCES = {"state": 1e-8, "phase": 1e-6, "fidelity": 1.0 - 1e-6}

SCALAR_METHODS = ("berezin-disk", "berezin-fc", "wei-norman", "fock-oracle")
BALL_METHODS = ("berezin-ball", "riccati-linearized")
METHODS = SCALAR_METHODS + BALL_METHODS + ("compare-all",)


class ConfigError(ValueError):
    """Invalid experiment configuration; message starts with the field path."""

    def __init__(self, path: str, msg: str) -> None:
        super().__init__(f"{path}: {msg}")
        self.path = path


class InvariantViolation(RuntimeError):
    """A chart invariant (|w|<1, ball positivity) failed during integration."""


class StepUnderflowError(RuntimeError):
    """The adaptive integrator could not meet tolerances at any usable step."""


# --- grid and trajectory ---------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid; `step` is also the fixed RK4 step."""

    t0: float
    t1: float
    step: float

    def __post_init__(self) -> None:
        t0, t1, step = float(self.t0), float(self.t1), float(self.step)
        if not (np.isfinite(t0) and np.isfinite(t1) and np.isfinite(step)):
            raise ValueError("grid bounds and step must be finite")
        if not t1 > t0:
            raise ValueError(f"t1 must exceed t0, got [{t0}, {t1}]")
        if not step > 0:
            raise ValueError(f"step must be > 0, got {step}")
        if (t1 - t0) / step > GRID_STEPS_MAX:
            raise ValueError(f"(t1-t0)/step exceeds {GRID_STEPS_MAX:.0e}")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "step", step)

    def times(self) -> np.ndarray:
        """Samples t0, t0+step, ...; the final sample lands exactly on t1."""
        n = int(math.ceil((self.t1 - self.t0) / self.step - 1e-12))
        ts = self.t0 + self.step * np.arange(n + 1)
        ts[-1] = self.t1
        return ts


@dataclass(frozen=True)
class Trajectory:
    """Sampled trajectory on one chart, with phases and per-sample diagnostics."""

    times: np.ndarray
    chart: str
    states: np.ndarray  # (N, m) complex rows, layout set by `chart`
    phases: tuple[PhaseRecord, ...]
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise ValueError("times and states must have matching lengths")
        if len(self.phases) != times.size:
            raise ValueError("phases must have one record per sample")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        for key, arr in self.diagnostics.items():
            if np.asarray(arr).shape != (times.size,):
                raise ValueError(f"diagnostic {key!r} must have one value per sample")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)


Observer = Callable[[float, np.ndarray], tuple[np.ndarray, PhaseRecord, dict[str, float]]]
Guard = Callable[[float, np.ndarray], None]


# --- integrators -------------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _rk4_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk45_span(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    t_end: float,
    h0: float,
) -> tuple[np.ndarray, float]:
    """Adaptive Dormand-Prince from t to t_end; returns (y(t_end), last h)."""
    span = t_end - t
    h = min(h0, span)
    h_min = 1e-14 * max(1.0, abs(t_end))
    while t < t_end - 1e-15 * max(1.0, abs(t_end)):
        h = min(h, t_end - t)
        if h < h_min:
            raise StepUnderflowError(f"step underflow at t={t:.6g} (h={h:.3e})")
        ks = [rhs(t, y)]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
            ks.append(rhs(t + _DP_C[i] * h, yi))
        y5 = y + h * sum(b * k for b, k in zip(_DP_B5, ks))
        err_vec = h * sum((b5 - b4) * k for b5, b4, k in zip(_DP_B5, _DP_B4, ks))
        scale = RK45_ATOL + RK45_RTOL * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.max(np.abs(err_vec) / scale)) if y.size else 0.0
        if err <= 1.0:
            t += h
            y = y5
        factor = 0.9 * (err ** -0.2) if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return y, h


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    grid: TimeGrid,
    method: str = "rk4",
    *,
    chart: str = "raw",
    observer: Observer | None = None,
    guard: Guard | None = None,
) -> Trajectory:
    """Integrate ẏ = rhs(t, y) over the grid, sampling at every grid time.

    "rk4" takes one fixed step per grid interval; "rk45" is adaptive
    Dormand-Prince (atol 1e−10, rtol 1e−8) between samples.  `guard` is
    called at every sample and may raise :class:`InvariantViolation`; the
    integration then aborts with time context.  `observer` maps (t, y) to
    (complex state row, PhaseRecord, diagnostics) for the trajectory record.
    """
    if method not in ("rk4", "rk45"):
        raise ValueError(f"unknown integration method {method!r}")
    times = grid.times()
    y = np.asarray(y0, dtype=float).copy()

    def default_observer(t: float, yv: np.ndarray) -> tuple[np.ndarray, PhaseRecord, dict[str, float]]:
        return yv.astype(complex), PhaseRecord(0.0, 0.0), {}

    obs = observer or default_observer

    def checked_rhs(t: float, yv: np.ndarray) -> np.ndarray:
        # a chart violation at an RK stage point aborts with time context
        try:
            return np.asarray(rhs(t, yv), dtype=float)
        except (InvariantViolation, ValueError) as exc:
            raise InvariantViolation(f"at t={t:.6g}: {exc}") from exc

    rows: list[np.ndarray] = []
    phases: list[PhaseRecord] = []
    diags: dict[str, list[float]] = {}
    h_adaptive = grid.step

    for i, t in enumerate(times):
        if guard is not None:
            try:
                guard(t, y)
            except InvariantViolation as exc:
                raise InvariantViolation(f"at t={t:.6g}: {exc}") from exc
        row, ph, dg = obs(t, y)
        rows.append(np.asarray(row, dtype=complex))
        phases.append(ph)
        for key, val in dg.items():
            diags.setdefault(key, []).append(float(val))
        if i + 1 == times.size:
            break
        t_next = times[i + 1]
        if method == "rk4":
            y = _rk4_step(checked_rhs, t, y, t_next - t)
        else:
            y, h_adaptive = _rk45_span(checked_rhs, t, y, t_next, h_adaptive)

    return Trajectory(
        times=times,
        chart=chart,
        states=np.vstack(rows),
        phases=tuple(phases),
        diagnostics={k: np.asarray(v) for k, v in diags.items()},
    )


# --- configuration ------------------------------------------------------------------


def _req(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return obj[key]


def _as_float(val: Any, path: str) -> float:
    try:
        return float(val)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {val!r}") from None


def _complex_from_pair(val: Any, path: str) -> complex:
    if not (isinstance(val, (list, tuple)) and len(val) == 2):
        raise ConfigError(path, f"expected [re, im], got {val!r}")
    return complex(_as_float(val[0], path), _as_float(val[1], path))


def _parse_coefficients(obj: Any, path: str) -> ComplexCoefficients | BallCoefficients:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    try:
        if "n" in obj:
            return BallCoefficients.from_json(obj)
        if "eps_a_re" in obj:
            return ComplexCoefficients.from_json(obj)
        if "nu1" in obj or "veps0" in obj:
            return coeffs_from_real(
                RealCoefficients(
                    nu1=_as_float(obj.get("nu1", 0.0), f"{path}.nu1"),
                    nu2=_as_float(obj.get("nu2", 0.0), f"{path}.nu2"),
                    veps0=_as_float(obj.get("veps0", 0.0), f"{path}.veps0"),
                    veps1=_as_float(obj.get("veps1", 0.0), f"{path}.veps1"),
                    veps2=_as_float(obj.get("veps2", 0.0), f"{path}.veps2"),
                )
            )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path, "unrecognized coefficient form (complex, real, or ball keys required)")


@dataclass(frozen=True)
class _Segment:
    until: float
    coefficients: ComplexCoefficients | BallCoefficients


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; build with :meth:`from_json`."""

    method: str
    grid: TimeGrid
    segments: tuple[_Segment, ...]
    initial_chart: str  # "product" | "fc"
    initial_state: np.ndarray  # n=1: [first, w]; ball: [z.., W row-major..]
    n: int
    ball_form: bool
    k: BargmannIndex
    integrator: str = "rk4"
    csv_path: str | None = None
    report_path: str | None = None
    fock_dim: int | None = None
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config", "top level must be an object")
        method = _req(obj, "method", "config")
        if method not in METHODS:
            raise ConfigError("config.method", f"unknown method {method!r}; choose from {METHODS}")

        gobj = _req(obj, "grid", "config")
        try:
            grid = TimeGrid(
                t0=_as_float(_req(gobj, "t0", "config.grid"), "config.grid.t0"),
                t1=_as_float(_req(gobj, "t1", "config.grid"), "config.grid.t1"),
                step=_as_float(_req(gobj, "step", "config.grid"), "config.grid.step"),
            )
        except ValueError as exc:
            raise ConfigError("config.grid", str(exc)) from exc

        segments = cls._parse_segments(obj, grid)
        ball_form = isinstance(segments[0].coefficients, BallCoefficients)
        n = segments[0].coefficients.n if ball_form else 1

        # ball-form coefficients drive the coherent-state matrix equations
        # directly; the scalar methods need the scalar Hamiltonian convention
        if ball_form and method in SCALAR_METHODS:
            raise ConfigError(
                "config.method", f"{method} requires the complex or real coefficient form"
            )

        chart, state = cls._parse_initial(_req(obj, "initial", "config"), n)

        k = BargmannIndex(_as_float(obj.get("k", 0.25), "config.k"))

        integrator = obj.get("integrator", "rk4")
        if integrator not in ("rk4", "rk45"):
            raise ConfigError("config.integrator", f"expected 'rk4' or 'rk45', got {integrator!r}")
        if method == "compare-all" and integrator != "rk4":
            raise ConfigError("config.integrator", "compare-all shares one fixed RK4 grid")

        out = obj.get("output", {})
        if not isinstance(out, dict):
            raise ConfigError("config.output", "expected an object")

        fock_dim: int | None = None
        if "fock" in obj:
            fobj = obj["fock"]
            if not isinstance(fobj, dict):
                raise ConfigError("config.fock", "expected an object")
            fock_dim = int(_as_float(_req(fobj, "dim", "config.fock"), "config.fock.dim"))
            if fock_dim < 2:
                raise ConfigError("config.fock.dim", "dim must be >= 2")
            if abs(k.k - 0.25) > 1e-12:
                raise ConfigError("config.fock", "the direct oracle realizes k=0.25 only")
            if ball_form:
                raise ConfigError("config.fock", "the direct oracle needs scalar coefficients")
        if method == "fock-oracle" and fock_dim is None:
            fock_dim = 300

        tol = dict(DEFAULT_TOLERANCES)
        for key, val in obj.get("tolerances", {}).items():
            if key not in tol:
                raise ConfigError(f"config.tolerances.{key}", "unknown tolerance")
            tol[key] = _as_float(val, f"config.tolerances.{key}")

        return cls(
            method=method,
            grid=grid,
            segments=segments,
            initial_chart=chart,
            initial_state=state,
            n=n,
            ball_form=ball_form,
            k=k,
            integrator=integrator,
            csv_path=out.get("csv"),
            report_path=out.get("report"),
            fock_dim=fock_dim,
            tolerances=tol,
        )

    @staticmethod
    def _parse_segments(obj: dict, grid: TimeGrid) -> tuple[_Segment, ...]:
        has_single = "coefficients" in obj
        has_schedule = "schedule" in obj
        if has_single == has_schedule:
            raise ConfigError("config", "provide exactly one of 'coefficients' or 'schedule'")
        if has_single:
            return (_Segment(grid.t1, _parse_coefficients(obj["coefficients"], "config.coefficients")),)
        sched = obj["schedule"]
        if not isinstance(sched, list) or not sched:
            raise ConfigError("config.schedule", "expected a non-empty list")
        segments = []
        prev = grid.t0
        for i, seg in enumerate(sched):
            path = f"config.schedule[{i}]"
            if not isinstance(seg, dict):
                raise ConfigError(path, "expected an object")
            until = _as_float(_req(seg, "until", path), f"{path}.until")
            if until <= prev:
                raise ConfigError(f"{path}.until", "segment ends must be strictly increasing")
            prev = until
            segments.append(_Segment(until, _parse_coefficients(_req(seg, "coefficients", path), f"{path}.coefficients")))
        if prev < grid.t1:
            raise ConfigError("config.schedule", f"schedule ends at {prev} before t1={grid.t1}")
        kinds = {type(s.coefficients) for s in segments}
        if len(kinds) > 1:
            raise ConfigError("config.schedule", "all segments must use the same coefficient form")
        ns = {s.coefficients.n for s in segments if isinstance(s.coefficients, BallCoefficients)}
        if len(ns) > 1:
            raise ConfigError("config.schedule", "all segments must share the same n")
        return tuple(segments)

    @staticmethod
    def _parse_initial(obj: Any, n: int) -> tuple[str, np.ndarray]:
        if not isinstance(obj, dict):
            raise ConfigError("config.initial", "expected an object")
        chart = _req(obj, "chart", "config.initial")
        if chart not in ("product", "fc"):
            raise ConfigError("config.initial.chart", f"expected 'product' or 'fc', got {chart!r}")
        first_key = "z" if chart == "product" else "eta"
        first = _req(obj, first_key, "config.initial")
        if n == 1:
            z = _complex_from_pair(first, f"config.initial.{first_key}")
            w = _complex_from_pair(_req(obj, "w", "config.initial"), "config.initial.w")
            if abs(w) >= 1.0:
                raise ConfigError("config.initial.w", f"|w| must be < 1, got {abs(w)}")
            return chart, np.array([z, w], dtype=complex)
        if not isinstance(first, list) or len(first) != n:
            raise ConfigError(f"config.initial.{first_key}", f"expected {n} entries")
        z = np.array(
            [_complex_from_pair(p, f"config.initial.{first_key}[{i}]") for i, p in enumerate(first)]
        )
        wrows = _req(obj, "W", "config.initial")
        if not isinstance(wrows, list) or len(wrows) != n:
            raise ConfigError("config.initial.W", f"expected {n} rows")
        W = np.array(
            [
                [_complex_from_pair(p, f"config.initial.W[{i}][{j}]") for j, p in enumerate(row)]
                for i, row in enumerate(wrows)
            ]
        )
        if W.shape != (n, n):
            raise ConfigError("config.initial.W", f"expected {n}x{n} entries")
        sym = float(np.max(np.abs(W - W.T)))
        if sym > 1e-12:
            raise ConfigError("config.initial.W", f"not symmetric (residual {sym:.3e})")
        if _ball_margin(W) <= 0:
            raise ConfigError("config.initial.W", "1 - W·conj(W) is not positive definite")
        return chart, np.concatenate([z, W.reshape(-1)])

    # -- derived accessors -------------------------------------------------------

    def coefficients_at(self, t: float) -> ComplexCoefficients | BallCoefficients:
        for seg in self.segments:
            if t < seg.until:
                return seg.coefficients
        return self.segments[-1].coefficients

    def segment_bounds(self) -> list[tuple[float, float]]:
        bounds = []
        lo = self.grid.t0
        for seg in self.segments:
            hi = min(seg.until, self.grid.t1)
            if hi > lo:
                bounds.append((lo, hi))
            lo = hi
        return bounds

    def scalar_initial_fc(self) -> tuple[complex, complex]:
        """Initial (η, w) for n=1 lanes, converting from the product chart if needed."""
        first, w = complex(self.initial_state[0]), complex(self.initial_state[1])
        if self.initial_chart == "fc":
            return first, w
        eta = (first + w * first.conjugate()) / (1.0 - abs(w) ** 2)
        return eta, w

    def ball_initial(self) -> tuple[np.ndarray, np.ndarray]:
        """Initial (z, W) for ball lanes (n=1 scalar configs embed as 1×1)."""
        if self.n == 1:
            eta, w = self.scalar_initial_fc()
            z = eta - w * eta.conjugate()
            return np.array([z], dtype=complex), np.array([[w]], dtype=complex)
        first = self.initial_state[: self.n].copy()
        W = self.initial_state[self.n :].reshape(self.n, self.n).copy()
        if self.initial_chart == "fc":
            return first - W @ first.conj(), W
        return first, W


# --- method lanes --------------------------------------------------------------------
#
# Every lane shares the packing convention: real ODE vector y, complex state
# rows for the Trajectory, diagnostics (margin, energy, ...) per sample.


def _disk_guard(t: float, y: np.ndarray) -> None:
    if y[2] ** 2 + y[3] ** 2 >= 1.0:
        raise InvariantViolation(f"|w| reached 1 (u={y[2]:.6g}, v={y[3]:.6g})")


def _scalar_coeff_at(cfg: ExperimentConfig, t: float) -> ComplexCoefficients:
    c = cfg.coefficients_at(t)
    assert isinstance(c, ComplexCoefficients)
    return c


def _lane_wei_norman(cfg: ExperimentConfig, *, with_fock: bool = False) -> Trajectory:
    """Real equations of motion (x, y, u, v) with the factorization phase φ.

    CSV-facing phases are the coherent-state pair (φ_D, φ_B), co-integrated
    on the same grid with dictionary-translated coefficients; φ itself is
    kept as the 'phi_wn' diagnostic (they differ — see phase_bridge).
    """
    eta0, w0 = cfg.scalar_initial_fc()
    k = cfg.k
    y0 = np.array([eta0.real, eta0.imag, w0.real, w0.imag, 0.0, 0.0, 0.0])

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        cc = _scalar_coeff_at(cfg, t)
        rc = coeffs_to_real(cc)
        s = RealState(x=y[0], y=y[1], u=y[2], v=y[3])
        dx, dy, du, dv = wn_rhs(rc, s)
        dphi = wn_phase_rhs(rc, s, k)
        bcc = conjugation_dictionary(cc)
        eta, w = complex(y[0], y[1]), complex(y[2], y[3])
        dphi_d = -_energy_raw(bcc, eta, w, k.k)
        deta, dw = _rhs_fc_raw(bcc, eta, w)
        dphi_b = _berry_raw(eta, w, deta, dw, k.k)
        return np.array([dx, dy, du, dv, dphi, dphi_d, dphi_b])

    def observer(t: float, y: np.ndarray) -> tuple[np.ndarray, PhaseRecord, dict[str, float]]:
        cc = _scalar_coeff_at(cfg, t)
        rc = coeffs_to_real(cc)
        s = RealState(x=y[0], y=y[1], u=y[2], v=y[3])
        eta, w = complex(y[0], y[1]), complex(y[2], y[3])
        q = quasienergy_coeffs(rc, s, wn_rhs(rc, s), wn_phase_rhs(rc, s, k))
        diag = {
            "margin": 1.0 - abs(w) ** 2,
            "energy": _energy_raw(conjugation_dictionary(cc), eta, w, k.k),
            "quasienergy_residual": max(abs(q.G1), abs(q.G2), abs(q.H1), abs(q.H2)),
            "phi_wn": y[4],
        }
        return np.array([eta, w]), PhaseRecord(y[5], y[6]), diag

    traj = integrate(
        rhs, y0, cfg.grid, cfg.integrator, chart="fc", observer=observer, guard=_disk_guard
    )
    if with_fock:
        traj.diagnostics["fidelity"] = _fock_fidelity_series(cfg, traj)
    return traj


def _lane_berezin_fc(cfg: ExperimentConfig) -> Trajectory:
    """Decoupled coherent-state flow (η, w) with co-integrated phases."""
    eta0, w0 = cfg.scalar_initial_fc()
    k = cfg.k
    y0 = np.array([eta0.real, eta0.imag, w0.real, w0.imag, 0.0, 0.0])

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        bcc = conjugation_dictionary(_scalar_coeff_at(cfg, t))
        eta, w = complex(y[0], y[1]), complex(y[2], y[3])
        deta, dw = _rhs_fc_raw(bcc, eta, w)
        dphi_d = -_energy_raw(bcc, eta, w, k.k)
        dphi_b = _berry_raw(eta, w, deta, dw, k.k)
        return np.array([deta.real, deta.imag, dw.real, dw.imag, dphi_d, dphi_b])

    def observer(t: float, y: np.ndarray) -> tuple[np.ndarray, PhaseRecord, dict[str, float]]:
        bcc = conjugation_dictionary(_scalar_coeff_at(cfg, t))
        eta, w = complex(y[0], y[1]), complex(y[2], y[3])
        diag = {
            "margin": 1.0 - abs(w) ** 2,
            "energy": _energy_raw(bcc, eta, w, k.k),
        }
        return np.array([eta, w]), PhaseRecord(y[4], y[5]), diag

    return integrate(
        rhs, y0, cfg.grid, cfg.integrator, chart="fc", observer=observer, guard=_disk_guard
    )


def _lane_berezin_disk(cfg: ExperimentConfig) -> Trajectory:
    """Product-chart coherent-state flow (z, w); phases evaluated on the η image."""
    eta0, w0 = cfg.scalar_initial_fc()
    z0 = eta0 - w0 * eta0.conjugate()
    k = cfg.k
    y0 = np.array([z0.real, z0.imag, w0.real, w0.imag, 0.0, 0.0])

    def _eta(z: complex, w: complex) -> complex:
        return (z + w * z.conjugate()) / (1.0 - abs(w) ** 2)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        bcc = conjugation_dictionary(_scalar_coeff_at(cfg, t))
        z, w = complex(y[0], y[1]), complex(y[2], y[3])
        dz, dw = _rhs_disk_raw(bcc, z, w)
        eta = _eta(z, w)
        deta, _ = _rhs_fc_raw(bcc, eta, w)
        dphi_d = -_energy_raw(bcc, eta, w, k.k)
        dphi_b = _berry_raw(eta, w, deta, dw, k.k)
        return np.array([dz.real, dz.imag, dw.real, dw.imag, dphi_d, dphi_b])

    def observer(t: float, y: np.ndarray) -> tuple[np.ndarray, PhaseRecord, dict[str, float]]:
        bcc = conjugation_dictionary(_scalar_coeff_at(cfg, t))
        z, w = complex(y[0], y[1]), complex(y[2], y[3])
        diag = {
            "margin": 1.0 - abs(w) ** 2,
            "energy": _energy_raw(bcc, _eta(z, w), w, k.k),
        }
        return np.array([z, w]), PhaseRecord(y[4], y[5]), diag

    return integrate(
        rhs, y0, cfg.grid, cfg.integrator, chart="product", observer=observer, guard=_disk_guard
    )


def _ball_coeff_at(cfg: ExperimentConfig, t: float) -> BallCoefficients:
    """Coefficients for the ball lanes, in the coherent-state convention."""
    c = cfg.coefficients_at(t)
    if isinstance(c, ComplexCoefficients):
        return BallCoefficients.from_scalar(conjugation_dictionary(c))
    return c


def _pack_ball(z: np.ndarray, W: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag, W.reshape(-1).real, W.reshape(-1).imag])


def _unpack_ball(y: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    z = y[:n] + 1j * y[n : 2 * n]
    flat = y[2 * n : 2 * n + n * n] + 1j * y[2 * n + n * n :]
    return z, flat.reshape(n, n)


def _ball_guard_factory(n: int) -> Guard:
    def guard(t: float, y: np.ndarray) -> None:
        _, W = _unpack_ball(y, n)
        sym = float(np.max(np.abs(W - W.T)))
        if sym > 1e-8:
            raise InvariantViolation(f"W symmetry drifted to {sym:.3e}")
        margin = _ball_margin(0.5 * (W + W.T))
        if margin <= 0.0:
            raise InvariantViolation(f"ball margin reached {margin:.3e}")

    return guard


def _nan_phase() -> PhaseRecord:
    return PhaseRecord(float("nan"), float("nan"), float("nan"))


def _ball_row(z: np.ndarray, W: np.ndarray) -> np.ndarray:
    return np.concatenate([z, W.reshape(-1)])


def _lane_berezin_ball(cfg: ExperimentConfig) -> Trajectory:
    """Matrix flow (z, W); phases are not defined for this lane (NaN columns)."""
    z0, W0 = cfg.ball_initial()
    n = z0.size
    y0 = _pack_ball(z0, W0)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        bc = _ball_coeff_at(cfg, t)
        z, W = _unpack_ball(y, n)
        dz, dW = _rhs_ball_raw(bc, z, W)
        return _pack_ball(dz, dW)

    def observer(t: float, y: np.ndarray) -> tuple[np.ndarray, PhaseRecord, dict[str, float]]:
        z, W = _unpack_ball(y, n)
        return _ball_row(z, W), _nan_phase(), {"margin": _ball_margin(0.5 * (W + W.T))}

    return integrate(
        rhs, y0, cfg.grid, cfg.integrator, chart="ball", observer=observer,
        guard=_ball_guard_factory(n),
    )


def _lane_riccati(cfg: ExperimentConfig) -> Trajectory:
    """W by exact linearization (per-segment matrix exponentials); z by RK4.

    The (X, Y) block pair is advanced by one constant matrix exponential per
    grid step, so W(t) carries no time-discretization error within a
    segment; the affine z equation is integrated on the same grid with W
    evaluated exactly at the RK4 stage times.
    """
    z0, W0 = cfg.ball_initial()
    n = z0.size
    times = cfg.grid.times()

    rows: list[np.ndarray] = []
    diags: list[float] = []
    z = z0.astype(complex)
    blk = np.vstack([W0, np.eye(n, dtype=complex)])
    halfstep_cache: dict[tuple[int, float], np.ndarray] = {}

    def w_of(block: np.ndarray) -> np.ndarray:
        X, Y = block[:n], block[n:]
        sv = np.linalg.svd(Y, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise InvariantViolation(
                f"linearization denominator Y is singular (rel. σ_min {sv[-1] / sv[0]:.3e})"
            )
        return np.linalg.solve(Y.T, X.T).T

    for i, t in enumerate(times):
        W = w_of(blk)
        margin = _ball_margin(0.5 * (W + W.T))
        if margin <= 0.0:
            raise InvariantViolation(f"at t={t:.6g}: ball margin reached {margin:.3e}")
        rows.append(_ball_row(z, W))
        diags.append(margin)
        if i + 1 == times.size:
            break
        h = times[i + 1] - t
        seg_idx = next(j for j, seg in enumerate(cfg.segments) if t < seg.until or j + 1 == len(cfg.segments))
        bc = _ball_coeff_at(cfg, t)
        key = (seg_idx, float(h))
        m_half = halfstep_cache.get(key)
        if m_half is None:
            m_half = expm(0.5 * h * hc_matrix(bc))
            halfstep_cache[key] = m_half
        blk_half = m_half @ blk
        blk_full = m_half @ blk_half
        W_half = w_of(blk_half)
        W_full = w_of(blk_full)

        def dz_at(W_t: np.ndarray, zv: np.ndarray) -> np.ndarray:
            return -1j * (bc.eps + W_t @ bc.eps.conj() + 0.5 * bc.eps0.T @ zv + W_t @ bc.eps_plus @ zv)

        k1 = dz_at(W, z)
        k2 = dz_at(W_half, z + 0.5 * h * k1)
        k3 = dz_at(W_half, z + 0.5 * h * k2)
        k4 = dz_at(W_full, z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        blk = blk_full

    return Trajectory(
        times=times,
        chart="ball",
        states=np.vstack(rows),
        phases=tuple(_nan_phase() for _ in times),
        diagnostics={"margin": np.asarray(diags)},
    )


def _fock_fidelity_series(cfg: ExperimentConfig, traj: Trajectory) -> np.ndarray:
    """Fidelity of e^{−iφ}D(α)S(w)|0⟩ against direct propagation at ≤11 samples.

    Sample times between segments reuse one diagonalization per segment.
    NaN marks samples that were not checked.
    """
    assert cfg.fock_dim is not None
    spec = FockBasisSpec(dim=cfg.fock_dim, sector="even")
    times = traj.times
    idx = np.unique(np.linspace(0, times.size - 1, min(11, times.size)).astype(int))
    out = np.full(times.size, np.nan)

    eta0, w0 = cfg.scalar_initial_fc()
    psi = chart_state_vector(eta0, w0, 0.0, spec).psi
    phi_wn = traj.diagnostics["phi_wn"]

    t_prev = times[0]
    for j in idx:
        t_j = times[j]
        # propagate psi from t_prev to t_j through the schedule segments
        for lo, hi in cfg.segment_bounds():
            a, b = max(lo, t_prev), min(hi, t_j)
            if b <= a:
                continue
            cc = _scalar_coeff_at(cfg, 0.5 * (a + b))
            H = hamiltonian_matrix(cc, spec)
            vals, vecs = np.linalg.eigh(H)
            psi = (vecs * np.exp(-1j * vals * (b - a))) @ (vecs.conj().T @ psi)
        t_prev = t_j
        eta, w = complex(traj.states[j, 0]), complex(traj.states[j, 1])
        psi_cs = chart_state_vector(eta, w, phi_wn[j], spec)
        out[j] = abs(complex(np.vdot(psi, psi_cs.psi))) / (
            float(np.linalg.norm(psi)) * psi_cs.norm
        )
    return out


_LANES: dict[str, Callable[[ExperimentConfig], Trajectory]] = {
    "wei-norman": _lane_wei_norman,
    "berezin-fc": _lane_berezin_fc,
    "berezin-disk": _lane_berezin_disk,
    "berezin-ball": _lane_berezin_ball,
    "riccati-linearized": _lane_riccati,
}


# --- comparison ------------------------------------------------------------------------


def _common_chart_states(traj: Trajectory, n: int) -> np.ndarray:
    """Map a lane's samples to the shared comparison chart.

    n=1 lanes compare as (η, w); ball lanes (n≥1) compare as (z, W..) rows.
    """
    if traj.chart == "fc":
        return traj.states
    if traj.chart == "product":
        z, w = traj.states[:, 0], traj.states[:, 1]
        eta = (z + w * z.conj()) / (1.0 - np.abs(w) ** 2)
        return np.column_stack([eta, w])
    if traj.chart == "ball" and n == 1:
        z, w = traj.states[:, 0], traj.states[:, 1]
        eta = (z + w * z.conj()) / (1.0 - np.abs(w) ** 2)
        return np.column_stack([eta, w])
    return traj.states


def _pairwise_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


def _compare_all(cfg: ExperimentConfig) -> tuple[dict[str, Any], Trajectory]:
    if not cfg.ball_form:
        lane_names = ["wei-norman", "berezin-fc", "berezin-disk", "berezin-ball", "riccati-linearized"]
    else:
        lane_names = ["berezin-ball", "riccati-linearized"]
    trajs = {name: _LANES[name](cfg) for name in lane_names}

    mapped = {name: _common_chart_states(t, cfg.n) for name, t in trajs.items()}
    comparisons: dict[str, float] = {}
    for i, a in enumerate(lane_names):
        for b in lane_names[i + 1 :]:
            comparisons[f"{a}|{b}"] = _pairwise_deviation(mapped[a], mapped[b])

    report: dict[str, Any] = {"comparisons": comparisons}

    if not cfg.ball_form:
        wn = trajs["wei-norman"]
        fc = trajs["berezin-fc"]
        phi_wn = wn.diagnostics["phi_wn"]
        alpha = wn.states[:, 0]
        w = wn.states[:, 1]
        resid = (
            -phi_wn
            - np.array([p.phi for p in fc.phases])
            + 0.5 * (w * np.conj(alpha) ** 2).imag
        )
        # the residual is conserved at its initial value ½·Im(w₀·ᾱ₀²);
        # the co-integration check is its drift, not its magnitude
        report["phase_bridge_constant"] = float(resid[0])
        report["phase_bridge_max"] = float(np.max(np.abs(resid - resid[0])))
        report["phase_pair_deviation"] = {
            "phi_D": float(
                np.max(np.abs([pa.phi_D - pb.phi_D for pa, pb in zip(fc.phases, trajs["berezin-disk"].phases)]))
            ),
            "phi_B": float(
                np.max(np.abs([pa.phi_B - pb.phi_B for pa, pb in zip(fc.phases, trajs["berezin-disk"].phases)]))
            ),
        }
        if cfg.fock_dim is not None:
            fid = _fock_fidelity_series(cfg, wn)
            report["fock"] = {
                "dim": cfg.fock_dim,
                "fidelity_min": float(np.nanmin(fid)),
            }
        primary = wn
    else:
        primary = trajs["berezin-ball"]

    return report, primary


# --- reporting and file output -----------------------------------------------------------


def _energy_drift(cfg: ExperimentConfig, traj: Trajectory) -> float | None:
    if "energy" not in traj.diagnostics:
        return None
    energy = traj.diagnostics["energy"]
    drift = 0.0
    for lo, hi in cfg.segment_bounds():
        mask = (traj.times >= lo - 1e-15) & (traj.times <= hi + 1e-15)
        if np.any(mask):
            seg = energy[mask]
            drift = max(drift, float(np.max(np.abs(seg - seg[0]))))
    return drift


def _build_report(cfg: ExperimentConfig, traj: Trajectory, extra: dict[str, Any]) -> dict[str, Any]:
    report: dict[str, Any] = {
        "method": cfg.method,
        "k": cfg.k.k,
        "n": cfg.n,
        "grid": {"t0": cfg.grid.t0, "t1": cfg.grid.t1, "step": cfg.grid.step},
        "samples": int(traj.times.size),
        "chart": traj.chart,
        "margin_min": float(np.min(traj.diagnostics["margin"])),
    }
    drift = _energy_drift(cfg, traj)
    if drift is not None:
        report["energy_drift"] = drift
    if "quasienergy_residual" in traj.diagnostics:
        report["quasienergy_residual_max"] = float(np.max(traj.diagnostics["quasienergy_residual"]))
    if "phi_wn" in traj.diagnostics:
        report["phi_wn_final"] = float(traj.diagnostics["phi_wn"][-1])
    last = traj.phases[-1]
    if np.isfinite(last.phi):
        report["phases_final"] = {"phi_D": last.phi_D, "phi_B": last.phi_B, "phi": last.phi}
    if "fidelity" in traj.diagnostics:
        report["fock"] = {
            "dim": cfg.fock_dim,
            "fidelity_min": float(np.nanmin(traj.diagnostics["fidelity"])),
        }
    report.update(extra)
    return report


def _state_headers(chart: str, n: int) -> list[str]:
    if chart == "fc":
        return ["re_eta", "im_eta", "re_w", "im_w"]
    if chart == "product":
        return ["re_z", "im_z", "re_w", "im_w"]
    names = []
    for i in range(n):
        names += [f"re_z_{i + 1}", f"im_z_{i + 1}"]
    for i in range(n):
        for j in range(n):
            names += [f"re_W_{i + 1}_{j + 1}", f"im_W_{i + 1}_{j + 1}"]
    return names


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: str, traj: Trajectory, n: int) -> None:
    """Flat UTF-8 CSV: t, state columns (chart-named), phases, energy, margin."""
    headers = ["t"] + _state_headers(traj.chart, n)
    headers += ["phi_D", "phi_B", "phi", "energy", "margin"]
    energy = traj.diagnostics.get("energy", np.full(traj.times.size, np.nan))
    margin = traj.diagnostics["margin"]
    lines = [",".join(headers)]
    for i, t in enumerate(traj.times):
        row = [_fmt(t)]
        for val in traj.states[i]:
            row += [_fmt(val.real), _fmt(val.imag)]
        ph = traj.phases[i]
        row += [_fmt(ph.phi_D), _fmt(ph.phi_B), _fmt(ph.phi), _fmt(energy[i]), _fmt(margin[i])]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_experiment(cfg: ExperimentConfig) -> dict[str, Any]:
    """Run the configured method; write CSV/JSON if paths are set; return the report."""
    extra: dict[str, Any] = {}
    if cfg.method == "compare-all":
        extra, traj = _compare_all(cfg)
    elif cfg.method == "fock-oracle":
        traj = _lane_wei_norman(cfg, with_fock=True)
    else:
        traj = _LANES[cfg.method](cfg)

    report = _build_report(cfg, traj, extra)
    if cfg.csv_path:
        write_csv(cfg.csv_path, traj, cfg.n)
        report["csv"] = cfg.csv_path
    if cfg.report_path:
        with open(cfg.report_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def tolerance_failures(cfg: ExperimentConfig, report: dict[str, Any]) -> list[str]:
    """Gate checks used by the compare/oracle CLI verbs (empty list = pass)."""
    failures = []
    tol = cfg.tolerances
    for pair, dev in report.get("comparisons", {}).items():
        if dev > tol["state"]:
            failures.append(f"state deviation {pair}: {dev:.3e} > {tol['state']:.1e}")
    if "phase_bridge_max" in report and report["phase_bridge_max"] > tol["phase"]:
        failures.append(f"phase bridge residual {report['phase_bridge_max']:.3e} > {tol['phase']:.1e}")
    fock = report.get("fock")
    if fock is not None and fock["fidelity_min"] < tol["fidelity"]:
        failures.append(f"fock fidelity {fock['fidelity_min']:.9f} < {tol['fidelity']:.9f}")
    return failures
