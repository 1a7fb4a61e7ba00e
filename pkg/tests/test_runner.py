"""Time grids, the fixed/adaptive steppers, experiment configs, and the CLI.

Config parsing is exercised one rejection path at a time, asserting the field
path each error reports.  Integration tests pin the classical fourth-order
convergence rate and the guard/underflow failure modes on synthetic
right-hand sides before any physics enters.
"""

import json

import numpy as np
import pytest

from sjdyn import cli
from sjdyn.berezin import PhaseRecord
from sjdyn.geometry import BargmannIndex
from sjdyn.runner import (
    DEFAULT_TOLERANCES,
    ConfigError,
    ExperimentConfig,
    InvariantViolation,
    StepUnderflowError,
    TimeGrid,
    Trajectory,
    integrate,
    run_experiment,
    tolerance_failures,
)

SCALAR_COEFFS = {
    "eps_a_re": 0.3,
    "eps_a_im": -0.1,
    "eps_0": 0.8,
    "eps_plus_re": 0.2,
    "eps_plus_im": 0.4,
}

BALL_COEFFS = {
    "n": 2,
    "eps": [[0.1, 0.2], [0.0, -0.3]],
    "eps0": [[[0.5, 0.0], [0.1, -0.2]], [[0.1, 0.2], [0.3, 0.0]]],
    "eps_plus": [[[0.2, 0.0], [0.0, 0.1]], [[0.0, 0.1], [-0.4, 0.0]]],
}


def scalar_config(**over):
    cfg = {
        "method": "compare-all",
        "grid": {"t0": 0.0, "t1": 0.3, "step": 1e-3},
        "coefficients": dict(SCALAR_COEFFS),
        "initial": {"chart": "fc", "eta": [0.2, -0.1], "w": [0.1, 0.15]},
        "k": 0.25,
    }
    cfg.update(over)
    return cfg


def ball_config(**over):
    cfg = {
        "method": "compare-all",
        "grid": {"t0": 0.0, "t1": 0.5, "step": 1e-3},
        "coefficients": json.loads(json.dumps(BALL_COEFFS)),
        "initial": {
            "chart": "fc",
            "eta": [[0.2, -0.1], [0.0, 0.3]],
            "W": [[[0.1, 0.0], [0.0, 0.2]], [[0.0, 0.2], [-0.1, 0.0]]],
        },
        "k": 0.25,
    }
    cfg.update(over)
    return cfg


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


# --- time grid ------------------------------------------------------------------


def test_grid_rejects_reversed_interval():
    with pytest.raises(ValueError, match="t1 must exceed t0"):
        TimeGrid(1.0, 0.0, 0.1)


def test_grid_rejects_nonpositive_step():
    with pytest.raises(ValueError, match="step must be > 0"):
        TimeGrid(0.0, 1.0, 0.0)


def test_grid_rejects_non_finite_bounds():
    with pytest.raises(ValueError, match="finite"):
        TimeGrid(0.0, np.inf, 0.1)


def test_grid_caps_sample_count():
    with pytest.raises(ValueError, match="exceeds"):
        TimeGrid(0.0, 1.0, 1e-9)


def test_grid_times_land_exactly_on_both_endpoints():
    ts = TimeGrid(0.0, 1.0, 0.3).times()
    # non-divisible step: the last interval is shortened, never overshot
    assert ts.shape == (5,)
    assert ts[0] == 0.0 and ts[-1] == 1.0
    assert np.allclose(ts[:4], [0.0, 0.3, 0.6, 0.9])

    ts = TimeGrid(0.0, 1.0, 0.1).times()
    assert ts.shape == (11,) and ts[-1] == 1.0
    assert np.allclose(np.diff(ts), 0.1)


# --- trajectory container ---------------------------------------------------------


def _phases(n):
    return tuple(PhaseRecord(0.0, 0.0) for _ in range(n))


def test_trajectory_rejects_length_mismatch():
    with pytest.raises(ValueError, match="matching lengths"):
        Trajectory(np.arange(3.0), "raw", np.zeros((2, 1)), _phases(3))


def test_trajectory_rejects_phase_count_mismatch():
    with pytest.raises(ValueError, match="one record per sample"):
        Trajectory(np.arange(3.0), "raw", np.zeros((3, 1)), _phases(2))


def test_trajectory_rejects_unordered_times():
    with pytest.raises(ValueError, match="strictly increasing"):
        Trajectory(np.array([0.0, 2.0, 1.0]), "raw", np.zeros((3, 1)), _phases(3))


def test_trajectory_rejects_misshapen_diagnostic():
    with pytest.raises(ValueError, match="one value per sample"):
        Trajectory(
            np.arange(3.0), "raw", np.zeros((3, 1)), _phases(3),
            diagnostics={"margin": np.zeros(2)},
        )


def test_trajectory_coerces_dtypes():
    tr = Trajectory([0, 1], "raw", [[1], [2]], _phases(2), {"m": np.ones(2)})
    assert tr.times.dtype == float and tr.states.dtype == complex
    assert tr.chart == "raw"


# --- fixed and adaptive stepping ---------------------------------------------------


def _rotation(t, y):
    return np.array([-y[1], y[0]])


ROTATION_AT_1 = np.array([np.cos(1.0), np.sin(1.0)])


def test_integrate_rejects_unknown_method():
    with pytest.raises(ValueError, match="unknown integration method"):
        integrate(_rotation, np.array([1.0, 0.0]), TimeGrid(0.0, 1.0, 0.1), method="euler")


@pytest.mark.parametrize("method", ["rk4", "rk45"])
def test_integrate_zero_rhs_holds_state(method):
    grid = TimeGrid(0.0, 2.0, 0.1)
    tr = integrate(lambda t, y: np.zeros_like(y), np.array([0.3, -1.2]), grid, method=method)
    assert tr.times[0] == 0.0 and tr.times[-1] == 2.0
    assert np.array_equal(tr.states, np.tile([0.3, -1.2], (21, 1)))
    assert all(p.phi == 0.0 for p in tr.phases)
    assert tr.diagnostics == {}


def test_rk4_matches_rotation_closed_form():
    tr = integrate(_rotation, np.array([1.0, 0.0]), TimeGrid(0.0, 1.0, 1e-3))
    assert np.abs(tr.states[-1].real - ROTATION_AT_1).max() < 1e-12


def test_rk4_error_falls_sixteenfold_per_halving():
    errs = []
    for step in (0.01, 0.005):
        tr = integrate(_rotation, np.array([1.0, 0.0]), TimeGrid(0.0, 1.0, step))
        errs.append(np.abs(tr.states[-1].real - ROTATION_AT_1).max())
    assert 12.0 < errs[0] / errs[1] < 20.0


def test_rk45_tracks_closed_form_across_coarse_samples():
    # the sample grid is 10x coarser than rk4 would need; accuracy comes
    # from the adaptive sub-stepping, not the grid
    tr = integrate(_rotation, np.array([1.0, 0.0]), TimeGrid(0.0, 1.0, 0.1), method="rk45")
    assert np.abs(tr.states[-1].real - ROTATION_AT_1).max() < 1e-8


def test_integrate_coerces_integer_input():
    tr = integrate(lambda t, y: y * 0, np.array([1, 0]), TimeGrid(0.0, 1.0, 0.5))
    assert tr.states.dtype == complex
    assert np.array_equal(tr.states[-1], [1, 0])


def test_integrate_observer_triple_is_recorded():
    def obs(t, y):
        return y.astype(complex) + 1j * t, PhaseRecord(t, 2 * t), {"load": t * t}

    tr = integrate(
        lambda t, y: np.zeros_like(y), np.array([1.0]),
        TimeGrid(0.0, 1.0, 0.25), observer=obs,
    )
    assert np.allclose(tr.states[:, 0], 1.0 + 1j * tr.times)
    # phi left unset falls back to phi_D + phi_B
    assert tr.phases[2].phi == pytest.approx(3 * tr.times[2])
    assert np.allclose(tr.diagnostics["load"], tr.times**2)


def test_guard_failure_carries_time_context():
    def guard(t, y):
        if y[0] > 0.5:
            raise InvariantViolation("ceiling hit")

    with pytest.raises(InvariantViolation, match=r"at t=0\.51: ceiling hit"):
        integrate(
            lambda t, y: np.ones_like(y), np.array([0.0]),
            TimeGrid(0.0, 2.0, 0.01), guard=guard,
        )


def test_rhs_error_at_stage_point_carries_time_context():
    def rhs(t, y):
        if t > 0.3:
            raise ValueError("bad region")
        return np.zeros_like(y)

    with pytest.raises(InvariantViolation, match=r"at t=.*bad region"):
        integrate(rhs, np.array([0.0]), TimeGrid(0.0, 1.0, 0.01))


def test_adaptive_step_underflows_on_finite_time_blowup():
    # y' = y^2 from y(0)=1 diverges at t=1; no step can cross it
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(StepUnderflowError, match="step underflow"):
            integrate(
                lambda t, y: y * y, np.array([1.0]),
                TimeGrid(0.0, 2.0, 0.1), method="rk45",
            )


# --- config parsing ---------------------------------------------------------------


def test_config_error_exposes_field_path():
    err = ConfigError("config.x", "boom")
    assert str(err) == "config.x: boom"
    assert err.path == "config.x"


def test_from_json_scalar_defaults():
    cfg = scalar_config()
    del cfg["k"]
    parsed = ExperimentConfig.from_json(cfg)
    assert parsed.method == "compare-all"
    assert parsed.n == 1
    assert parsed.k == BargmannIndex(0.25)
    assert parsed.integrator == "rk4"
    assert parsed.grid == TimeGrid(0.0, 0.3, 1e-3)
    assert parsed.tolerances == DEFAULT_TOLERANCES
    c = parsed.coefficients_at(0.0)
    assert c.eps_a == 0.3 - 0.1j and c.eps_0 == 0.8 and c.eps_plus == 0.2 + 0.4j


def test_from_json_merges_tolerance_overrides():
    parsed = ExperimentConfig.from_json(scalar_config(tolerances={"phase": 1e-3}))
    assert parsed.tolerances["phase"] == 1e-3
    assert parsed.tolerances["state"] == DEFAULT_TOLERANCES["state"]


def test_fock_oracle_dimension_defaults():
    parsed = ExperimentConfig.from_json(scalar_config(method="fock-oracle"))
    assert parsed.fock_dim == 300
    assert ExperimentConfig.from_json(scalar_config()).fock_dim is None


def test_schedule_segments_select_by_strict_until():
    cfg = scalar_config(grid={"t0": 0.0, "t1": 0.4, "step": 1e-3})
    del cfg["coefficients"]
    cfg["schedule"] = [
        {"until": 0.2, "coefficients": dict(SCALAR_COEFFS)},
        {"until": 0.5, "coefficients": dict(SCALAR_COEFFS, eps_0=-0.3)},
    ]
    parsed = ExperimentConfig.from_json(cfg)
    assert parsed.coefficients_at(0.0).eps_0 == 0.8
    assert parsed.coefficients_at(0.1999).eps_0 == 0.8
    # boundary belongs to the next segment, and queries past the last
    # boundary stick to the final segment
    assert parsed.coefficients_at(0.2).eps_0 == -0.3
    assert parsed.coefficients_at(9.0).eps_0 == -0.3


def test_scalar_initial_product_chart_converts_to_fc():
    cfg = scalar_config(initial={"chart": "product", "z": [0.2, -0.1], "w": [0.1, 0.15]})
    eta, w = ExperimentConfig.from_json(cfg).scalar_initial_fc()
    z, w0 = 0.2 - 0.1j, 0.1 + 0.15j
    assert w == w0
    assert eta == pytest.approx((z + w0 * np.conj(z)) / (1 - abs(w0) ** 2))


def test_ball_initial_embeds_scalar_chart():
    z, W = ExperimentConfig.from_json(scalar_config()).ball_initial()
    eta, w = 0.2 - 0.1j, 0.1 + 0.15j
    assert W.shape == (1, 1) and W[0, 0] == w
    assert z[0] == pytest.approx(eta - w * np.conj(eta))


def test_ball_initial_matrix_chart():
    z, W = ExperimentConfig.from_json(ball_config()).ball_initial()
    eta = np.array([0.2 - 0.1j, 0.3j])
    W_in = np.array([[0.1, 0.2j], [0.2j, -0.1]])
    assert np.allclose(W, W_in)
    assert np.allclose(z, eta - W_in @ eta.conj())


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        pytest.param(lambda c: c.pop("method"), "config.method", id="method-missing"),
        pytest.param(lambda c: c.update(method="euler"), "config.method", id="method-unknown"),
        pytest.param(lambda c: c.pop("grid"), "config.grid", id="grid-missing"),
        pytest.param(lambda c: c["grid"].update(t0="zero"), "config.grid.t0", id="grid-t0-type"),
        pytest.param(lambda c: c["grid"].update(t1=-1.0), "config.grid", id="grid-reversed"),
        pytest.param(lambda c: c["grid"].update(step="x"), "config.grid.step", id="grid-step-type"),
        pytest.param(
            lambda c: c.update(schedule=[{"until": 1.0, "coefficients": dict(SCALAR_COEFFS)}]),
            "exactly one",
            id="coeffs-and-schedule",
        ),
        pytest.param(lambda c: c.pop("coefficients"), "exactly one", id="coeffs-missing"),
        pytest.param(lambda c: c.update(coefficients={"bogus": 1}), "config.coefficients", id="coeffs-form"),
        pytest.param(
            lambda c: (c.pop("coefficients"), c.update(schedule={"until": 1.0}))[0],
            "config.schedule",
            id="schedule-not-list",
        ),
        pytest.param(
            lambda c: (c.pop("coefficients"), c.update(schedule=[]))[0],
            "config.schedule",
            id="schedule-empty",
        ),
        pytest.param(
            lambda c: (
                c.pop("coefficients"),
                c.update(schedule=[
                    {"until": 0.2, "coefficients": dict(SCALAR_COEFFS)},
                    {"until": 0.1, "coefficients": dict(SCALAR_COEFFS)},
                ]),
            )[0],
            "until",
            id="schedule-until-order",
        ),
        pytest.param(
            lambda c: (
                c.pop("coefficients"),
                c.update(schedule=[{"until": 0.1, "coefficients": dict(SCALAR_COEFFS)}]),
            )[0],
            "schedule ends at",
            id="schedule-coverage",
        ),
        pytest.param(
            lambda c: (
                c.pop("coefficients"),
                c.update(schedule=[
                    {"until": 0.2, "coefficients": dict(SCALAR_COEFFS)},
                    {"until": 0.5, "coefficients": json.loads(json.dumps(BALL_COEFFS))},
                ]),
            )[0],
            "config.schedule",
            id="schedule-mixed-forms",
        ),
        pytest.param(lambda c: c.pop("initial"), "config.initial", id="initial-missing"),
        pytest.param(lambda c: c["initial"].update(chart="polar"), "config.initial.chart", id="chart-unknown"),
        pytest.param(lambda c: c["initial"].update(w=[1.0, 0.0]), "config.initial.w", id="w-outside-disk"),
        pytest.param(lambda c: c["initial"].update(w=[0.1]), "config.initial.w", id="w-bad-pair"),
        pytest.param(lambda c: c["initial"].pop("eta"), "config.initial.eta", id="eta-missing"),
        pytest.param(lambda c: c.update(k="quarter"), "config.k", id="k-type"),
        pytest.param(lambda c: c.update(integrator="euler2"), "config.integrator", id="integrator-unknown"),
        pytest.param(lambda c: c.update(integrator="rk45"), "config.integrator", id="integrator-compare-all"),
        pytest.param(
            lambda c: c.update(method="fock-oracle", fock={"dim": 1}),
            "config.fock.dim",
            id="fock-dim",
        ),
        pytest.param(
            lambda c: c.update(method="fock-oracle", fock={"dim": 64}, k=0.75),
            "config.fock",
            id="fock-needs-quarter-k",
        ),
        pytest.param(lambda c: c.update(fock=5), "config.fock", id="fock-not-object"),
        pytest.param(lambda c: c.update(tolerances={"margin": 1e-3}), "config.tolerances.margin", id="tolerance-unknown"),
        pytest.param(lambda c: c.update(output="out.csv"), "config.output", id="output-not-object"),
    ],
)
def test_from_json_rejects_bad_scalar_field(mutate, fragment):
    cfg = scalar_config()
    mutate(cfg)
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_json(cfg)
    assert fragment in str(err.value)


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        pytest.param(lambda c: c.update(method="berezin-fc"), "config.method", id="scalar-method"),
        pytest.param(
            lambda c: c["initial"].update(W=[[[0.1, 0.0], [0.0, 0.2]]]),
            "config.initial.W",
            id="W-row-count",
        ),
        pytest.param(
            lambda c: c["initial"].update(
                W=[[[0.1, 0.0], [0.0, 0.2]], [[0.0, -0.2], [-0.1, 0.0]]]
            ),
            "config.initial.W",
            id="W-asymmetric",
        ),
        pytest.param(
            lambda c: c["initial"].update(
                W=[[[1.2, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
            ),
            "config.initial.W",
            id="W-margin",
        ),
        pytest.param(
            lambda c: c["initial"].update(
                W=[[[0.1, 0.0], [0.0]], [[0.0], [-0.1, 0.0]]]
            ),
            "config.initial.W[0][1]",
            id="W-bad-pair",
        ),
        pytest.param(
            lambda c: c["initial"].update(eta=[[0.2, -0.1]]),
            "config.initial.eta",
            id="eta-count",
        ),
        pytest.param(
            lambda c: c.update(method="berezin-ball", fock={"dim": 64}),
            "config.fock",
            id="fock-on-ball-form",
        ),
    ],
)
def test_from_json_rejects_bad_ball_field(mutate, fragment):
    cfg = ball_config()
    mutate(cfg)
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_json(cfg)
    assert fragment in str(err.value)


# --- experiment runs ---------------------------------------------------------------


def test_compare_all_scalar_lanes_agree():
    rep = run_experiment(ExperimentConfig.from_json(scalar_config()))
    assert sorted(rep) == [
        "chart", "comparisons", "energy_drift", "grid", "k", "margin_min",
        "method", "n", "phase_bridge_constant", "phase_bridge_max",
        "phase_pair_deviation", "phases_final", "phi_wn_final",
        "quasienergy_residual_max", "samples",
    ]
    assert rep["method"] == "compare-all" and rep["chart"] == "fc" and rep["n"] == 1
    assert rep["samples"] == 301
    assert len(rep["comparisons"]) == 10
    assert max(rep["comparisons"].values()) < 1e-12
    assert rep["phase_bridge_max"] < 1e-12
    assert max(rep["phase_pair_deviation"].values()) < 1e-12
    assert rep["quasienergy_residual_max"] < 1e-12
    assert rep["energy_drift"] < 1e-10
    assert rep["margin_min"] > 0.0


def test_compare_all_zero_coefficients_is_static():
    zero = {k: 0.0 for k in SCALAR_COEFFS}
    rep = run_experiment(ExperimentConfig.from_json(scalar_config(coefficients=zero)))
    # the fixed point survives every lane; chart round-trips cost one ulp
    assert max(rep["comparisons"].values()) < 1e-15
    assert rep["energy_drift"] == 0.0
    assert rep["phases_final"] == {"phi_D": 0.0, "phi_B": 0.0, "phi": 0.0}


def test_compare_all_ball_lanes_agree():
    rep = run_experiment(ExperimentConfig.from_json(ball_config()))
    assert rep["chart"] == "ball" and rep["n"] == 2
    assert list(rep["comparisons"]) == ["berezin-ball|riccati-linearized"]
    assert rep["comparisons"]["berezin-ball|riccati-linearized"] < 1e-8
    assert rep["margin_min"] > 0.0


def test_fock_oracle_reports_fidelity():
    cfg = scalar_config(method="fock-oracle", fock={"dim": 150})
    rep = run_experiment(ExperimentConfig.from_json(cfg))
    assert rep["fock"]["dim"] == 150
    assert rep["fock"]["fidelity_min"] >= 1.0 - 1e-6


def test_adaptive_lane_conserves_energy():
    cfg = scalar_config(method="berezin-fc", integrator="rk45")
    rep = run_experiment(ExperimentConfig.from_json(cfg))
    assert rep["samples"] == 301
    assert rep["energy_drift"] < 1e-8


def test_schedule_run_reports_per_segment_quantities():
    cfg = {
        "method": "wei-norman",
        "grid": {"t0": 0.0, "t1": 0.4, "step": 1e-3},
        "schedule": [
            {"until": 0.2, "coefficients": dict(SCALAR_COEFFS)},
            {"until": 0.5, "coefficients": dict(SCALAR_COEFFS, eps_0=-0.3)},
        ],
        "initial": {"chart": "fc", "eta": [0.2, -0.1], "w": [0.1, 0.15]},
        "k": 0.25,
    }
    rep = run_experiment(ExperimentConfig.from_json(cfg))
    assert sorted(rep) == [
        "chart", "energy_drift", "grid", "k", "margin_min", "method", "n",
        "phases_final", "phi_wn_final", "quasienergy_residual_max", "samples",
    ]
    # drift is a whole-run statistic, so the eps_0 switch shows up in it;
    # the quasienergy residual uses the instantaneous coefficients and
    # stays at rounding level across the switch
    assert rep["energy_drift"] > 0.1
    assert rep["quasienergy_residual_max"] < 1e-12
    assert rep["margin_min"] > 0.0


# --- file output -------------------------------------------------------------------


def test_csv_header_follows_chart(tmp_path):
    p = tmp_path / "fc.csv"
    cfg = scalar_config(method="berezin-fc", output={"csv": str(p)})
    run_experiment(ExperimentConfig.from_json(cfg))
    assert p.read_text(encoding="utf-8").splitlines()[0] == (
        "t,re_eta,im_eta,re_w,im_w,phi_D,phi_B,phi,energy,margin"
    )

    p2 = tmp_path / "prod.csv"
    cfg = scalar_config(
        method="berezin-disk",
        initial={"chart": "product", "z": [0.2, -0.1], "w": [0.1, 0.15]},
        output={"csv": str(p2)},
    )
    run_experiment(ExperimentConfig.from_json(cfg))
    assert p2.read_text(encoding="utf-8").splitlines()[0] == (
        "t,re_z,im_z,re_w,im_w,phi_D,phi_B,phi,energy,margin"
    )

    p3 = tmp_path / "ball.csv"
    cfg = ball_config(method="berezin-ball", output={"csv": str(p3)})
    run_experiment(ExperimentConfig.from_json(cfg))
    assert p3.read_text(encoding="utf-8").splitlines()[0] == (
        "t,re_z_1,im_z_1,re_z_2,im_z_2,"
        "re_W_1_1,im_W_1_1,re_W_1_2,im_W_1_2,re_W_2_1,im_W_2_1,re_W_2_2,im_W_2_2,"
        "phi_D,phi_B,phi,energy,margin"
    )


def test_csv_output_is_deterministic(tmp_path):
    p = tmp_path / "out.csv"
    cfg = ExperimentConfig.from_json(scalar_config(output={"csv": str(p)}))
    rep = run_experiment(cfg)
    assert rep["csv"] == str(p)
    first = p.read_bytes()
    run_experiment(cfg)
    assert p.read_bytes() == first
    assert first.endswith(b"\n")
    # header plus one row per sample
    assert first.count(b"\n") == rep["samples"] + 1


def test_report_file_round_trips(tmp_path):
    p = tmp_path / "report.json"
    cfg = ExperimentConfig.from_json(scalar_config(output={"report": str(p)}))
    rep = run_experiment(cfg)
    assert json.loads(p.read_text(encoding="utf-8")) == rep


def test_tolerance_failures_format_and_gate():
    cfg = ExperimentConfig.from_json(scalar_config())
    bad = {
        "comparisons": {"x|y": 1e-3},
        "phase_bridge_max": 1.0,
        "fock": {"dim": 5, "fidelity_min": 0.5},
    }
    assert tolerance_failures(cfg, bad) == [
        "state deviation x|y: 1.000e-03 > 1.0e-08",
        "phase bridge residual 1.000e+00 > 1.0e-06",
        "fock fidelity 0.500000000 < 0.999999000",
    ]
    assert tolerance_failures(cfg, {"samples": 3}) == []


# --- command line ------------------------------------------------------------------


def test_cli_validate_reports_summary(tmp_path, capsys):
    path = write_config(tmp_path, "ok.json", scalar_config())
    assert cli.main(["validate", "--config", path]) == 0
    assert "ok (compare-all, n=1, 0.0..0.3)" in capsys.readouterr().out


def test_cli_missing_file_is_config_error(tmp_path, capsys):
    assert cli.main(["validate", "--config", str(tmp_path / "absent.json")]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_malformed_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    assert cli.main(["validate", "--config", str(path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_verb_must_match_method(tmp_path, capsys):
    path = write_config(tmp_path, "fc.json", scalar_config(method="berezin-fc"))
    assert cli.main(["compare", "--config", path]) == 1
    assert "requires method" in capsys.readouterr().err


def test_cli_run_prints_margin(tmp_path, capsys):
    path = write_config(tmp_path, "fc.json", scalar_config(method="berezin-fc"))
    assert cli.main(["run", "--config", path]) == 0
    assert "ok, samples=301" in capsys.readouterr().out


def test_cli_run_failure_exits_one(tmp_path, capsys):
    runaway = {
        "method": "berezin-fc",
        "grid": {"t0": 0.0, "t1": 5.0, "step": 0.1},
        "coefficients": dict(SCALAR_COEFFS, eps_plus_re=50.0),
        "initial": {"chart": "fc", "eta": [0.0, 0.0], "w": [0.9, 0.0]},
        "k": 0.25,
    }
    # coarse fixed steps on a fast drive overshoot the disk; the run
    # must abort with context instead of sampling garbage
    path = write_config(tmp_path, "runaway.json", runaway)
    assert cli.main(["run", "--config", path]) == 1
    err = capsys.readouterr().err
    assert "run failed" in err and "|w| reached 1" in err


def test_cli_compare_prints_sorted_deviations(tmp_path, capsys):
    path = write_config(tmp_path, "cmp.json", scalar_config())
    assert cli.main(["compare", "--config", path]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if "max deviation" in l]
    assert len(lines) == 10
    assert lines == sorted(lines)
    assert "phase bridge residual max" in out


def test_cli_compare_gate_failure_exits_two(tmp_path, capsys):
    path = write_config(tmp_path, "tight.json", scalar_config(tolerances={"state": 1e-30}))
    assert cli.main(["compare", "--config", path]) == 2
    assert "FAIL state deviation" in capsys.readouterr().err


def test_cli_oracle_gate_failure_exits_two(tmp_path, capsys):
    cfg = scalar_config(method="fock-oracle", fock={"dim": 120}, tolerances={"fidelity": 1.1})
    path = write_config(tmp_path, "gate.json", cfg)
    assert cli.main(["oracle", "--config", path]) == 2
    captured = capsys.readouterr()
    assert "fock fidelity min" in captured.out
    assert "FAIL fock fidelity" in captured.err


def test_cli_batch_exit_code_is_worst(tmp_path, capsys):
    good = write_config(tmp_path, "good.json", scalar_config())
    missing = str(tmp_path / "absent.json")
    assert cli.main(["validate", "--config", good, "--config", missing]) == 1
    captured = capsys.readouterr()
    assert "ok (" in captured.out and "config error" in captured.err


def test_cli_parallel_batch(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SJDYN_THREADS", "2")
    a = write_config(tmp_path, "a.json", scalar_config())
    b = write_config(tmp_path, "b.json", ball_config())
    assert cli.main(["validate", "--config", a, "--config", b]) == 0
    out = capsys.readouterr().out
    assert "n=1" in out and "n=2" in out
