"""Seeded experiments comparing the hidden-variable model with the quantum oracle.

Each ``run_*`` function takes an :class:`~hvqsim.config.ExperimentConfig` and
returns an :class:`ExperimentResult`: a JSON-ready report plus CSV tables.
All random streams are derived from ``cfg.seed`` by fixed keys, so results
do not depend on ``cfg.parallel``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import gravity as grav
from . import hvsignal as hs
from . import photon as ph
from . import qubit as qc
from .config import ExperimentConfig, parse_angle
from .errors import CapacityError, ConfigError
from .report import config_hash
from .rng import derive

# first key of every derived stream
_QUANTUM, _HV, _SUBNOISE, _GRAVITY, _REGISTER, _WAVEFORM = range(6)

CONVENTIONS = {
    "quantum": "spin-1/2 singlet, E(a,b) = -cos(a-b); parallel analyzers anticorrelate",
    "hidden_variable": (
        "shared uniform phase per trial, detector gain 2, baseband 2+2cos(phi+alpha), "
        "outcome sign(baseband-2) with sign(0)=+1; parallel cells correlate, E(0)=+1"
    ),
    "qubit_order": "little-endian; bitstring character i is qubit i (channel i+1)",
    "standard_error": "binomial, add-one proportion",
}


@dataclass
class ExperimentResult:
    report: dict
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)


def _base_report(cfg: ExperimentConfig) -> dict:
    canonical = cfg.canonical()
    return {
        "tool": {"name": "hvqsim", "version": __version__},
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config_hash": config_hash(canonical),
        "config": canonical,
        "conventions": CONVENTIONS,
    }


def _geometry(cfg: ExperimentConfig) -> hs.TrialGeometry:
    car = cfg.carrier
    hs.check_slowness(car["omega0"], car["correlation_time"])
    cutoff = None if car["cutoff"] is None else float(car["cutoff"])
    try:
        return hs.trial_geometry(float(car["omega0"]), float(car["sample_rate"]), cutoff, float(car["gain"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _hv_estimate(cfg, geom, a, b, seed, shared=True) -> tuple[float, float]:
    same = hs.hv_pair_agreements(a, b, cfg.trials, seed, geom=geom, shared=shared, workers=cfg.parallel)
    return qc.correlation_from_agreements(same, cfg.trials)


def _estimate_row(model, a, b, e, se, oracle):
    return {"model": model, "a": a, "b": b, "delta": b - a, "E": e, "stderr": se, "oracle": oracle}


def _pair_estimates(cfg: ExperimentConfig, pairs) -> list[dict]:
    """Estimates of E for each (a, b) pair for every requested model."""
    out = []
    geom = _geometry(cfg) if cfg.wants_hv else None
    for i, (a, b) in enumerate(pairs):
        if cfg.wants_quantum:
            exact = qc.pair_correlation_qm(a, b)
            out.append(_estimate_row("quantum-analytic", a, b, exact, 0.0, exact))
            e, se = qc.singlet_correlation_mc(a, b, cfg.trials, derive(cfg.seed, _QUANTUM, i))
            out.append(_estimate_row("quantum-mc", a, b, e, se, exact))
        if cfg.wants_hv:
            e, se = _hv_estimate(cfg, geom, a, b, derive(cfg.seed, _HV, i))
            out.append(_estimate_row("hidden-variable", a, b, e, se, hs.sawtooth_correlation(b - a)))
    return out


def _waveform_table(cfg: ExperimentConfig, alphas) -> tuple:
    geom = _geometry(cfg)
    car = cfg.carrier
    cells = hs.build_cells(
        len(alphas), alphas, geom.cfg, car["correlation_time"], derive(cfg.seed, _WAVEFORM),
        gain=geom.gain, cutoff=geom.filt.cutoff, keep_stages=True,
    )
    stage_names = list(cells[0].stages)
    header = ["time", "valid"] + [f"cell{j}_{s}" for j in range(len(cells)) for s in stage_names]
    base = cells[0].trace
    t = base.times()
    valid = np.zeros(t.size, dtype=int)
    valid[base.valid] = 1
    cols = [t, valid] + [c.stages[s].samples for c in cells for s in stage_names]
    return header, list(zip(*cols))


def _estimate_table(rows):
    header = ["model", "a", "b", "delta", "E", "stderr"]
    return header, [[r[k] for k in header] for r in rows]


def run_epr_correlation(cfg: ExperimentConfig) -> ExperimentResult:
    pairs = [(0.0, d) for d in cfg.angles]
    est = _pair_estimates(cfg, pairs)
    report = _base_report(cfg)
    report["results"] = {"estimates": est}
    tables = {"correlation.csv": (["delta", "E", "stderr", "model"],
                                  [[r["delta"], r["E"], r["stderr"], r["model"]] for r in est])}
    if cfg.dump_waveforms:
        tables["waveforms.csv"] = _waveform_table(cfg, [0.0, cfg.angles[min(1, len(cfg.angles) - 1)]])
    return ExperimentResult(report, tables)


def chsh_value(e_ab, e_abp, e_apb, e_apbp) -> float:
    return abs(e_ab - e_abp + e_apb + e_apbp)


def run_chsh(cfg: ExperimentConfig) -> ExperimentResult:
    if len(cfg.angles) != 4:
        raise ConfigError(f"chsh needs exactly 4 angles (a, a', b, b'), got {len(cfg.angles)}")
    a, ap, b, bp = cfg.angles
    pairs = [(a, b), (a, bp), (ap, b), (ap, bp)]
    est = _pair_estimates(cfg, pairs)
    summary = []
    for model in dict.fromkeys(r["model"] for r in est):
        terms = [r for r in est if r["model"] == model]
        s = chsh_value(*(r["E"] for r in terms))
        se = math.sqrt(sum(r["stderr"] ** 2 for r in terms))
        oracle = chsh_value(*(r["oracle"] for r in terms))
        summary.append({"model": model, "S": s, "stderr": se, "oracle": oracle, "classical_bound": 2.0})
    report = _base_report(cfg)
    report["results"] = {"terms": est, "chsh": summary}
    tables = {
        "chsh_terms.csv": _estimate_table(est),
        "chsh.csv": (["model", "S", "stderr"], [[r["model"], r["S"], r["stderr"]] for r in summary]),
    }
    if cfg.dump_waveforms:
        tables["waveforms.csv"] = _waveform_table(cfg, [a, b])
    return ExperimentResult(report, tables)


def run_interference(cfg: ExperimentConfig) -> ExperimentResult:
    """Coincidence curve P(same outcome) versus relative setting for both models."""
    est = _pair_estimates(cfg, [(0.0, d) for d in cfg.angles])
    rows = []
    for r in est:
        rows.append({"model": r["model"], "delta": r["delta"], "P_same": (1.0 + r["E"]) / 2.0,
                     "stderr": r["stderr"] / 2.0, "oracle": (1.0 + r["oracle"]) / 2.0})
    if cfg.wants_hv:
        for d in cfg.angles:
            p = (1.0 + hs.sawtooth_correlation(d)) / 2.0
            rows.append({"model": "hidden-variable-analytic", "delta": d, "P_same": p, "stderr": 0.0, "oracle": p})
    visibility = {}
    for model in dict.fromkeys(r["model"] for r in rows):
        p = [r["P_same"] for r in rows if r["model"] == model]
        hi, lo = max(p), min(p)
        visibility[model] = (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0
    report = _base_report(cfg)
    report["results"] = {"curve": rows, "visibility": visibility}
    tables = {"interference.csv": (["delta", "P_same", "stderr", "model"],
                                   [[r["delta"], r["P_same"], r["stderr"], r["model"]] for r in rows])}
    if cfg.dump_waveforms:
        tables["waveforms.csv"] = _waveform_table(cfg, [0.0, cfg.angles[min(1, len(cfg.angles) - 1)]])
    return ExperimentResult(report, tables)


def run_subnoise(cfg: ExperimentConfig) -> ExperimentResult:
    """Recover a phase offset buried under noise by correlating with the shared-phase reference."""
    sn = cfg.subnoise
    amp, sigma, alpha_star = float(sn["amplitude"]), float(sn["noise_std"]), float(sn["alpha_star"])
    counts = [int(n) for n in sn["trial_counts"]]
    reps = int(sn["repetitions"])
    if not counts or min(counts) < 2:
        raise ConfigError("subnoise trial_counts must all be >= 2 (one trial gives one equation for two quadratures)")
    if reps < 1 or amp <= 0 or sigma < 0:
        raise ConfigError("subnoise needs repetitions >= 1, amplitude > 0, noise_std >= 0")
    warnings = []
    if amp >= sigma:
        warnings.append(f"amplitude {amp:g} >= noise_std {sigma:g}: not a sub-noise scenario")
    geom = _geometry(cfg)
    variants = [("shared", True)] + ([("control", False)] if sn["control"] else [])
    rows, results = [], {}
    for vkey, (variant, shared) in enumerate(variants):
        per_n = []
        for j, n in enumerate(counts):
            errs, zbars, zall, first = [], [], [], None
            for r in range(reps):
                s, c, q = hs.phase_offset_trials(
                    alpha_star, amp, sigma, n, derive(cfg.seed, _SUBNOISE, vkey, j, r),
                    geom=geom, shared=shared, workers=cfg.parallel,
                )
                est, _ = hs.estimate_phase_offset(s, c, q)
                first = est if first is None else first
                errs.append(float(hs.wrap_angle(est - alpha_star)))
                z = 2.0 * s * (c + 1j * q)
                zbars.append(z.mean())
                zall.append(z)
            errs = np.array(errs)
            zbars = np.array(zbars)
            zall = np.concatenate(zall)
            snr_single = abs(zall.mean()) ** 2 / np.var(zall)
            snr_n = abs(zbars.mean()) ** 2 / np.var(zbars, ddof=1) if reps > 1 else float("nan")
            entry = {
                "trials": n,
                "estimate": first,
                "rms_error": float(np.sqrt(np.mean(errs ** 2))),
                "mean_abs_error": float(np.mean(np.abs(errs))),
                "snr_single": float(snr_single),
                "snr_gain": float(snr_n / snr_single) if snr_single > 0 else float("nan"),
            }
            per_n.append(entry)
            rows.append([variant, n, entry["estimate"], entry["rms_error"], entry["mean_abs_error"], entry["snr_gain"]])
        slope = None
        if len(counts) >= 2:
            logn = np.log([e["trials"] for e in per_n])
            loge = np.log([max(e["rms_error"], 1e-300) for e in per_n])
            slope = float(np.polyfit(logn, loge, 1)[0])
        results[variant] = {"per_trial_count": per_n, "error_slope": slope}
    best = results["shared"]["per_trial_count"][-1]
    report = _base_report(cfg)
    report["results"] = {
        "alpha_star": alpha_star,
        "amplitude": amp,
        "noise_std": sigma,
        "estimate": best["estimate"],
        "error": float(hs.wrap_angle(best["estimate"] - alpha_star)),
        "ideal_slope": -0.5,
        "variants": results,
    }
    report["warnings"] = warnings
    tables = {"subnoise.csv": (["variant", "trials", "estimate", "rms_error", "mean_abs_error", "snr_gain"], rows)}
    if cfg.dump_waveforms:
        tables["waveforms.csv"] = _waveform_table(cfg, [0.0, math.pi / 2.0, alpha_star])
    return ExperimentResult(report, tables)


def _gravity_modes(cfg: ExperimentConfig) -> grav.BackgroundEnsemble:
    g = cfg.gravity
    if g["modes"]:
        modes = []
        for m in g["modes"]:
            try:
                modes.append(grav.GravityMode(float(m["riemann_component"]),
                                              tuple(m.get("wavevector", (0.0, 0.0, 0.0))),
                                              float(m.get("amplitude", g["amplitude"]))))
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad gravity mode entry {m!r}") from exc
        return grav.BackgroundEnsemble(modes, None)
    if int(g["n_modes"]) < 1:
        raise ConfigError("gravity n_modes must be >= 1")
    return grav.sample_ensemble(int(g["n_modes"]), float(g["r_scale"]), derive(cfg.seed, _GRAVITY),
                                k_magnitude=float(g["k_magnitude"]), amplitude=float(g["amplitude"]))


def run_gravity(cfg: ExperimentConfig) -> ExperimentResult:
    g = cfg.gravity
    c = float(g["c"])
    ensemble = _gravity_modes(cfg)
    filt = grav.HeisenbergFilter(hbar=float(g["hbar"]))
    weak = grav.filter_weak(ensemble, filt, float(g["probe_mass"]), c)
    retained = set(map(id, weak.modes))
    spectrum = []
    for i, m in enumerate(ensemble.modes):
        spectrum.append([i, m.riemann_component, grav.mode_frequency(m, c), *m.wavevector, m.amplitude,
                         grav.mode_action(m, float(g["probe_mass"]), c), int(id(m) in retained)])

    mode = ensemble.modes[0]
    omega = grav.mode_frequency(mode, c)
    if omega > 0:
        period = 2 * math.pi / omega
        t_end = float(g["periods"]) * period
        dt = period / int(g["steps_per_period"])
    else:
        t_end = float(g["t_end"])
        dt = t_end / int(g["steps_per_period"])
    init = grav.DeviationState(mode.amplitude, 0.0, 0.0)
    traj = grav.integrate_deviation(mode, init, c, t_end, dt, probe_mass=float(g["probe_mass"]))
    exact = grav.harmonic_solution(omega, init, traj.time)
    err = np.abs(traj.ell - exact)

    axis = np.linspace(-float(g["grid_extent"]), float(g["grid_extent"]), int(g["grid_points"]))
    grid = np.array(np.meshgrid(axis, axis, axis, indexing="ij")).reshape(3, -1).T
    field_modes = weak if len(weak) else ensemble
    prob = grav.position_probability(field_modes, grid, float(g["grid_time"]), c)

    report = _base_report(cfg)
    report["results"] = {
        "n_modes": len(ensemble),
        "retained": len(weak),
        "dropped": len(weak.dropped),
        "trajectory": {
            "mode_index": 0, "omega": omega, "dt": dt, "t_end": t_end, "steps": len(traj) - 1,
            "max_abs_error": float(err.max()), "max_rel_error": float(err.max() / max(abs(mode.amplitude), 1e-300)),
            "energy_drift": traj.energy_drift() if traj.energy()[0] > 0 else 0.0,
        },
        "probability": {"points": int(grid.shape[0]), "sum": float(prob.sum()),
                        "field": "retained modes" if len(weak) else "all modes (none retained)"},
    }
    tables = {
        "modes.csv": (["index", "riemann_component", "omega", "kx", "ky", "kz", "amplitude", "action", "retained"],
                      spectrum),
        "trajectory.csv": (["t", "ell", "ell_dot", "analytic", "abs_error"],
                           list(zip(traj.time, traj.ell, traj.ell_dot, exact, err))),
        "probability.csv": (["x", "y", "z", "p"], [[*x, p] for x, p in zip(grid, prob)]),
    }
    return ExperimentResult(report, tables)


def _per_channel(values, n, default, name):
    if values is None:
        return [default] * n
    if len(values) != n:
        raise ConfigError(f"register.{name} must have one entry per rotation ({n})")
    return [parse_angle(v) for v in values]


def run_register_demo(cfg: ExperimentConfig) -> ExperimentResult:
    r = cfg.register
    thetas = [parse_angle(t) for t in r["rotations"]]
    lam = len(thetas)
    if lam < 1:
        raise ConfigError("register.rotations must not be empty")
    if lam > qc.MAX_QUBITS:
        raise CapacityError(f"{lam} channels exceed the {qc.MAX_QUBITS}-qubit register capacity")
    phases = _per_channel(r["phases"], lam, 0.0, "phases")
    preps = _per_channel(r["prep_axes"], lam, 0.0, "prep_axes")
    analyses = _per_channel(r["analysis_axes"], lam, 0.0, "analysis_axes")
    loss = ph.ReflectionLoss(float(r["loss_coefficient"]), int(r["loss_count"]))

    reg = qc.make_register(lam)
    for i, (t, p) in enumerate(zip(thetas, phases)):
        reg = qc.apply_unitary_at(reg, i, qc.rotation_unitary(t, p))
    idx = qc.sample_indices(reg, cfg.trials, derive(cfg.seed, _REGISTER, 1))

    n = cfg.trials
    channels, rows = [], []
    for i in range(lam):
        ch = ph.ChannelConfig(qc.rotation_unitary(thetas[i], phases[i]), ph.Polarizer(preps[i]),
                              ph.Polarizer(analyses[i]), loss)
        st = ph.channel_statistics(ch, n, derive(cfg.seed, _REGISTER, 0, i))
        clicks, ones = st["clicks"], st["outcome_counts"][1]
        p1_reg = float(np.mean((idx >> i) & 1))
        entry = {
            "channel": i + 1,
            "rotation": thetas[i],
            "pipeline_click_rate": clicks / n,
            "pipeline_click_rate_stderr": math.sqrt(max(st["click_probability"] * (1 - st["click_probability"]), 1.0 / n) / n),
            "pipeline_click_probability": st["click_probability"],
            "pipeline_p1_given_click": ones / clicks if clicks else None,
            "pipeline_p1_given_click_exact": ph.detector_state(ch).p1,
            "register_p1": p1_reg,
            "register_p1_stderr": math.sqrt(max(p1_reg * (1 - p1_reg), 1.0 / n) / n),
            "register_p1_exact": reg.marginal_p1(i),
        }
        channels.append(entry)
        rows.append([entry[k] if entry[k] is not None else "" for k in (
            "channel", "rotation", "pipeline_click_rate", "pipeline_click_probability",
            "pipeline_p1_given_click", "register_p1", "register_p1_exact")])
    report = _base_report(cfg)
    report["results"] = {"n_qubits": lam, "norm": reg.norm, "channels": channels}
    header = ["channel", "rotation", "pipeline_click_rate", "pipeline_click_probability",
              "pipeline_p1_given_click", "register_p1", "register_p1_exact"]
    return ExperimentResult(report, {"register.csv": (header, rows)})


RUNNERS = {
    "epr-correlation": run_epr_correlation,
    "chsh": run_chsh,
    "interference": run_interference,
    "subnoise": run_subnoise,
    "gravity": run_gravity,
    "register-demo": run_register_demo,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
