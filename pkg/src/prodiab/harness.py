"""Config-driven scenario runner.

Parses flat key-value config files, builds the exact and eliminated
representations of a scenario, integrates them on a common grid, computes
comparison metrics against the exact oracle and writes plot-ready
comma-separated data files plus a structured-text report.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import (
    IntegratorConfig,
    LindbladModel,
    evolve,
    evolve_moments,
    g2_curve,
    steady_state,
)
from .elimination import (
    JCParams,
    epsilon_report,
    g2_pdb_analytic,
    jc_full_model,
    jc_g2_effective,
    jc_moment_system,
    jc_pdb_lindblad,
)
from .errors import ConfigError
from .operators import basis_density, build_transition
from .pulses import PulseEnvelope
from .stirap import (
    LambdaParams,
    adiabaticity_metric,
    filtered_envelopes,
    stirap_adb_generator,
    stirap_full_model,
    stirap_initial_moments,
    stirap_observables,
    stirap_pdb_generator,
    stirap_pdb_lindblad,
)

SCENARIOS = ("jc-sigmaz", "jc-g2", "stirap")
REPRESENTATIONS = ("exact", "adb", "pdb", "pdb-lme")
LEAK_THRESHOLD = 1e-6
DEFAULT_SWEEP = (0.005, 0.01, 0.02, 0.04)


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines, '#' comments; returns key -> (value, line)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", line=lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        out[key] = (value, lineno)
    return out


def _float(entries, key, default=None):
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value, line = entries.pop(key)
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {value!r}", line=line) from exc


def _int(entries, key, default=None):
    value = _float(entries, key, default)
    if value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {value}")
    return int(value)


def _str(entries, key, default=None):
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    return entries.pop(key)[0]


def _float_list(entries, key, default=()):
    if key not in entries:
        return list(default)
    value, line = entries.pop(key)
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number list: {value!r}", line=line) from exc


def _envelope(entries, prefix) -> PulseEnvelope:
    kind = _str(entries, f"{prefix}.kind")
    amp = _float(entries, f"{prefix}.amp")
    if kind == "constant":
        return PulseEnvelope.constant(amp)
    if kind == "boxcar":
        return PulseEnvelope.boxcar(
            center=_float(entries, f"{prefix}.center"),
            halfwidth=_float(entries, f"{prefix}.halfwidth"),
            amp=amp,
        )
    if kind == "gaussian":
        return PulseEnvelope.gaussian(
            amp=amp,
            center=_float(entries, f"{prefix}.center"),
            width=_float(entries, f"{prefix}.width"),
        )
    raise ConfigError(f"{prefix}.kind: unknown envelope kind {kind!r}")


@dataclass
class ScenarioConfig:
    scenario: str
    grid: np.ndarray
    representations: tuple[str, ...]
    integrator: IntegratorConfig
    out_dir: str | None
    n_max: int
    jc: JCParams | None = None
    drive_sweep: tuple[float, ...] = ()
    lam: LambdaParams | None = None
    initial_level: int = 1
    resolved: dict = field(default_factory=dict)


def load_config(path: str, overrides: dict | None = None) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        entries = parse_config_text(fh.read())
    for key, value in (overrides or {}).items():
        entries[key] = (value, 0)
    resolved = {k: v for k, (v, _) in entries.items()}

    scenario = _str(entries, "scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")

    start = _float(entries, "grid.start", 0.0)
    end = _float(entries, "grid.end")
    points = _int(entries, "grid.points")
    if points < 2:
        raise ConfigError("grid.points must be at least 2")
    if end <= start:
        raise ConfigError("grid.end must exceed grid.start")
    grid = np.linspace(start, end, points)

    reps_raw = _str(entries, "representations")
    reps = tuple(part.strip() for part in reps_raw.split(",") if part.strip())
    if not reps:
        raise ConfigError("at least one representation is required")
    for rep in reps:
        if rep not in REPRESENTATIONS:
            raise ConfigError(f"unknown representation {rep!r}")
    if scenario == "jc-g2" and "pdb-lme" in reps:
        raise ConfigError("pdb-lme is not a separate representation for jc-g2 "
                          "(the pdb correlator already runs on the effective master equation)")

    integrator = IntegratorConfig(
        rel_tol=_float(entries, "integrator.rel_tol", 1e-9),
        abs_tol=_float(entries, "integrator.abs_tol", 1e-12),
        max_step=_float(entries, "integrator.max_step", 0.1),
    )
    out_dir = _str(entries, "output.dir", "")

    cfg = ScenarioConfig(
        scenario=scenario,
        grid=grid,
        representations=reps,
        integrator=integrator,
        out_dir=out_dir or None,
        n_max=1,
        resolved=resolved,
    )

    if scenario.startswith("jc"):
        kappa = 1.0
        f_single = _float(entries, "jc.f_over_kappa", 2.5e-4 if scenario == "jc-g2" else 0.01)
        cfg.jc = JCParams(
            kappa=kappa,
            gamma=_float(entries, "jc.gamma_over_kappa"),
            g=_float(entries, "jc.g_over_kappa"),
            delta=_float(entries, "jc.delta_over_kappa", 0.0),
            omega=_float(entries, "jc.omega_over_kappa", 0.0),
            f=f_single,
        )
        cfg.n_max = _int(entries, "jc.n_max", 2)
        if scenario == "jc-sigmaz":
            sweep = _float_list(entries, "jc.drive_sweep", DEFAULT_SWEEP)
            cfg.drive_sweep = tuple(sweep)
        else:
            cfg.drive_sweep = (f_single,)
    else:
        env_h = _envelope(entries, "stirap.env_H")
        env_v = _envelope(entries, "stirap.env_V")
        cfg.lam = LambdaParams(
            kappa=1.0,
            gamma=_float(entries, "stirap.gamma_over_kappa"),
            g=_float(entries, "stirap.g_over_kappa"),
            env_H=env_h,
            env_V=env_v,
        )
        cfg.initial_level = _int(entries, "stirap.initial_level", 1)
        if cfg.initial_level not in (1, 2, 3):
            raise ConfigError("stirap.initial_level must be 1, 2 or 3")
        cfg.n_max = _int(entries, "stirap.n_max", 2)

    if entries:
        key, (_, line) = next(iter(entries.items()))
        raise ConfigError(f"unknown key {key!r}", line=line)
    return cfg


@dataclass
class PairMetric:
    reference: str
    other: str
    observable: str
    max_dev: float
    l2_dev: float
    t_of_max: float


@dataclass
class ComparisonReport:
    pairs: list[PairMetric] = field(default_factory=list)
    epsilon: dict = field(default_factory=dict)
    leak_max: float = float("nan")
    n_max_used: int = 0
    leak_flagged: bool = False
    wall_seconds: float = 0.0

    def lines(self):
        out = []
        for m in self.pairs:
            stem = f"pair.{m.reference}_vs_{m.other}.{m.observable}"
            out.append(f"{stem}.max_dev = {m.max_dev!r}")
            out.append(f"{stem}.l2_dev = {m.l2_dev!r}")
            out.append(f"{stem}.t_of_max = {m.t_of_max!r}")
        for key, value in self.epsilon.items():
            out.append(f"epsilon.{key} = {value!r}")
        out.append(f"leak.max = {self.leak_max!r}")
        out.append(f"leak.flagged = {self.leak_flagged}")
        out.append(f"leak.n_max_used = {self.n_max_used}")
        out.append(f"wall_seconds = {self.wall_seconds!r}")
        return out


def compare(curves: dict, grid, reference: str | None = None) -> list[PairMetric]:
    """Pairwise deviation metrics for named real curves on a shared grid.

    The representation named 'exact' (or ``reference``) is compared against
    every other curve; without a reference all unordered pairs are reported.
    """
    grid = np.asarray(grid, dtype=float)
    names = sorted(curves)
    for name in names:
        if len(np.asarray(curves[name])) != len(grid):
            raise ValueError(f"curve {name!r} does not share the grid")
    if reference is None and "exact" in curves:
        reference = "exact"
    if reference is not None:
        pairs = [(reference, other) for other in names if other != reference]
    else:
        pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
    out = []
    for ref, other in pairs:
        dev = np.abs(np.asarray(curves[other], dtype=float) - np.asarray(curves[ref], dtype=float))
        k = int(np.argmax(dev))
        out.append(
            PairMetric(
                reference=ref,
                other=other,
                observable="",
                max_dev=float(dev[k]),
                l2_dev=float(np.sqrt(np.mean(dev**2))),
                t_of_max=float(grid[k]),
            )
        )
    return out


def _run_exact_with_escalation(build, n_max, leak_keys):
    """Run an exact model, retrying once at a higher Fock truncation if the
    top-level leak exceeds the threshold."""
    traj = build(n_max)
    leak = max(float(np.max(np.abs(traj.observables[key]))) for key in leak_keys)
    flagged = leak > LEAK_THRESHOLD
    if flagged:
        n_max += 1
        traj = build(n_max)
        leak = max(float(np.max(np.abs(traj.observables[key]))) for key in leak_keys)
    return traj, leak, n_max, flagged


def _max_workers():
    value = os.environ.get("PRODIAB_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _run_tasks(tasks):
    """Run label -> callable tasks, possibly concurrently; results keyed by
    label so output order stays deterministic."""
    workers = _max_workers()
    if workers == 1 or len(tasks) <= 1:
        return {label: fn() for label, fn in tasks}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(label, pool.submit(fn)) for label, fn in tasks]
        return {label: fut.result() for label, fut in futures}


def _run_jc_sigmaz(cfg: ScenarioConfig):
    report = ComparisonReport()
    grid = cfg.grid
    curves = {}
    leak_overall = 0.0
    n_max_used = cfg.n_max
    flagged = False

    def exact_task(p):
        def build(n_max):
            model, obs = jc_full_model(p, n_max)
            rho0 = basis_density(model.space, (0, 0))
            return evolve(model, rho0, grid, cfg.integrator,
                          observables={"sigma_z": obs["sigma_z"], "leak": obs["leak"]})
        return _run_exact_with_escalation(build, cfg.n_max, ("leak",))

    def moment_task(p, order):
        system = jc_moment_system(p, order, drive=PulseEnvelope.constant(p.f), t_start=0.0)
        v0 = np.array([0.0, 0.0, -1.0], dtype=complex)
        return evolve_moments(system, v0, grid, cfg.integrator)

    def lme_task(p):
        em = jc_pdb_lindblad(p)
        rho0 = basis_density(em.model.space, (0,))
        sz = np.diag([-1.0, 1.0]).astype(complex)
        return evolve(em.model, rho0, grid, cfg.integrator, observables={"sigma_z": sz})

    tasks = []
    for f in cfg.drive_sweep:
        p = JCParams(kappa=1.0, gamma=cfg.jc.gamma, g=cfg.jc.g,
                     delta=cfg.jc.delta, omega=cfg.jc.omega, f=f)
        for rep in cfg.representations:
            label = (f, rep)
            if rep == "exact":
                tasks.append((label, (lambda p=p: exact_task(p))))
            elif rep in ("adb", "pdb"):
                tasks.append((label, (lambda p=p, rep=rep: moment_task(p, rep))))
            else:
                tasks.append((label, (lambda p=p: lme_task(p))))
    results = _run_tasks(tasks)

    for (f, rep), value in results.items():
        name = f"f{f:g}_{rep}_sigma_z"
        if rep == "exact":
            traj, leak, n_used, flag = value
            leak_overall = max(leak_overall, leak)
            n_max_used = max(n_max_used, n_used)
            flagged = flagged or flag
            curves[name] = traj.observables["sigma_z"]
        else:
            curves[name] = value.observables["sigma_z"]

    for f in cfg.drive_sweep:
        ref = f"f{f:g}_exact_sigma_z"
        if ref not in curves:
            continue
        family = {rep: curves[f"f{f:g}_{rep}_sigma_z"].real for rep in cfg.representations}
        for metric in compare(family, grid, reference="exact"):
            metric.observable = f"f{f:g}_sigma_z"
            report.pairs.append(metric)

    report.epsilon = _epsilon_echo(
        JCParams(kappa=1.0, gamma=cfg.jc.gamma, g=cfg.jc.g, delta=cfg.jc.delta,
                 omega=cfg.jc.omega, f=max(cfg.drive_sweep))
    )
    report.leak_max = leak_overall
    report.n_max_used = n_max_used
    report.leak_flagged = flagged
    files = {"sigmaz.csv": _csv_columns(grid, curves, split_complex=True)}
    return files, report


def _epsilon_echo(p: JCParams) -> dict:
    rep = epsilon_report(p)
    out = dict(rep.eps_sq_candidates)
    out.update(rep.eps_candidates)
    out["worst_eps"] = rep.worst_eps
    out["warn"] = rep.warn
    return out


def _run_jc_g2(cfg: ScenarioConfig):
    report = ComparisonReport()
    grid = cfg.grid
    p = cfg.jc
    curves = {}
    leak = float("nan")
    n_used = cfg.n_max
    flagged = False

    tasks = []
    if "exact" in cfg.representations:
        def exact_fn():
            def build(n_max):
                model, obs = jc_full_model(p, n_max)
                rho0 = basis_density(model.space, (0, 0))
                traj = evolve(model, rho0, grid, cfg.integrator, observables={"leak": obs["leak"]})
                g2 = g2_curve(model, obs["a"], grid, cfg.integrator)
                traj.observables["g2"] = g2
                return traj
            return _run_exact_with_escalation(build, cfg.n_max, ("leak",))
        tasks.append(("exact", exact_fn))
    if "adb" in cfg.representations:
        tasks.append(("adb", lambda: jc_g2_effective(p, grid, "adb", cfg=cfg.integrator)))
    if "pdb" in cfg.representations:
        tasks.append(("pdb", lambda: jc_g2_effective(p, grid, "pdb", include_noise=True, cfg=cfg.integrator)))
        tasks.append(("pdb_no_noise", lambda: jc_g2_effective(p, grid, "pdb", include_noise=False, cfg=cfg.integrator)))
        p_res = JCParams(kappa=p.kappa, gamma=p.gamma, g=p.g, delta=0.0, omega=0.0, f=p.f)
        tasks.append(("pdb_resonant_analog", lambda: jc_g2_effective(p_res, grid, "pdb", include_noise=True, cfg=cfg.integrator)))
        tasks.append(("analytic", lambda: g2_pdb_analytic(p_res, grid, include_noise=True)))
        tasks.append(("analytic_no_noise", lambda: g2_pdb_analytic(p_res, grid, include_noise=False)))
    results = _run_tasks(tasks)

    for name, value in results.items():
        if name == "exact":
            traj, leak, n_used, flagged = value
            curves["exact"] = traj.observables["g2"].real
        else:
            curves[name] = np.asarray(value, dtype=float)

    comparable = {k: v for k, v in curves.items() if k in ("exact", "adb", "pdb", "pdb_no_noise")}
    if len(comparable) > 1:
        for metric in compare(comparable, grid, reference="exact" if "exact" in comparable else None):
            metric.observable = "g2"
            report.pairs.append(metric)

    report.epsilon = _epsilon_echo(p)
    report.leak_max = leak
    report.n_max_used = n_used
    report.leak_flagged = flagged
    files = {"g2.csv": _csv_columns(grid, curves, split_complex=False)}
    return files, report


def _run_stirap(cfg: ScenarioConfig):
    report = ComparisonReport()
    grid = cfg.grid
    lam = cfg.lam
    level = cfg.initial_level
    pop_curves = {}
    leak = float("nan")
    n_used = cfg.n_max
    flagged = False

    def exact_fn():
        def build(n_max):
            model = stirap_full_model(lam, n_max=n_max, t_start=float(grid[0]))
            obs = stirap_observables(n_max)
            occ = tuple([0, 0, level - 1])
            rho0 = basis_density(model.space, occ)
            return evolve(model, rho0, grid, cfg.integrator, observables=obs)
        return _run_exact_with_escalation(build, cfg.n_max, ("leak_H", "leak_V"))

    def generator_fn(order):
        build = stirap_pdb_generator if order == "pdb" else stirap_adb_generator
        system = build(lam, t_start=float(grid[0]))
        traj = evolve_moments(system, stirap_initial_moments(level), grid, cfg.integrator)
        p1 = traj.observables["sigma_11"].real
        p2 = traj.observables["sigma_22"].real
        return {"P1": p1, "P2": p2, "P3": 1.0 - p1 - p2}

    def lme_fn():
        model = stirap_pdb_lindblad(lam, t_start=float(grid[0]))
        rho0 = basis_density(model.space, (level - 1,))
        obs = {f"P{k + 1}": build_transition(3, k, k).array for k in range(3)}
        traj = evolve(model, rho0, grid, cfg.integrator, observables=obs)
        return {key: traj.observables[key].real for key in obs}

    tasks = []
    for rep in cfg.representations:
        if rep == "exact":
            tasks.append(("exact", exact_fn))
        elif rep in ("adb", "pdb"):
            tasks.append((rep, lambda order=rep: generator_fn(order)))
        else:
            tasks.append(("pdb-lme", lme_fn))
    results = _run_tasks(tasks)

    for rep, value in results.items():
        if rep == "exact":
            traj, leak, n_used, flagged = value
            pops = {key: traj.observables[key].real for key in ("P1", "P2", "P3")}
        else:
            pops = value
        for key, curve in pops.items():
            pop_curves[f"{rep}_{key}"] = curve

    for key in ("P1", "P2", "P3"):
        family = {
            rep: pop_curves[f"{rep}_{key}"]
            for rep in cfg.representations
            if f"{rep}_{key}" in pop_curves
        }
        if len(family) > 1:
            for metric in compare(family, grid, reference="exact" if "exact" in family else None):
                metric.observable = key
                report.pairs.append(metric)

    f_h, f_v = filtered_envelopes(lam, grid)
    drive_curves = {
        "f_H": np.asarray(lam.env_H(grid), dtype=float),
        "f_V": np.asarray(lam.env_V(grid), dtype=float),
        "F_H": f_h,
        "F_V": f_v,
        "adiabaticity": adiabaticity_metric(f_h, f_v, grid),
    }

    probe = JCParams(kappa=1.0, gamma=lam.gamma, g=lam.g, f=max(lam.env_H.amp, lam.env_V.amp))
    report.epsilon = _epsilon_echo(probe)
    report.leak_max = leak
    report.n_max_used = n_used
    report.leak_flagged = flagged
    files = {
        "populations.csv": _csv_columns(grid, pop_curves, split_complex=False),
        "drives.csv": _csv_columns(grid, drive_curves, split_complex=False),
    }
    return files, report


def _csv_columns(grid, curves, split_complex):
    """Render a column table; complex curves are split into _re/_im."""
    names = list(curves)
    header = ["t_kappa"]
    columns = [np.asarray(grid, dtype=float)]
    for name in names:
        data = np.asarray(curves[name])
        if split_complex and np.iscomplexobj(data):
            header.extend([f"{name}_re", f"{name}_im"])
            columns.extend([data.real, data.imag])
        else:
            header.append(name)
            columns.append(data.real if np.iscomplexobj(data) else data)
    lines = [",".join(header)]
    for row in range(len(columns[0])):
        lines.append(",".join(repr(float(col[row])) for col in columns))
    return "\n".join(lines) + "\n"


def _header_block(cfg: ScenarioConfig) -> str:
    lines = [f"# prodiab {__version__}"]
    for key in sorted(cfg.resolved):
        lines.append(f"# {key} = {cfg.resolved[key]}")
    return "\n".join(lines) + "\n"


def run_scenario(cfg: ScenarioConfig, out_dir: str | None = None):
    """Execute a scenario; writes data files and the report, returns
    (file paths, ComparisonReport)."""
    started = time.perf_counter()
    if cfg.scenario == "jc-sigmaz":
        files, report = _run_jc_sigmaz(cfg)
    elif cfg.scenario == "jc-g2":
        files, report = _run_jc_g2(cfg)
    else:
        files, report = _run_stirap(cfg)
    report.wall_seconds = time.perf_counter() - started

    directory = out_dir or cfg.out_dir or "."
    os.makedirs(directory, exist_ok=True)
    header = _header_block(cfg)
    paths = {}
    for name, body in sorted(files.items()):
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header)
            fh.write(body)
        paths[name] = path
    report_path = os.path.join(directory, "report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(header)
        fh.write("\n".join(report.lines()) + "\n")
    paths["report.txt"] = report_path
    return paths, report
