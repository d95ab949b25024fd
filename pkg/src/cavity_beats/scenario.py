"""Run configurations: strict JSON parsing, execution, CSV and summaries.

A scenario names one computation. Physics modes ("reduced", "composite",
"analytic") need a configuration, given either as the evenly tuned
shortcut (Omega plus a uniform coupling G) or as explicit levels, cavity
and couplings blocks; "validate" runs the reduced-versus-full comparison
ladder. Parsing is strict: unknown or malformed fields are rejected with
their path rather than ignored.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from . import composite as composite_mod
from .analytic import BeatMeasurement, beat_frequency, measure_beats, symmetric_solution
from .integrator import IntegrationError, IntegratorConfig
from .model import CavityParams, CouplingSet, LevelScheme, derive_rates, midpoint_levels
from .reduced import evolve
from .series import TimeSeries

MODES = ("reduced", "composite", "analytic", "validate")
CSV_COLUMNS = ("t", "rho_ee", "rho_11", "rho_22", "rho_gg", "re_rho_12", "im_rho_12", "abs_rho_12")
SWEEP_PARAMS = ("Omega", "eta", "t_end", "G")


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario input."""


def _check_keys(obj: dict, allowed: tuple[str, ...], path: str) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ScenarioError(f"{path}: unknown field(s) {', '.join(unknown)}")


def _real(obj: dict, key: str, path: str, default=None, required: bool = False):
    if key not in obj:
        if required:
            raise ScenarioError(f"{path}.{key}: required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number")
    return float(v)


def _complex(obj: dict, key: str, path: str, default=None, required: bool = False):
    if key not in obj:
        if required:
            raise ScenarioError(f"{path}.{key}: required")
        return default
    v = obj[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if (
        isinstance(v, list)
        and len(v) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    ):
        return complex(v[0], v[1])
    raise ScenarioError(f"{path}.{key}: expected a number or a [re, im] pair")


def _integer(obj: dict, key: str, path: str, default=None):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{path}.{key}: expected an integer")
    return v


@dataclass(frozen=True)
class Scenario:
    name: str
    mode: str
    eta: float = 1.0
    Omega: float | None = None
    G: complex | None = None
    levels: LevelScheme | None = None
    cavity: CavityParams | None = None
    couplings: CouplingSet | None = None
    t_end: float | None = None
    samples: int = 1601
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    n_max_a: int = 1
    n_max_b: int = 1
    g_values: tuple[float, ...] = (0.2, 0.1, 0.05)


_PHYSICS_KEYS = (
    "name", "mode", "eta", "Omega", "G", "levels", "cavity", "couplings",
    "t_end", "samples", "rel_tol", "abs_tol", "n_max_a", "n_max_b",
)
_VALIDATE_KEYS = ("name", "mode", "g_values", "Omega", "samples")


def parse_scenario(obj: dict, path: str = "scenario") -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: expected an object")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError(f"{path}.name: required non-empty string")
    mode = obj.get("mode")
    if mode not in MODES:
        raise ScenarioError(f"{path}.mode: must be one of {', '.join(MODES)}")

    if mode == "validate":
        _check_keys(obj, _VALIDATE_KEYS, path)
        gv = obj.get("g_values", [0.2, 0.1, 0.05])
        if (
            not isinstance(gv, list)
            or len(gv) < 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) or x <= 0 for x in gv)
        ):
            raise ScenarioError(f"{path}.g_values: expected a list of at least two positive numbers")
        return Scenario(
            name=name,
            mode=mode,
            Omega=_real(obj, "Omega", path, default=1.0),
            samples=_integer(obj, "samples", path, default=151),
            g_values=tuple(float(x) for x in gv),
        )

    _check_keys(obj, _PHYSICS_KEYS, path)
    omega = _real(obj, "Omega", path)
    g = _complex(obj, "G", path)
    explicit = [k for k in ("levels", "cavity", "couplings") if k in obj]
    if omega is not None and explicit:
        raise ScenarioError(f"{path}: give either Omega/G or levels/cavity/couplings, not both")
    if omega is None:
        if g is not None:
            raise ScenarioError(f"{path}.G: only meaningful together with Omega")
        if len(explicit) != 3:
            raise ScenarioError(f"{path}: need levels, cavity and couplings (or the Omega shortcut)")

    levels = cavity = couplings = None
    if omega is None:
        lv = obj["levels"]
        if not isinstance(lv, dict):
            raise ScenarioError(f"{path}.levels: expected an object")
        _check_keys(lv, ("omega_eg", "omega_1g", "omega_2g"), f"{path}.levels")
        try:
            levels = LevelScheme(
                omega_eg=_real(lv, "omega_eg", f"{path}.levels", required=True),
                omega_1g=_real(lv, "omega_1g", f"{path}.levels", required=True),
                omega_2g=_real(lv, "omega_2g", f"{path}.levels", required=True),
            )
        except ValueError as exc:
            raise ScenarioError(f"{path}.levels: {exc}") from exc
        cv = obj["cavity"]
        if not isinstance(cv, dict):
            raise ScenarioError(f"{path}.cavity: expected an object")
        _check_keys(cv, ("omega_a", "omega_b", "kappa_a", "kappa_b"), f"{path}.cavity")
        try:
            cavity = CavityParams(
                omega_a=_real(cv, "omega_a", f"{path}.cavity", required=True),
                omega_b=_real(cv, "omega_b", f"{path}.cavity", required=True),
                kappa_a=_real(cv, "kappa_a", f"{path}.cavity", default=1.0),
                kappa_b=_real(cv, "kappa_b", f"{path}.cavity", default=1.0),
            )
        except ValueError as exc:
            raise ScenarioError(f"{path}.cavity: {exc}") from exc
        cp = obj["couplings"]
        if not isinstance(cp, dict):
            raise ScenarioError(f"{path}.couplings: expected an object")
        _check_keys(cp, ("G_1e", "G_2e", "G_g1", "G_g2"), f"{path}.couplings")
        couplings = CouplingSet(
            G_1e=_complex(cp, "G_1e", f"{path}.couplings", required=True),
            G_2e=_complex(cp, "G_2e", f"{path}.couplings", required=True),
            G_g1=_complex(cp, "G_g1", f"{path}.couplings", required=True),
            G_g2=_complex(cp, "G_g2", f"{path}.couplings", required=True),
        )
    elif omega < 0:
        raise ScenarioError(f"{path}.Omega: must be nonnegative")

    t_end = _real(obj, "t_end", path, required=True)
    if t_end <= 0:
        raise ScenarioError(f"{path}.t_end: must be positive")
    samples = _integer(obj, "samples", path, default=1601)
    if samples is None or samples < 2:
        raise ScenarioError(f"{path}.samples: need at least 2")
    n_max_a = _integer(obj, "n_max_a", path, default=1)
    n_max_b = _integer(obj, "n_max_b", path, default=1)
    if (n_max_a < 1 or n_max_b < 1) and mode == "composite":
        raise ScenarioError(f"{path}: photon truncation must keep at least one photon")

    return Scenario(
        name=name,
        mode=mode,
        eta=_real(obj, "eta", path, default=1.0),
        Omega=omega,
        G=complex(1.0) if (omega is not None and g is None) else g,
        levels=levels,
        cavity=cavity,
        couplings=couplings,
        t_end=t_end,
        samples=samples,
        rel_tol=_real(obj, "rel_tol", path, default=1e-9),
        abs_tol=_real(obj, "abs_tol", path, default=1e-12),
        n_max_a=n_max_a,
        n_max_b=n_max_b,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path} is not valid JSON: {exc}") from exc
    return parse_scenario(obj)


def _configuration(sc: Scenario) -> tuple[LevelScheme, CavityParams, CouplingSet]:
    if sc.Omega is not None:
        levels, cavity = midpoint_levels(sc.Omega + 1.0, sc.Omega, sc.Omega)
        return levels, cavity, CouplingSet.uniform(sc.G)
    return sc.levels, sc.cavity, sc.couplings


@dataclass
class RunResult:
    scenario: Scenario
    summary: dict
    series: TimeSeries | None = None
    check: composite_mod.EliminationCheck | None = None
    partial: bool = False


def _json_complex(z: complex | None):
    if z is None:
        return None
    return [float(z.real), float(z.imag)]


def _summarize(sc: Scenario, series: TimeSeries, rates, partial: bool = False) -> dict:
    pred = None
    if rates.alpha is not None:
        pred = beat_frequency(rates, sc.eta)
    meas = BeatMeasurement(None, "none", "not measured")
    if len(series) >= 8 and not partial:
        try:
            meas = measure_beats(series, allow_tone_fit=True)
        except ValueError as exc:
            meas = BeatMeasurement(None, "none", f"measurement failed: {exc}")
    gg = series.population("g")
    slope = np.gradient(gg, series.times) if len(series) >= 2 else np.zeros(1)
    return {
        "name": sc.name,
        "mode": sc.mode,
        "eta": sc.eta,
        "rates": {
            "Gamma_1": rates.Gamma_1,
            "Gamma_2": rates.Gamma_2,
            "Gamma_1p": rates.Gamma_1p,
            "Gamma_2p": rates.Gamma_2p,
            "delta_1": rates.delta_1,
            "delta_2": rates.delta_2,
            "delta_1p": rates.delta_1p,
            "delta_2p": rates.delta_2p,
            "Omega": rates.Omega,
        },
        "alpha": _json_complex(rates.alpha),
        "beats_predicted": None if pred is None else pred.beats,
        "two_f_predicted": None if pred is None else pred.two_f,
        "two_f_measured": meas.two_f,
        "measure_method": meas.method,
        "measure_detail": meas.detail,
        "max_abs_rho_12": float(np.max(np.abs(series.coherence("1", "2")))),
        "min_rho_gg_slope": float(np.min(slope)),
        "max_drift_correction": float(series.max_drift_correction),
        "diagnostics": list(series.diagnostics),
        "partial": partial,
    }


def run_scenario(sc: Scenario) -> RunResult:
    """Execute one scenario; IntegrationError propagates with partial data."""
    if sc.mode == "validate":
        check = composite_mod.validate_elimination(
            g_values=sc.g_values, Omega=sc.Omega, samples=sc.samples
        )
        summary = {
            "name": sc.name,
            "mode": sc.mode,
            "g_values": list(check.g_values),
            "deviations": list(check.deviations),
            "monotone": check.monotone,
        }
        return RunResult(scenario=sc, summary=summary, check=check)

    levels, cavity, couplings = _configuration(sc)
    rates = derive_rates(couplings, levels, cavity)
    t = np.linspace(0.0, sc.t_end, sc.samples)
    cfg = IntegratorConfig(rel_tol=sc.rel_tol, abs_tol=sc.abs_tol)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0

    if sc.mode == "reduced":
        series = evolve(rho0, t, rates, eta=sc.eta, config=cfg)
    elif sc.mode == "analytic":
        if rates.alpha is None:
            raise ScenarioError(
                "analytic mode needs the evenly tuned configuration (use the Omega shortcut)"
            )
        series = symmetric_solution(t, rates, eta=sc.eta)
    else:
        if sc.eta != 1.0:
            raise ScenarioError("the full model has no interference dial; eta must stay 1")
        system = composite_mod.build_system(
            couplings, levels, cavity, n_max_a=sc.n_max_a, n_max_b=sc.n_max_b
        )
        states = composite_mod.evolve_composite(
            composite_mod.excited_vacuum(system), t, system, cfg
        )
        series = composite_mod.reduced_from_composite(states, t, system, levels)

    return RunResult(scenario=sc, summary=_summarize(sc, series, rates), series=series)


def partial_result(sc: Scenario, exc: IntegrationError) -> RunResult:
    """Package whatever an aborted integration produced."""
    levels, cavity, couplings = _configuration(sc)
    rates = derive_rates(couplings, levels, cavity)
    times = exc.partial_times if exc.partial_times is not None else np.zeros(0)
    states = exc.partial_states
    if states is None or times.size == 0:
        series = None
        summary = {"name": sc.name, "mode": sc.mode, "partial": True, "error": str(exc)}
    else:
        if sc.mode == "composite":
            # Partial composite states are on the big space; reduce what exists.
            system = composite_mod.build_system(
                couplings, levels, cavity, n_max_a=sc.n_max_a, n_max_b=sc.n_max_b
            )
            dim = system.dim
            series = composite_mod.reduced_from_composite(
                states.reshape(-1, dim, dim), times, system, levels
            )
        else:
            series = TimeSeries(times=times, states=states.reshape(-1, 4, 4))
        series.diagnostics.append(f"integration aborted: {exc}")
        summary = _summarize(sc, series, rates, partial=True)
        summary["error"] = str(exc)
    return RunResult(scenario=sc, summary=summary, series=series, partial=True)


def write_csv(series: TimeSeries, path: str) -> None:
    """All channels at 17 significant digits, LF line endings."""
    ch = series.channels()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for k in range(len(series)):
            fh.write(",".join(f"{ch[c][k]:.17g}" for c in CSV_COLUMNS) + "\n")


def write_summary(summary: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def sweep_variant(sc: Scenario, param: str, value: float) -> Scenario:
    """Derive the scenario for one sweep point.

    Omega and G sweeps keep the evenly tuned shortcut honest (the mode
    frequencies track the moving levels), so they require a shortcut
    scenario to begin with.
    """
    if param not in SWEEP_PARAMS:
        raise ScenarioError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMS)}")
    tag = f"{value:g}"
    name = f"{sc.name}_{param}_{tag}"
    if param in ("Omega", "G") and sc.Omega is None:
        raise ScenarioError(f"{param} sweep needs the Omega/G shortcut configuration")
    if param == "Omega":
        if value < 0:
            raise ScenarioError("Omega must be nonnegative")
        return dataclasses.replace(sc, Omega=float(value), name=name)
    if param == "G":
        return dataclasses.replace(sc, G=complex(value), name=name)
    if param == "eta":
        return dataclasses.replace(sc, eta=float(value), name=name)
    if value <= 0:
        raise ScenarioError("t_end must be positive")
    return dataclasses.replace(sc, t_end=float(value), name=name)


def run_sweep(sc: Scenario, param: str, values: list[float]) -> list[RunResult]:
    """Run one scenario per value; a failed point is recorded, not fatal."""
    if sc.mode == "validate":
        raise ScenarioError("sweep applies to the physics modes, not validate")
    if not values:
        raise ScenarioError("sweep needs at least one value")
    results = []
    for v in values:
        variant = sc
        try:
            variant = sweep_variant(sc, param, v)
            results.append(run_scenario(variant))
        except IntegrationError as exc:
            results.append(partial_result(variant, exc))
        except (ScenarioError, ValueError) as exc:
            # a bad point is recorded under its would-be name, the rest still run
            name = f"{sc.name}_{param}_{v:g}"
            results.append(
                RunResult(
                    scenario=variant,
                    summary={"name": name, "mode": variant.mode, "error": str(exc)},
                    partial=True,
                )
            )
    return results
