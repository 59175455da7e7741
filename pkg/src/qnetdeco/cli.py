"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 runtime or numerical
failure, 3 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import asymptotics, attractors, channel, entanglement
from .config import DEFAULT, Tolerances
from .exceptions import (
    InvalidNetworkError,
    InvalidStateError,
    NoFiniteSizeError,
    QnetError,
    SizeError,
)
from .io import dumps, fmt_float, matrix_csv, matrix_dump, parse_angle
from .linalg import kron, partial_trace, trace_distance
from .network import (
    NetworkSpec,
    StatePreset,
    network_from_dict,
    network_to_dict,
    preset_network,
    random_weights,
    realize_state,
    realize_vector,
    single_qubit_factor,
    validate,
)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_CAP = 0, 1, 2, 3


class ConfigError(QnetError, ValueError):
    pass


@dataclass
class RunConfig:
    network: NetworkSpec
    system_state: StatePreset
    env_state: StatePreset
    steps: int = 100
    observe: tuple[int, int] | None = (0, 1)
    tolerances: Tolerances = DEFAULT
    output: str | None = None
    seed: int = 0
    shots: int | None = None
    # kept so sweeps can rebuild the network along the n / phi axes
    network_source: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunConfig":
        for key in ("network", "system_state", "env_state"):
            if key not in d:
                raise ConfigError(f"config is missing '{key}'")
        spec = network_from_dict(d["network"])
        observe = d.get("observe", [0, 1] if spec.k >= 2 else None)
        try:
            tol = DEFAULT.with_overrides(**d.get("tolerances", {}))
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        return cls(
            network=spec,
            system_state=StatePreset.from_dict(d["system_state"]),
            env_state=StatePreset.from_dict(d["env_state"]),
            steps=int(d.get("steps", 100)),
            observe=None if observe is None else (int(observe[0]), int(observe[1])),
            tolerances=tol,
            output=d.get("output"),
            seed=int(d.get("seed", 0)),
            shots=d.get("shots"),
            network_source=dict(d["network"]),
        )

    def system_rho(self) -> np.ndarray:
        return realize_state(self.system_state, self.network.k, self.network.phi, tol=self.tolerances)

    def env_rho(self) -> np.ndarray:
        return realize_state(self.env_state, self.network.n, self.network.phi, tol=self.tolerances)

    def initial_state(self) -> np.ndarray:
        return kron(self.system_rho(), self.env_rho(), tol=self.tolerances)


@dataclass
class SweepConfig:
    base: RunConfig
    axis: str
    values: list


AXES = ("n", "alpha", "phi", "reseed")


def load_json(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _with_delta_literal(preset: StatePreset) -> StatePreset:
    if preset.tag == "delta":
        return StatePreset("delta", {**preset.params, "literal": True})
    if preset.tag == "product":
        states = tuple(_with_delta_literal(s) for s in preset.params["states"])
        return StatePreset("product", {**preset.params, "states": states})
    return preset


def apply_flags(cfg: RunConfig, args) -> RunConfig:
    tol = cfg.tolerances
    if getattr(args, "tol", None) is not None:
        tol = tol.with_overrides(converge=args.tol)
    if getattr(args, "oracle_cap", None) is not None:
        tol = tol.with_overrides(oracle_qubits=args.oracle_cap)
    cfg = replace(cfg, tolerances=tol)
    if getattr(args, "steps", None) is not None:
        cfg = replace(cfg, steps=args.steps)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "shots", None) is not None:
        cfg = replace(cfg, shots=args.shots)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, output=args.out)
    if getattr(args, "delta_literal", False):
        cfg = replace(cfg, env_state=_with_delta_literal(cfg.env_state))
    return cfg


def _require_valid(spec: NetworkSpec, tol: Tolerances) -> list[str]:
    rep = validate(spec, tol=tol)
    if not rep.ok:
        raise InvalidNetworkError("; ".join(rep.errors))
    if spec.dim > tol.max_dim:
        raise SizeError(f"register dimension {spec.dim} exceeds cap {tol.max_dim}")
    return rep.warnings


def _has_env_env(spec: NetworkSpec) -> bool:
    return any(not spec.is_system(e.control) and not spec.is_system(e.target) for e in spec.edges)


def closed_form_applies(spec: NetworkSpec) -> bool:
    return spec.n >= 2 and _has_env_env(spec)


def decoherence(cfg: RunConfig) -> asymptotics.DecoherenceFactor:
    spec, tol = cfg.network, cfg.tolerances
    if cfg.env_state.tag == "correlated":
        alpha = parse_angle(cfg.env_state.params["alpha"])
        return asymptotics.decoherence_factor_correlated(alpha, spec.n, spec.phi, tol=tol)
    xi = single_qubit_factor(cfg.env_state, spec.phi)
    if xi is not None:
        return asymptotics.decoherence_factor_product(xi, spec.n, spec.phi, tol=tol)
    return asymptotics.decoherence_factor(cfg.env_rho(), spec.phi, spec.n, tol=tol)


def product_overlap(cfg: RunConfig) -> float | None:
    xi = single_qubit_factor(cfg.env_state, cfg.network.phi)
    if xi is None:
        return None
    return asymptotics.decoherence_factor(xi, cfg.network.phi, 1).value


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _emit(cfg_out: str | None, suffix: str, text: str, stdout: bool = True) -> None:
    if cfg_out:
        _write(f"{cfg_out}_{suffix}", text)
    if stdout:
        sys.stdout.write(text)


def _pair_concurrence(rho: np.ndarray, observe) -> float | None:
    if observe is None:
        return None
    return entanglement.concurrence(partial_trace(rho, observe))


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    raw = load_json(args.config)
    net = raw.get("network", raw)
    spec = network_from_dict(net)
    rep = validate(spec)
    out = rep.to_dict()
    for key in ("system_state", "env_state"):
        if key in raw and rep.ok:
            nq = spec.k if key == "system_state" else spec.n
            try:
                realize_state(StatePreset.from_dict(raw[key]), nq, spec.phi)
            except (InvalidStateError, KeyError, ValueError) as exc:
                out["errors"].append(f"{key}: {exc}")
                out["ok"] = False
    sys.stdout.write(dumps(out))
    return EXIT_OK if out["ok"] else EXIT_INVALID


def simulate(cfg: RunConfig) -> tuple[list[channel.TrajectoryRecord], dict]:
    spec, tol = cfg.network, cfg.tolerances
    warnings = _require_valid(spec, tol)
    rho_s = cfg.system_rho()
    rho0 = kron(rho_s, cfg.env_rho(), tol=tol)
    r = decoherence(cfg)
    prediction = asymptotics.asymptotic_system_state(rho_s, r.value, tol=tol) if closed_form_applies(spec) else None
    observe = cfg.observe if spec.k >= 2 else None
    if cfg.shots:
        psi_s = realize_vector(cfg.system_state, spec.k, spec.phi)
        psi_e = realize_vector(cfg.env_state, spec.n, spec.phi)
        states = channel.sampled_estimates(np.kron(psi_s, psi_e), spec, cfg.steps, int(cfg.shots), cfg.seed)
        records = channel.observe_series(states, spec, observe, prediction)
    else:
        records = channel.iterate(rho0, spec, cfg.steps, observe, prediction)
    conv = channel.converge(rho0, spec, tol.converge, tol.max_iter)
    finals = [_pair_concurrence(rho, observe) for rho in conv.final_states]
    summary = {
        "status": conv.status,
        "steps_used": conv.steps_used,
        "final_steps": list(conv.final_steps),
        "final_concurrence": finals[0] if len(finals) == 1 else finals,
        "final_coherence_norm": [channel.coherence_norm(partial_trace(rho, range(spec.k))) for rho in conv.final_states],
        "r": r.value,
        "provenance": r.provenance,
        "monte_carlo": bool(cfg.shots),
        "warnings": warnings,
    }
    if prediction is not None:
        summary["final_distance_to_prediction"] = [
            trace_distance(partial_trace(rho, range(spec.k)), prediction) for rho in conv.final_states
        ]
    return records, summary


def cmd_simulate(args) -> int:
    cfg = apply_flags(RunConfig.from_dict(load_json(args.config)), args)
    records, summary = simulate(cfg)
    text = channel.trajectory_csv(records)
    if cfg.output:
        _write(f"{cfg.output}_trajectory.csv", text)
        _write(f"{cfg.output}_summary.json", dumps(summary))
        sys.stdout.write(dumps(summary))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _projection_basis(spec: NetworkSpec, tol: Tolerances):
    """Dualized attractor basis for the projection path, or (None, reason)."""
    if closed_form_applies(spec):
        basis = attractors.analytic_basis(spec.k, spec.n, spec.phi)
        if attractors.verify_basis(basis, spec, tol=tol).max_residual <= tol.residual:
            return attractors.dualize(basis, tol=tol), "analytic"
    if spec.num_qubits <= tol.oracle_qubits:
        return attractors.dualize(attractors.oracle_space(spec, tol=tol), tol=tol), "oracle"
    return None, f"register of {spec.num_qubits} qubits exceeds oracle cap {tol.oracle_qubits}"


def asymptotic_report(cfg: RunConfig) -> dict:
    spec, tol = cfg.network, cfg.tolerances
    warnings = _require_valid(spec, tol)
    rho_s = cfg.system_rho()
    rho0 = kron(rho_s, cfg.env_rho(), tol=tol)
    r = decoherence(cfg)
    closed = asymptotics.asymptotic_system_state(rho_s, r.value, tol=tol)
    applies = closed_form_applies(spec)
    sys_qubits = range(spec.k)

    conv = channel.converge(rho0, spec, tol.converge, tol.max_iter)
    periodic = conv.status == channel.ConvergenceStatus.PERIOD2
    parities = ("even", "odd") if periodic else ("limit",)
    iteration = {
        p: partial_trace(conv.state_for_parity(p) if periodic else conv.state, sys_qubits) for p in parities
    }

    basis, basis_source = _projection_basis(spec, tol)
    projection = None
    if basis is not None:
        has_minus = any(abs(b.eigenvalue - 1) > 1e-8 for b in basis.blocks)
        proj_parities = ("even", "odd") if has_minus else ("limit",)
        projection = {p: partial_trace(asymptotics.project_asymptotic(rho0, basis, p), sys_qubits) for p in proj_parities}

    def dist(a: dict | None, b: dict | None):
        if a is None or b is None:
            return None
        if len(a) == 1 and len(b) == 1:
            return trace_distance(next(iter(a.values())), next(iter(b.values())))
        keys = ("even", "odd")
        aa = {k: a.get(k, a.get("limit")) for k in keys}
        bb = {k: b.get(k, b.get("limit")) for k in keys}
        return max(trace_distance(aa[k], bb[k]) for k in keys)

    closed_d = {"limit": closed} if applies else None
    report = {
        "r": r.value,
        "provenance": r.provenance,
        "closed_form_applicable": applies,
        "status": conv.status,
        "steps_used": conv.steps_used,
        "system_state": matrix_dump(closed),
        "projection_basis": basis_source,
        "projection_state": None if projection is None else {p: matrix_dump(m) for p, m in projection.items()},
        "iteration_state": {p: matrix_dump(m) for p, m in iteration.items()},
        "agreement": {
            "projection_vs_closed_form": dist(projection, closed_d),
            "iteration_vs_closed_form": dist(iteration, closed_d),
            "projection_vs_iteration": dist(projection, iteration),
        },
        "warnings": warnings,
    }
    if periodic:
        report["asymptote"] = "period-2"
    if cfg.observe is not None and spec.k >= 2:
        conc = {"closed_form": _pair_concurrence_sys(closed, cfg.observe, spec.k)}
        conc["iteration"] = {p: _pair_concurrence_sys(m, cfg.observe, spec.k) for p, m in iteration.items()}
        if projection is not None:
            conc["projection"] = {p: _pair_concurrence_sys(m, cfg.observe, spec.k) for p, m in projection.items()}
        report["concurrence"] = conc
    return report


def _pair_concurrence_sys(rho_s: np.ndarray, observe, k: int) -> float:
    if k == 2:
        return entanglement.concurrence(rho_s)
    return entanglement.concurrence(partial_trace(rho_s, observe))


def cmd_asymptotic(args) -> int:
    cfg = apply_flags(RunConfig.from_dict(load_json(args.config)), args)
    _emit(cfg.output, "asymptotic.json", dumps(asymptotic_report(cfg)))
    return EXIT_OK


def _eigenvalue(lam: complex):
    lam = complex(lam)
    return lam.real if abs(lam.imag) <= 1e-12 else lam


def attractor_report(spec: NetworkSpec, tol: Tolerances, dump_prefix: str | None = None) -> dict:
    warnings = _require_valid(spec, tol)
    basis = attractors.analytic_basis(spec.k, spec.n, spec.phi)
    ver = attractors.verify_basis(basis, spec, tol=tol)
    report: dict[str, Any] = {
        "k": spec.k,
        "n": spec.n,
        "phi": spec.phi,
        "analytic": {
            "count": len(basis),
            "formula": attractors.analytic_count(spec.k),
            "max_residual": ver.max_residual,
            "argmax": None if ver.argmax is None else {
                "attractor": basis.attractors[ver.argmax[0]].label,
                "edge": network_to_dict(spec)["edges"][ver.argmax[1]],
            },
            "gram_rank": ver.gram_rank,
            "gram_condition": attractors.gram_condition(basis),
            "attractors": [
                {"eigenvalue": _eigenvalue(a.eigenvalue), "label": a.label, "residual_max": res}
                for a, res in zip(basis.attractors, ver.per_attractor)
            ],
        },
        "warnings": warnings,
    }
    if dump_prefix:
        for i, a in enumerate(basis.attractors):
            _write(f"{dump_prefix}_attractor_{i:03d}.csv", matrix_csv(a.matrix))
    if spec.num_qubits > tol.oracle_qubits:
        report["oracle"] = None
        report["oracle_skipped"] = f"register of {spec.num_qubits} qubits exceeds oracle cap {tol.oracle_qubits}"
        return report
    oracle = attractors.oracle_space(spec, tol=tol)
    over = attractors.verify_basis(oracle, spec, tol=tol)
    report["oracle"] = {
        "blocks": [{"eigenvalue": _eigenvalue(b.eigenvalue), "dimension": len(b.indices)} for b in oracle.blocks],
        "dimension_lambda_1": oracle.dimension(1.0),
        "has_lambda_minus_1": oracle.dimension(-1.0) > 0,
        "max_residual": over.max_residual,
    }
    return report


def cmd_attractors(args) -> int:
    raw = load_json(args.config)
    spec = network_from_dict(raw.get("network", raw))
    tol = DEFAULT.with_overrides(**raw.get("tolerances", {}))
    if args.oracle_cap is not None:
        tol = tol.with_overrides(oracle_qubits=args.oracle_cap)
    dump = args.out if args.dump_matrices else None
    _emit(args.out, "attractors.json", dumps(attractor_report(spec, tol, dump)))
    return EXIT_OK


def cmd_classify(args) -> int:
    raw = load_json(args.config)
    preset = raw.get("state", raw.get("system_state"))
    if preset is None:
        raise ConfigError("classify config needs a 'state' (or 'system_state') preset")
    phi = parse_angle(raw.get("phi", raw.get("network", {}).get("phi", 0.0)))
    rho = realize_state(StatePreset.from_dict(preset), 2, phi)
    result = entanglement.classify_fragility(rho, diagnose=True)
    _emit(args.out, "classify.json", dumps(result.to_dict()))
    return EXIT_OK


def _sweep_row(base: RunConfig, axis: str, value) -> RunConfig:
    cfg = base
    if axis in ("n", "phi"):
        src = dict(base.network_source)
        if "topology" not in src:
            raise ConfigError(f"sweeping '{axis}' needs a topology preset network")
        src[axis] = int(value) if axis == "n" else value
        cfg = replace(cfg, network=network_from_dict(src))
    elif axis == "alpha":
        cfg = replace(cfg, env_state=StatePreset("correlated", {"alpha": value}))
    elif axis == "reseed":
        cfg = replace(cfg, network=random_weights(base.network, np.random.default_rng(int(value))))
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}, expected one of {AXES}")
    return cfg


def sweep_row(base: RunConfig, axis: str, value) -> dict:
    row = {"axis_value": value, "final_concurrence": "", "r": "", "n_sep_predicted": "", "status": ""}
    try:
        cfg = _sweep_row(base, axis, value)
        spec, tol = cfg.network, cfg.tolerances
        _require_valid(spec, tol)
        rho0 = cfg.initial_state()
        conv = channel.converge(rho0, spec, tol.converge, tol.max_iter)
        observe = cfg.observe if spec.k >= 2 else None
        if observe is not None:
            if conv.status == channel.ConvergenceStatus.PERIOD2:
                parts = [_pair_concurrence(conv.state_for_parity(p), observe) for p in ("even", "odd")]
                row["final_concurrence"] = ";".join(fmt_float(c) for c in parts)
            else:
                row["final_concurrence"] = fmt_float(_pair_concurrence(conv.state, observe))
        row["r"] = fmt_float(decoherence(cfg).value)
        q = product_overlap(cfg)
        if q is not None and q > 0:
            try:
                row["n_sep_predicted"] = str(entanglement.n_sep(q))
            except NoFiniteSizeError:
                row["n_sep_predicted"] = "inf"
        row["status"] = conv.status.value
    except (QnetError, ValueError, KeyError) as exc:
        row["status"] = f"error: {exc}"
    return row


def _axis_value_str(v) -> str:
    return fmt_float(v) if isinstance(v, float) else str(v)


def sweep(cfg: SweepConfig, workers: int = 1) -> list[dict]:
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda v: sweep_row(cfg.base, cfg.axis, v), cfg.values))


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis_value", "final_concurrence", "r", "n_sep_predicted", "status"])
    for r in rows:
        w.writerow([_axis_value_str(r["axis_value"]), r["final_concurrence"], r["r"], r["n_sep_predicted"], r["status"]])
    return buf.getvalue()


def load_sweep(raw: Mapping[str, Any]) -> SweepConfig:
    if "base" not in raw or "axis" not in raw or "values" not in raw:
        raise ConfigError("sweep config needs 'base', 'axis' and 'values'")
    if raw["axis"] not in AXES:
        raise ConfigError(f"unknown sweep axis {raw['axis']!r}, expected one of {AXES}")
    return SweepConfig(RunConfig.from_dict(raw["base"]), raw["axis"], list(raw["values"]))


def cmd_sweep(args) -> int:
    sw = load_sweep(load_json(args.config))
    sw = replace(sw, base=apply_flags(sw.base, args))
    rows = sweep(sw, workers=args.workers)
    _emit(args.out, "sweep.csv", sweep_csv(rows))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnetdeco", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, *flags):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="JSON config path")
        sp.add_argument("--out", help="output path prefix")
        for flag in flags:
            flag(sp)
        sp.set_defaults(func=func)
        return sp

    def run_flags(sp):
        sp.add_argument("--steps", type=int, help="trajectory length")
        sp.add_argument("--tol", type=float, help="convergence tolerance (trace distance)")
        sp.add_argument("--oracle-cap", type=int, help="largest register (qubits) for the brute-force oracle")
        sp.add_argument("--seed", type=int, help="Monte-Carlo seed")
        sp.add_argument("--shots", type=int, help="use Monte-Carlo trajectories with this many shots")
        sp.add_argument("--delta-literal", action="store_true",
                        help="use the uncorrected delta environment state (it equals the coupling eigenstate)")

    add("validate", cmd_validate, "check a network config")
    add("simulate", cmd_simulate, "iterate the collision map and write a trajectory CSV", run_flags)
    add("asymptotic", cmd_asymptotic, "asymptotic state by projection, closed form and iteration", run_flags)
    add("attractors", cmd_attractors, "analytic and oracle attractor spaces",
        lambda sp: sp.add_argument("--oracle-cap", type=int),
        lambda sp: sp.add_argument("--dump-matrices", action="store_true"))
    add("classify", cmd_classify, "fragile/robust classification of a two-qubit state")
    add("sweep", cmd_sweep, "final concurrences along one parameter axis", run_flags,
        lambda sp: sp.add_argument("--workers", type=int, default=1))
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, InvalidNetworkError, InvalidStateError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QnetError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
