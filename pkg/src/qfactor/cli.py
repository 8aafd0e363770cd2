"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 contradiction or no template, 3 verification
failure, 4 I/O error. Every report embeds the run configuration and version,
and identical arguments give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, grover
from .circuit import compile_search, export_qasm
from .hamiltonian import ket, pauli_coefficients
from .pipeline import Reduction, SearchResult, reduce_with_mode, search, sweep_alpha
from .reduction import DecodeError, EnumerationLimitError, ReductionError, decode_factors, render_constraint
from .tomography import (
    dm_to_csv,
    dm_to_json,
    fidelity,
    overlap,
    psd_project,
    reconstruct,
    simulate_settings,
    stokes,
    theoretical_dm,
)

EXIT_OK, EXIT_USAGE, EXIT_CONTRADICTION, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3, 4
FORMATS = {
    "reduce": ("json", "text"),
    "factor": ("json", "text", "csv"),
    "tomography": ("json", "text", "csv"),
    "export-qasm": ("json", "text"),
}


class UsageError(Exception):
    pass


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    command: str
    composite_n: int
    alpha: int | None
    alpha_range: tuple[int, int] | None
    bit_len: int | None
    hamiltonian: str
    mode: str
    iterations: int | None
    diffuser_sign: int
    shots: int
    seed: int
    format: str
    psd: bool
    measure: bool
    output: str | None

    def alphas(self) -> list[int]:
        if self.alpha_range:
            lo, hi = self.alpha_range
            return list(range(lo, hi + 1))
        return [self.alpha]

    def to_json(self) -> dict:
        d = asdict(self)
        d["alpha_range"] = list(self.alpha_range) if self.alpha_range else None
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _alpha_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a..b, e.g. 2..5") from None
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError("need 2 <= a <= b")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qfactor", description="Factor equal-bit-length composites by reduction and Grover search.")
    p.add_argument("--version", action="version", version=f"qfactor {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, shots_default):
        sp.add_argument("composite_n", type=int, help="odd composite to factor")
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--alpha", type=int, help="number of prime factors")
        g.add_argument("--alpha-range", type=_alpha_range, help="try each alpha in a..b, keep the first consistent one")
        sp.add_argument("--bit-len", type=int, help="override the common factor bit length")
        sp.add_argument("--hamiltonian", choices=("paper", "sos"), default="paper", help="combination of the reduced equations")
        sp.add_argument("--mode", choices=grover.ORACLE_MODES, default="projector", help="oracle mode")
        sp.add_argument("--iterations", type=int, help="Grover iterations (default: minimal valid j)")
        sp.add_argument("--sign", type=int, choices=(-1, 1), default=-1, help="phase sign of oracle and diffuser")
        sp.add_argument("--shots", type=int, default=shots_default, help="shots per run or setting; 0 = exact")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--psd", action="store_true", help="project the reconstructed density matrix to PSD")
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")

    for name, shots, help_ in (
        ("reduce", 0, "build and minimize the multiplication-table equations"),
        ("factor", 1024, "run the full pipeline and decode sampled outcomes"),
        ("tomography", 8192, "simulate state tomography of the search output"),
        ("export-qasm", 0, "write the search circuit as OpenQASM 2.0"),
    ):
        sp = sub.add_parser(name, help=help_)
        common(sp, shots)
        sp.add_argument("--format", choices=FORMATS[name], default="json" if name != "export-qasm" else "text")
        if name == "export-qasm":
            sp.add_argument("--no-measure", dest="measure", action="store_false", help="omit the measurement block")
    return p


def parse_config(argv: list[str]) -> RunConfig:
    a = build_parser().parse_args(argv)
    if a.composite_n < 3 or a.composite_n % 2 == 0:
        raise UsageError("composite_n must be an odd integer >= 3")
    if a.alpha is not None and a.alpha < 2:
        raise UsageError("--alpha must be at least 2")
    if a.shots < 0:
        raise UsageError("--shots must be non-negative")
    if a.iterations is not None and a.iterations < 0:
        raise UsageError("--iterations must be non-negative")
    if a.command == "export-qasm" and not a.output:
        raise UsageError("export-qasm needs --output (use - for stdout)")
    return RunConfig(
        command=a.command,
        composite_n=a.composite_n,
        alpha=a.alpha,
        alpha_range=a.alpha_range,
        bit_len=a.bit_len,
        hamiltonian=a.hamiltonian,
        mode=a.mode,
        iterations=a.iterations,
        diffuser_sign=a.sign,
        shots=a.shots,
        seed=a.seed,
        format=a.format,
        psd=a.psd,
        measure=getattr(a, "measure", True),
        output=a.output,
    )


# ---------------------------------------------------------------------------
# shared steps


def _reduce(cfg: RunConfig) -> tuple[Reduction, list[dict] | None]:
    if cfg.alpha_range:
        red, log = sweep_alpha(cfg.composite_n, cfg.alphas(), cfg.bit_len, cfg.hamiltonian)
        if red is None:
            raise Failure(EXIT_CONTRADICTION, f"no alpha in {cfg.alpha_range[0]}..{cfg.alpha_range[1]} is consistent")
        return red, log
    try:
        return reduce_with_mode(cfg.composite_n, cfg.alpha, cfg.bit_len, cfg.hamiltonian), None
    except ReductionError as e:
        if isinstance(e, EnumerationLimitError):
            raise Failure(EXIT_VERIFY, f"enumeration budget exceeded: {e}") from None
        raise Failure(EXIT_CONTRADICTION, f"contradiction: {e}") from None


def _search(cfg: RunConfig, red: Reduction) -> SearchResult:
    try:
        return search(red, cfg.mode, cfg.iterations, cfg.diffuser_sign)
    except grover.PlanError as e:
        raise UsageError(str(e)) from None


def _header(cfg: RunConfig) -> dict:
    return {"tool": "qfactor", "version": __version__, "config": cfg.to_json()}


def _reduction_json(red: Reduction, sweep: list[dict] | None) -> dict:
    out = {
        "alpha": red.alpha,
        "system": red.system.to_json(),
        "reduced": red.reduced.to_json(),
        "hamiltonian_polynomial": {
            "mode": red.hamiltonian_mode,
            "notice": red.notice,
            "text": red.polynomial.render(),
            "terms": red.polynomial.to_json(),
        },
    }
    if sweep is not None:
        out["alpha_sweep"] = sweep
    return out


def _search_json(res: SearchResult) -> dict:
    h = res.hamiltonian
    return {
        "qubits": list(h.labels),
        "diag": list(h.diag),
        "pauli": pauli_coefficients(h).to_json(),
        "ground_states": [ket(i, h.n_qubits) for i in res.marked],
        "plan": res.plan.to_json() if res.plan else None,
        "success_probability": grover.success_probability(res.state, res.marked),
    }


def _outcome_probs(res: SearchResult, cfg: RunConfig) -> dict[str, float]:
    n = res.hamiltonian.n_qubits
    if cfg.shots == 0 or n == 0:
        p = grover.probabilities(res.state)
        return {ket(i, n): float(v) for i, v in enumerate(p) if v > 1e-12}
    counts = grover.sample(res.state, cfg.shots, cfg.seed)
    return {k: c / cfg.shots for k, c in counts.items()}


# ---------------------------------------------------------------------------
# commands


def cmd_reduce(cfg: RunConfig) -> tuple[dict, str]:
    red, sweep = _reduce(cfg)
    report = {**_header(cfg), **_reduction_json(red, sweep)}
    rs = red.reduced
    lines = [f"qfactor {__version__} reduce {cfg.composite_n} alpha={red.alpha} L={rs.template.bit_len}"]
    if sweep:
        lines += [f"sweep alpha={s['alpha']}: {s['status']}" for s in sweep]
    lines.append("raw equations:")
    lines += [f"  {c.render()}" for c in red.system.columns]
    lines.append("deductions:")
    lines += [f"  {d.rule} {d.var} = {d.value}" for d in red.system.deductions]
    lines.append("fixed factor bits: " + ", ".join(f"{v}={b}" for v, b in report["reduced"]["fixed"].items()))
    lines.append("reduced equations over " + ", ".join(rs.survivors) + ":")
    lines += [f"  {render_constraint(e)}" for e in rs.equations]
    if rs.elimination:
        lines.append(f"eliminated: {rs.elimination[0]} = {rs.elimination[1].render()}")
    lines.append(f"qubits: {', '.join(rs.ordering)}")
    lines.append(f"hamiltonian ({red.hamiltonian_mode}): {red.polynomial.render()}")
    if red.notice:
        lines.append(f"notice: {red.notice}")
    return report, "\n".join(lines) + "\n"


def cmd_factor(cfg: RunConfig) -> tuple[dict, str]:
    red, sweep = _reduce(cfg)
    res = _search(cfg, red)
    rs = red.reduced
    n = res.hamiltonian.n_qubits
    probs = _outcome_probs(res, cfg)
    outcomes = []
    for state, p in sorted(probs.items(), key=lambda kv: (-kv[1], kv[0])):
        entry = {"state": state, "frequency": p, "factors": None, "product_ok": False}
        try:
            fs = decode_factors([int(b) for b in state], rs.template, rs)
        except DecodeError:
            pass
        else:
            entry["factors"] = fs
            entry["product_ok"] = math.prod(fs) == cfg.composite_n
        outcomes.append(entry)
    valid = [o for o in outcomes if o["product_ok"]]
    if not valid:
        raise Failure(EXIT_VERIFY, "no sampled outcome decodes to a valid factorization")
    factor_sets = sorted({tuple(sorted(o["factors"])) for o in valid})
    report = {
        **_header(cfg),
        "alpha": red.alpha,
        "hamiltonian_mode": red.hamiltonian_mode,
        "notice": red.notice,
        **_search_json(res),
        "outcomes": outcomes,
        "factors": list(factor_sets[0]),
        "factor_sets": [list(f) for f in factor_sets],
        "product_check": all(math.prod(f) == cfg.composite_n for f in factor_sets),
    }
    if sweep is not None:
        report["alpha_sweep"] = sweep
    plan = res.plan
    lines = [f"qfactor {__version__} factor {cfg.composite_n} alpha={red.alpha} qubits={n}"]
    if plan:
        lines.append(
            f"plan: M={plan.marked_count} phi={plan.phi:.12f} theta={plan.theta:.12f} j={plan.iterations} mode={plan.oracle_mode}"
        )
    lines.append(f"success probability: {report['success_probability']:.12f}")
    for o in outcomes[:10]:
        fs = "-" if o["factors"] is None else "x".join(map(str, o["factors"]))
        lines.append(f"  |{o['state']}> {o['frequency']:.6f} {fs}")
    lines.append("factors: " + " x ".join(map(str, report["factors"])) + f" = {cfg.composite_n}")
    if cfg.format == "csv":
        return report, grover.probabilities_csv(res.state) if n else "index,state,probability\n0,,1.000000000000\n"
    return report, "\n".join(lines) + "\n"


def cmd_tomography(cfg: RunConfig) -> tuple[dict, str]:
    red, sweep = _reduce(cfg)
    res = _search(cfg, red)
    n = res.hamiltonian.n_qubits
    if n == 0:
        raise UsageError("tomography needs at least one qubit after reduction")
    records = simulate_settings(res.state, cfg.shots, cfg.seed)
    expectations = stokes(records)
    rho_e = reconstruct(expectations, n)
    if cfg.psd:
        rho_e = psd_project(rho_e)
    rho_t = theoretical_dm(res.marked, n)
    f = fidelity(rho_t, rho_e)
    report = {
        **_header(cfg),
        "alpha": red.alpha,
        "hamiltonian_mode": red.hamiltonian_mode,
        "plan": res.plan.to_json(),
        "ground_states": [ket(i, n) for i in res.marked],
        "fidelity": {
            "F": f,
            "overlap": overlap(rho_t, rho_e),
            "shots": cfg.shots,
            "seed": cfg.seed,
            "mode": "exact" if cfg.shots == 0 else "sampled",
            "psd": cfg.psd,
        },
        "edm": dm_to_json(rho_e),
        "tdm": dm_to_json(rho_t),
        "stokes": {k: round(v, 12) + 0.0 for k, v in expectations.items()},
        "records": [r.to_json() for r in records],
    }
    if sweep is not None:
        report["alpha_sweep"] = sweep
    if cfg.format == "csv":
        return report, dm_to_csv(rho_e)
    lines = [
        f"qfactor {__version__} tomography {cfg.composite_n} alpha={red.alpha} qubits={n}",
        f"settings: {len(records)} shots/setting: {cfg.shots} seed: {cfg.seed} psd: {cfg.psd}",
        f"fidelity: {f:.12f}",
        f"overlap: {report['fidelity']['overlap']:.12f}",
        "edm (real part):",
    ]
    lines += ["  " + " ".join(f"{x:+.4f}" for x in row) for row in np.real(rho_e)]
    return report, "\n".join(lines) + "\n"


def cmd_export_qasm(cfg: RunConfig) -> tuple[dict, str, str]:
    red, sweep = _reduce(cfg)
    res = _search(cfg, red)
    if res.plan is None:
        raise UsageError("nothing to export: the reduction left no qubits")
    text = export_qasm(compile_search(res.hamiltonian, res.plan), measure=cfg.measure)
    report = {**_header(cfg), "alpha": red.alpha, "plan": res.plan.to_json(), "lines": text.count("\n")}
    summary = f"wrote {report['lines']} lines of OpenQASM 2.0 to {cfg.output}\n"
    return report, summary, text


# ---------------------------------------------------------------------------


def _write(path: str | None, text: str, stdout):
    if path is None or path == "-":
        stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise Failure(EXIT_IO, f"cannot write {path}: {e.strerror or e}") from None


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def run(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(argv)
        if cfg.command == "export-qasm":
            report, summary, text = cmd_export_qasm(cfg)
            _write(cfg.output, text, stdout)
            if cfg.output != "-":
                stdout.write(_dump(report) if cfg.format == "json" else summary)
            return EXIT_OK
        handler = {"reduce": cmd_reduce, "factor": cmd_factor, "tomography": cmd_tomography}[cfg.command]
        report, text = handler(cfg)
        _write(cfg.output, _dump(report) if cfg.format == "json" else text, stdout)
        return EXIT_OK
    except UsageError as e:
        stderr.write(f"qfactor: usage error: {e}\n")
        return EXIT_USAGE
    except Failure as e:
        stderr.write(f"qfactor: {e}\n")
        return e.code


def main(argv: list[str] | None = None) -> int:
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
