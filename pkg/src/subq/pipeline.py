"""End-to-end runs: load, decompose, plan, emulate, mitigate, diagonalise, report.

A :class:`RunConfig` names the mode and its parameters; :func:`run` executes
the stage sequence for that mode and returns a :class:`RunReport`.  With an
output directory the report and the per-stage artifacts are staged in a
scratch directory and moved into place only once every stage has succeeded.
"""

from __future__ import annotations

import dataclasses
import io
import math
import os
import platform
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from subq.errors import SubqError, ValidationError
from subq.hamiltonian import CIMatrix, build_cim, enumerate_determinants, load_matrix, read_fcidump
from subq.hamiltonian.cim import MAGIC
from subq.mitigation import EncodingMap, MitigationReport, mitigate
from subq.pauli import CoefficientMatrix, fwht_coefficients, pad_dimension, qubits_for
from subq.qdrift import DriftBudget, EvolutionPlan, compute_budget, plan_repetitions, repetition_rng
from subq.selected_ci import hci, probabilities_from_counts, qshci
from subq.stats import cosine_similarity, ks_statistic, total_variation
from subq.statevector import (
    BitstringCounts,
    NoiseSpec,
    apply_readout_noise,
    evolve,
    init_basis_state,
    sample,
)
from subq.subspace import SubspaceSelection, ground_state, project, qsci_loops

CHEMICAL_ACCURACY = 0.0016
REPORT_FORMAT = 1
MODES = ("qsci", "qshci", "hci", "exact", "analyze")
REPORT_COLUMNS = (
    "mode",
    "parameter",
    "subspace_size",
    "energy_hartree",
    "error_vs_exact",
    "accuracy",
    "qubits",
    "gate_count",
    "depth",
    "shots_retained",
)
LOOP_COLUMNS = ("loop", "subspace_size", "fraction", "energy_hartree", "residual", "seed")
ITERATION_COLUMNS = ("iter", "subspace_size", "energy_hartree", "added_count")


def report_qubits(n: int) -> int:
    """Index qubits for ``n`` configurations plus the parity qubit."""
    if n < 1:
        raise ValidationError("need at least one configuration")
    return qubits_for(n) + 1


def energy_error(energy: float, oracle_energy: float) -> float:
    return abs(float(energy) - float(oracle_energy))


def accuracy_flag(error: float, threshold: float = CHEMICAL_ACCURACY) -> str:
    """``below``, ``at`` or ``above`` the chemical-accuracy threshold."""
    if math.isclose(error, threshold, rel_tol=0.0, abs_tol=1e-12):
        return "at"
    return "below" if error < threshold else "above"


@dataclass
class RunConfig:
    mode: str
    input: str | None = None
    n_orb: int | None = None
    n_alpha: int | None = None
    n_beta: int | None = None
    t: float = 1.0
    fractions: tuple[float, ...] = (1.0,)
    n_loops: int = 10
    n_batches: int = 100
    shots: int = 10_000
    readout_flip_prob: float = 0.0
    seed: int | None = None
    epsilon: float | None = None
    drift_epsilon: float | None = None
    variance_factor: float = 1.0
    na_override: int | None = None
    r_override: int | None = None
    parity: bool = True
    recovery: bool = True
    max_iter: int | None = None
    drop_tol: float = 0.0
    counts_a: str | None = None
    counts_b: str | None = None
    output: str | None = None

    def __post_init__(self):
        if isinstance(self.fractions, (int, float)):
            self.fractions = (float(self.fractions),)
        self.fractions = tuple(float(f) for f in self.fractions)
        if self.seed is None:
            env = os.environ.get("SUBQ_SEED")
            try:
                self.seed = int(env) if env else 0
            except ValueError:
                raise ValidationError(f"SUBQ_SEED must be an integer, got {env!r}") from None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.mode == "analyze":
            if not (self.counts_a and self.counts_b):
                raise ValidationError("analyze needs two counts files")
            return
        if not self.input:
            raise ValidationError(f"{self.mode} needs an input FCIDUMP or matrix file")
        if self.mode == "hci" and self.epsilon is None:
            raise ValidationError("hci requires epsilon")
        if self.mode == "hci" and self.epsilon < 0:
            raise ValidationError("epsilon must be non-negative")
        if self.mode in ("qsci", "qshci"):
            if self.t <= 0:
                raise ValidationError("t must be positive")
            if self.shots < 1:
                raise ValidationError("shots must be positive")
            if not 0.0 <= self.readout_flip_prob <= 1.0:
                raise ValidationError("readout_flip_prob must lie in [0, 1]")
        if self.mode == "qsci":
            if not self.fractions or any(not 0 < f <= 1 for f in self.fractions):
                raise ValidationError("fractions must lie in (0, 1]")
            if self.n_loops < 1 or self.n_batches < 1:
                raise ValidationError("n_loops and n_batches must be positive")
        if self.mode == "qshci" and self.variance_factor <= 0:
            raise ValidationError("variance_factor must be positive")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key, text):
    kind = _FIELD_TYPES[key]
    if text.lower() in ("", "none") and "None" in kind:
        return None
    try:
        if kind.startswith("tuple"):
            return tuple(float(x) for x in text.replace(",", " ").split())
        if kind.startswith("bool"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ValidationError(f"config key {key!r}: cannot parse {text!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


def load_config(path: str | os.PathLike | None, overrides: dict) -> RunConfig:
    """Config file values overlaid with ``overrides`` (entries set to ``None`` are ignored)."""
    values = parse_config_text(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "mode" not in values:
        raise ValidationError("no mode given")
    return RunConfig(**values)


@dataclass
class RunReport:
    config: RunConfig
    rows: list[dict] = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    exact_energy: float | None = None

    def to_csv(self) -> str:
        env = " ".join(f"{k}={v}" for k, v in self.environment.items())
        lines = [f"# subq-report format={REPORT_FORMAT} {env}", ",".join(REPORT_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(_fmt(row.get(c)) for c in REPORT_COLUMNS))
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(columns, rows) -> str:
    return "\n".join([",".join(columns)] + [",".join(_fmt(v) for v in r) for r in rows]) + "\n"


class _Stage:
    """Tags any library error raised inside with the name of the stage."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, SubqError) and not getattr(exc, "stage", None):
            exc.stage = self.name
        return False


def environment(seed: int) -> dict:
    from subq import __version__

    return {
        "seed": seed,
        "subq": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def load_problem(path: str | os.PathLike, n_alpha=None, n_beta=None, n_orb=None, drop_tol=0.0) -> CIMatrix:
    """CI matrix from either a CIM1 file or an FCIDUMP (built in a full determinant basis)."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return load_matrix(path)
    integrals = read_fcidump(path)
    if n_orb is not None and n_orb != integrals.n_orb:
        raise ValidationError(f"FCIDUMP has {integrals.n_orb} orbitals, config says {n_orb}")
    basis = enumerate_determinants(
        integrals.n_orb,
        integrals.n_alpha if n_alpha is None else n_alpha,
        integrals.n_beta if n_beta is None else n_beta,
    )
    return build_cim(basis, integrals, drop_tol)


def exact_ground_energy(cim: CIMatrix, *, tol: float = 1e-10, max_iter: int | None = None) -> float:
    """Ground energy of the full matrix (core energy excluded)."""
    full = SubspaceSelection(tuple(range(cim.n)), "exact")
    if cim.n <= 4096:
        return ground_state(project(cim, full), tol=tol, max_iter=max_iter).energy
    return ground_state(cim.to_sparse(np.float64), tol=tol, max_iter=max_iter).energy


@dataclass(eq=False)
class Emulation:
    """Everything produced by the sampling half of a quantum-selected run."""

    coefficients: CoefficientMatrix
    budget: DriftBudget
    encoding: EncodingMap
    plans: list[EvolutionPlan]
    counts: BitstringCounts
    valid: dict[int, int]
    mitigation: MitigationReport

    @property
    def gate_count(self) -> int:
        return sum(len(p) for p in self.plans)

    @property
    def depth(self) -> int:
        return self.budget.n_a


def emulate(
    cim: CIMatrix,
    *,
    t: float = 1.0,
    shots: int = 10_000,
    seed: int = 0,
    readout_flip_prob: float = 0.0,
    parity: bool = True,
    recovery: bool = True,
    mitigation: bool = True,
    drift_epsilon: float | None = None,
    na_override: int | None = None,
    r_override: int | None = None,
    initial_index: int = 0,
) -> Emulation:
    """Evolve the reference configuration under modified qDRIFT and sample it.

    Each repetition draws its own plan and ``shots`` measurements, and the
    counts are merged.  With ``mitigation`` off, odd-parity strings are decoded
    by dropping the parity bit instead of being discarded.
    """
    with _Stage("decompose"):
        padded, q = pad_dimension(cim)
        coeffs = fwht_coefficients(padded)
        budget = compute_budget(
            coeffs, t, epsilon=drift_epsilon, n_a_override=na_override, r_override=r_override
        )
    with _Stage("plan"):
        encoding = EncodingMap(q, cim.n, parity)
        plans = plan_repetitions(coeffs, budget, seed, parity)
    with _Stage("simulate"):
        start = init_basis_state(encoding.encode(initial_index), encoding.q_total)
        noise = NoiseSpec(readout_flip_prob)
        counts = BitstringCounts(encoding.q_total)
        for plan in plans:
            state = evolve(start, plan)
            rep = plan.repetition_id
            drawn = sample(state, shots, repetition_rng(seed, rep, 1))
            counts = counts.merge(apply_readout_noise(drawn, noise, repetition_rng(seed, rep, 2)))
    with _Stage("mitigate"):
        if mitigation or not parity:
            valid, report = mitigate(counts, encoding, recovery=recovery)
        else:
            valid, report = decode_unmitigated(counts, encoding)
    return Emulation(coeffs, budget, encoding, plans, counts, valid, report)


def decode_unmitigated(counts: BitstringCounts, encoding: EncodingMap) -> tuple[dict[int, int], MitigationReport]:
    """Read configurations off the index bits, ignoring the parity qubit."""
    shift = 1 if encoding.parity else 0
    valid: dict[int, int] = {}
    pad = 0
    for bits, c in counts.counts.items():
        i = int(bits, 2) >> shift
        if i < encoding.n:
            valid[i] = valid.get(i, 0) + c
        else:
            pad += c
    kept = counts.shots_total - pad
    return dict(sorted(valid.items())), MitigationReport(counts.shots_total, kept, 0, 0, pad)


def _row(mode, parameter, size, energy, core, exact, qubits, emu: Emulation | None):
    total = energy + core
    err = None if exact is None else energy_error(energy, exact)
    return {
        "mode": mode,
        "parameter": parameter,
        "subspace_size": size,
        "energy_hartree": total,
        "error_vs_exact": err,
        "accuracy": None if err is None else accuracy_flag(err),
        "qubits": qubits,
        "gate_count": emu.gate_count if emu else 0,
        "depth": emu.depth if emu else 0,
        "shots_retained": emu.mitigation.retained + emu.mitigation.recovered if emu else 0,
    }


def _analyze(config: RunConfig) -> RunReport:
    report = RunReport(config, environment=environment(config.seed))
    with _Stage("load"):
        a = _read_counts(config.counts_a)
        b = _read_counts(config.counts_b)
        if a.q_total != b.q_total:
            raise ValidationError(f"counts widths differ: {a.q_total} vs {b.q_total}")
    with _Stage("analyze"):
        p, q = a.probabilities(), b.probabilities()
        d, p_value = ks_statistic(p, q, a.shots_total, b.shots_total)
        metrics = {
            "cosine_distance": cosine_similarity(p, q),
            "ks_statistic": d,
            "ks_p_value": p_value,
            "total_variation": total_variation(p, q),
        }
    report.artifacts["metrics.csv"] = "metric,value\n" + "".join(
        f"{k},{_fmt(v)}\n" for k, v in metrics.items()
    )
    report.rows = [{"mode": "analyze", "parameter": k, "energy_hartree": v} for k, v in metrics.items()]
    return report


def _read_counts(path) -> BitstringCounts:
    with open(path) as fh:
        return BitstringCounts.read(fh)


def execute(config: RunConfig) -> RunReport:
    """Run every stage in memory; nothing is written."""
    config.validate()
    if config.mode == "analyze":
        return _analyze(config)
    report = RunReport(config, environment=environment(config.seed))
    with _Stage("load"):
        cim = load_problem(config.input, config.n_alpha, config.n_beta, config.n_orb, config.drop_tol)
    qubits = report_qubits(cim.n)
    core = cim.core_energy
    exact = None
    if config.mode == "exact" or cim.n <= 4096:
        with _Stage("exact"):
            exact = exact_ground_energy(cim, max_iter=config.max_iter)
        report.exact_energy = exact + core
    if config.mode == "exact":
        report.rows.append(_row("exact", None, cim.n, exact, core, exact, qubits, None))
        return report
    if config.mode == "hci":
        history: list = []
        with _Stage("hci"):
            res, sel, _ = hci(cim, config.epsilon, max_iter=config.max_iter, history=history)
        report.rows.append(_row("hci", config.epsilon, len(sel), res.energy, core, exact, qubits, None))
        report.artifacts["iterations.csv"] = _csv(
            ITERATION_COLUMNS, [(i, s, e + core, a) for i, s, e, a in history]
        )
        return report

    emu = emulate(
        cim,
        t=config.t,
        shots=config.shots,
        seed=config.seed,
        readout_flip_prob=config.readout_flip_prob,
        parity=config.parity,
        recovery=config.recovery,
        drift_epsilon=config.drift_epsilon,
        na_override=config.na_override,
        r_override=config.r_override,
    )
    report.artifacts["counts.txt"] = emu.counts.to_text()
    report.artifacts["mitigation.txt"] = emu.mitigation.to_text()
    report.artifacts["plans.txt"] = "".join(p.to_text() for p in emu.plans)
    if config.mode == "qshci":
        history = []
        with _Stage("qshci"):
            probs = probabilities_from_counts(emu.valid)
            res, sel, _ = qshci(
                cim, probs, config.variance_factor, max_iter=config.max_iter, history=history
            )
        report.rows.append(
            _row("qshci", config.variance_factor, len(sel), res.energy, core, exact, qubits, emu)
        )
        report.artifacts["iterations.csv"] = _csv(
            ITERATION_COLUMNS, [(i, s, e + core, a) for i, s, e, a in history]
        )
        return report

    loop_rows = []
    with _Stage("diagonalize"):
        for fraction in config.fractions:
            best = None
            for lr in qsci_loops(emu.valid, cim, fraction, config.n_loops, config.n_batches, config.seed):
                loop_rows.append(
                    (lr.loop, len(lr.selection), fraction, lr.result.energy + core, lr.result.residual_norm, lr.seed)
                )
                if best is None or lr.result.energy < best.result.energy:
                    best = lr
            report.rows.append(
                _row("qsci", fraction, len(best.selection), best.result.energy, core, exact, qubits, emu)
            )
            report.artifacts[f"selection_{fraction:g}.txt"] = best.selection.to_text()
    report.artifacts["loops.csv"] = _csv(LOOP_COLUMNS, loop_rows)
    return report


def write_outputs(report: RunReport, output: str | os.PathLike) -> None:
    """Stage every file in a scratch directory, then move them into ``output``."""
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    try:
        files = dict(report.artifacts)
        files["report.csv"] = report.to_csv()
        for name, text in files.items():
            (scratch / name).write_text(text)
        for name in files:
            os.replace(scratch / name, out / name)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


@contextmanager
def _thread_cap(threads):
    if not threads:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=int(threads)):
        yield


def run(config: RunConfig, *, threads: int | None = None) -> RunReport:
    """Execute ``config`` and, if it names an output directory, write the results there."""
    with _thread_cap(threads):
        report = execute(config)
    if config.output:
        with _Stage("write"):
            write_outputs(report, config.output)
    return report


def report_text(report: RunReport) -> str:
    buf = io.StringIO()
    buf.write(report.to_csv())
    if report.exact_energy is not None:
        buf.write(f"# exact_energy_hartree={report.exact_energy!r}\n")
    return buf.getvalue()
