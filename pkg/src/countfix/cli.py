"""Command-line front end.

    countfix run      --p-loss 0.5 --lambda 1 --prior pdc:0.7 --emit pnm,optmap --out results
    countfix simulate --p-loss 0.5 --lambda 1 --seed 7 --shots 100000 --out results

`run` evaluates the analytic pipeline and writes the selected artifacts
(pmn, pn, pnm, optmap, fidelity, simulate) plus summary.json; `simulate`
only runs the seeded Monte Carlo and writes the empirical count matrix.
Flags override values from an optional --config JSON file. All outputs are
plain rectangular data rendered at 12 significant digits and are
byte-deterministic for a fixed configuration.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .detector import ConditionalMatrix, DetectorParams, build_matrix
from .inference import OptimisationReport, PosteriorMatrix, optimisation_map, posterior
from .montecarlo import EmpiricalColumn, ShotConfig, empirical_matrix
from .priors import NumberPrior, custom_prior, pdc_prior, uniform_prior

__all__ = ["RunConfig", "PriorSpec", "UsageError", "parse_config", "run", "main"]

EMIT_CHOICES = ("pmn", "pn", "pnm", "optmap", "fidelity", "simulate")

_DEFAULT_EMIT = "pmn,pn,pnm,optmap,fidelity"

_DEFAULTS = {
    "p_loss": 0.0,
    "lambda": 0.0,
    "tail_eps": 1e-10,
    "n_max": 19,
    "prior": None,
    "emit": _DEFAULT_EMIT,
    "format": "csv",
    "out": ".",
    "seed": 0,
    "shots": 10**6,
}

UNDEFINED = "undefined"


class UsageError(ValueError):
    """Bad flag or config value; maps to exit code 2."""


@dataclass(frozen=True)
class PriorSpec:
    """Parsed --prior value: pdc:<chi> | uniform:<lo>:<hi> | custom:<path>."""

    kind: str
    chi: float = 0.0
    lo: int = 0
    hi: int = 0
    path: Path | None = None
    text: str = ""

    def build(self, n_max: int) -> NumberPrior:
        if self.kind == "pdc":
            return pdc_prior(self.chi, n_max=n_max)
        if self.kind == "uniform":
            return uniform_prior(self.lo, self.hi)
        weights = _load_custom_weights(self.path)
        return custom_prior(weights, label=f"custom({self.path.name})")


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration for one invocation."""

    detector: DetectorParams
    prior_spec: PriorSpec | None
    n_max: int
    outputs: tuple[str, ...]
    seed: int
    shots: int
    out_dir: Path
    format: str

    def __post_init__(self) -> None:
        if not self.outputs:
            raise ValueError("at least one output must be selected")


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Parse argv (and an optional --config JSON file) into a RunConfig.

    Explicit flags override config-file values, which override defaults.
    Raises UsageError on invalid values; argparse itself exits with code 2
    on unknown flags.
    """
    args = _build_parser().parse_args(argv)
    values = dict(_DEFAULTS)
    if args.config is not None:
        values.update(_load_config_file(args.config))
    for key in _DEFAULTS:
        attr = "lam" if key == "lambda" else key
        flag_value = getattr(args, attr, None)
        if flag_value is not None:
            values[key] = flag_value
    if args.command == "simulate":
        values["emit"] = "simulate"
        values["prior"] = None
    return _validate(values, command=args.command)


def run(config: RunConfig) -> int:
    """Execute the pipeline and write the selected artifacts.

    Prints one line per emitted file; undefined-outcome warnings go to
    standard error.
    """
    try:
        config.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"countfix: cannot create output directory: {exc}", file=sys.stderr)
        return 3
    try:
        result = _compute(config)
    except (UsageError, ValueError) as exc:
        print(f"countfix: error: {exc}", file=sys.stderr)
        return 2
    if result.post is not None and not result.post.defined.all():
        missing = np.flatnonzero(~result.post.defined).tolist()
        print(
            f"countfix: warning: outcomes {missing} have zero probability "
            "under this prior and detector; emitted as undefined",
            file=sys.stderr,
        )
    try:
        for line in _emit(config, result):
            print(line)
    except OSError as exc:
        print(f"countfix: write failed: {exc}", file=sys.stderr)
        return 3
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"countfix: error: {exc}", file=sys.stderr)
        return 2
    return run(config)


# --- configuration plumbing ---


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countfix",
        description="Bayesian post-processing of number-resolving detector signatures.",
    )
    parser.add_argument("--version", action="version", version=f"countfix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evaluate the analytic pipeline and emit artifacts")
    sim_p = sub.add_parser("simulate", help="run the seeded Monte Carlo and emit counts")
    for p in (run_p, sim_p):
        p.add_argument("--config", type=Path, help="JSON file providing defaults for any flag")
        p.add_argument("--p-loss", dest="p_loss", type=float, help="per-photon loss probability in [0, 1] (default 0)")
        p.add_argument("--lambda", dest="lam", type=float, help="mean dark counts per shot, >= 0 (default 0)")
        p.add_argument("--tail-eps", dest="tail_eps", type=float, help="truncation tail bound in (0, 1) (default 1e-10)")
        p.add_argument("--n-max", dest="n_max", type=int, help="largest incident photon number (default 19)")
        p.add_argument("--format", choices=("csv", "json"), help="output file format (default csv)")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--seed", type=int, help="64-bit Monte Carlo stream seed (default 0)")
        p.add_argument("--shots", type=int, help="Monte Carlo repetitions (default 1000000)")
    run_p.add_argument("--prior", help="photon-number prior: pdc:<chi> | uniform:<lo>:<hi> | custom:<path>")
    run_p.add_argument(
        "--emit",
        help=f"comma-separated artifacts from {{{','.join(EMIT_CHOICES)}}} (default {_DEFAULT_EMIT})",
    )
    return parser


def _load_config_file(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"--config: {path} must contain a JSON object")
    unknown = sorted(set(raw) - set(_DEFAULTS))
    if unknown:
        raise UsageError(f"--config: unknown keys {unknown}; allowed: {sorted(_DEFAULTS)}")
    return raw


def _validate(values: dict, command: str) -> RunConfig:
    p_loss = _as_float(values["p_loss"], "--p-loss")
    if not 0.0 <= p_loss <= 1.0:
        raise UsageError(f"--p-loss must be in [0, 1] (got {values['p_loss']})")
    lam = _as_float(values["lambda"], "--lambda")
    if not lam >= 0.0:
        raise UsageError(f"--lambda must be >= 0 (got {values['lambda']})")
    tail_eps = _as_float(values["tail_eps"], "--tail-eps")
    if not 0.0 < tail_eps < 1.0:
        raise UsageError(f"--tail-eps must be in (0, 1) (got {values['tail_eps']})")
    n_max = _as_int(values["n_max"], "--n-max")
    if n_max < 0:
        raise UsageError(f"--n-max must be >= 0 (got {n_max})")
    seed = _as_int(values["seed"], "--seed")
    if not 0 <= seed < 2**64:
        raise UsageError(f"--seed must be an unsigned 64-bit integer (got {seed})")
    shots = _as_int(values["shots"], "--shots")
    if shots < 1:
        raise UsageError(f"--shots must be >= 1 (got {shots})")
    fmt = str(values["format"])
    if fmt not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json (got {fmt})")
    outputs = _parse_emit(str(values["emit"]))
    prior_spec = None
    if values["prior"] is not None:
        prior_spec = _parse_prior(str(values["prior"]))
    elif command == "run":
        raise UsageError("--prior is required for `run` (pdc:<chi> | uniform:<lo>:<hi> | custom:<path>)")
    return RunConfig(
        detector=DetectorParams(p_loss=p_loss, lam=lam, tail_epsilon=tail_eps),
        prior_spec=prior_spec,
        n_max=n_max,
        outputs=outputs,
        seed=seed,
        shots=shots,
        out_dir=Path(values["out"]),
        format=fmt,
    )


def _as_float(value, flag: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: not a number (got {value!r})") from None


def _as_int(value, flag: str) -> int:
    if isinstance(value, float) and not value.is_integer():
        raise UsageError(f"{flag}: not an integer (got {value!r})")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: not an integer (got {value!r})") from None


def _parse_emit(text: str) -> tuple[str, ...]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError("--emit: at least one output must be selected")
    unknown = [t for t in names if t not in EMIT_CHOICES]
    if unknown:
        raise UsageError(f"--emit: unknown outputs {unknown}; choose from {list(EMIT_CHOICES)}")
    seen = dict.fromkeys(names)
    return tuple(seen)


def _parse_prior(text: str) -> PriorSpec:
    parts = text.split(":")
    kind = parts[0]
    if kind == "pdc" and len(parts) == 2:
        chi = _as_float(parts[1], "--prior pdc")
        if not 0.0 <= chi < 1.0:
            raise UsageError(f"--prior: pdc chi must be in [0, 1) (got {parts[1]})")
        return PriorSpec(kind="pdc", chi=chi, text=text)
    if kind == "uniform" and len(parts) == 3:
        lo = _as_int(parts[1], "--prior uniform")
        hi = _as_int(parts[2], "--prior uniform")
        if lo < 0 or hi < lo:
            raise UsageError(f"--prior: uniform range needs 0 <= lo <= hi (got {text!r})")
        return PriorSpec(kind="uniform", lo=lo, hi=hi, text=text)
    if kind == "custom" and len(parts) == 2:
        path = Path(parts[1])
        if not path.is_file():
            raise UsageError(f"--prior: custom weight file not found: {path}")
        return PriorSpec(kind="custom", path=path, text=text)
    raise UsageError(
        f"--prior: cannot parse {text!r}; expected pdc:<chi>, uniform:<lo>:<hi> or custom:<path>"
    )


def _load_custom_weights(path: Path) -> list[float]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--prior: cannot read custom weights from {path}: {exc}") from exc
    if not isinstance(raw, list) or not all(isinstance(x, (int, float)) for x in raw):
        raise UsageError(f"--prior: {path} must hold a JSON array of nonnegative numbers")
    return [float(x) for x in raw]


# --- pipeline ---


@dataclass(frozen=True)
class _Result:
    matrix: ConditionalMatrix
    prior: NumberPrior | None
    post: PosteriorMatrix | None
    report: OptimisationReport | None
    empirical: list[EmpiricalColumn] | None


def _compute(config: RunConfig) -> _Result:
    matrix = build_matrix(config.detector, config.n_max)
    prior = post = report = None
    if config.prior_spec is not None:
        prior = config.prior_spec.build(config.n_max)
        post = posterior(matrix, prior)
        report = optimisation_map(post)
    empirical = None
    if "simulate" in config.outputs:
        shot_config = ShotConfig(params=config.detector, seed=config.seed, shots=config.shots)
        empirical = empirical_matrix(shot_config, config.n_max)
    return _Result(matrix=matrix, prior=prior, post=post, report=report, empirical=empirical)


# --- rendering ---


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _emit(config: RunConfig, result: _Result) -> list[str]:
    ext = config.format
    lines = []
    for kind in EMIT_CHOICES:
        if kind not in config.outputs:
            continue
        path = config.out_dir / f"{_FILE_STEMS[kind]}.{ext}"
        writer = _WRITERS[kind]
        lines.append(writer(path, config, result))
    if config.prior_spec is not None:
        path = config.out_dir / "summary.json"
        _write_text(path, _summary_text(config, result))
        lines.append(f"wrote {path}")
    return lines


def _write_pmn(path: Path, config: RunConfig, result: _Result) -> str:
    matrix = result.matrix
    cells = [[_fmt(v) for v in row] for row in matrix.entries]
    _write_table(path, config.format, "m", "n", cells)
    return f"wrote {path} (P(m|n), {matrix.m_max + 1} x {matrix.n_max + 1})"


def _write_pn(path: Path, config: RunConfig, result: _Result) -> str:
    prior = result.prior
    cells = [[_fmt(v)] for v in prior.probs]
    _write_table(path, config.format, "n", None, cells, value_names=["P(n)"])
    return f"wrote {path} ({prior.label}, {len(prior.probs)} entries)"


def _write_pnm(path: Path, config: RunConfig, result: _Result) -> str:
    post = result.post
    cells = [
        [_fmt(post.entries[n, m]) if post.defined[m] else UNDEFINED for m in range(post.m_max + 1)]
        for n in range(post.n_max + 1)
    ]
    _write_table(path, config.format, "n", "m", cells)
    return f"wrote {path} (P(n|m), {post.n_max + 1} x {post.m_max + 1})"


def _write_optmap(path: Path, config: RunConfig, result: _Result) -> str:
    report = result.report
    cells = [
        [str(int(report.map[m])) if report.defined[m] else UNDEFINED]
        for m in range(report.m_max + 1)
    ]
    _write_table(path, config.format, "m", None, cells, value_names=["m_opt"])
    return f"wrote {path} (optimisation map, {report.m_max + 1} signatures)"


def _write_fidelity(path: Path, config: RunConfig, result: _Result) -> str:
    report = result.report
    cells = []
    for m in range(report.m_max + 1):
        if report.defined[m]:
            cells.append(
                [
                    _fmt(report.outcome_marginal[m]),
                    _fmt(report.fidelity_raw[m]),
                    _fmt(report.fidelity_opt[m]),
                ]
            )
        else:
            cells.append([_fmt(0.0), UNDEFINED, UNDEFINED])
    _write_table(path, config.format, "m", None, cells, value_names=["P(m)", "F_raw", "F_opt"])
    return f"wrote {path} (fidelities, {report.m_max + 1} signatures)"


def _write_simulate(path: Path, config: RunConfig, result: _Result) -> str:
    columns = result.empirical
    depth = max(len(c.counts) for c in columns)
    cells = [
        [str(int(c.counts[m]) if m < len(c.counts) else 0) for c in columns]
        for m in range(depth)
    ]
    _write_table(path, config.format, "m", "n", cells)
    return f"wrote {path} (empirical counts, seed={config.seed}, shots={config.shots})"


_FILE_STEMS = {
    "pmn": "pmn",
    "pn": "pn",
    "pnm": "pnm",
    "optmap": "optmap",
    "fidelity": "fidelity",
    "simulate": "empirical_pmn",
}

_WRITERS = {
    "pmn": _write_pmn,
    "pn": _write_pn,
    "pnm": _write_pnm,
    "optmap": _write_optmap,
    "fidelity": _write_fidelity,
    "simulate": _write_simulate,
}


def _write_table(path, fmt, row_name, col_name, cells, value_names=None):
    """Rectangular data with a leading row-index column.

    Column headers are the column indices when col_name is given, the
    explicit value_names otherwise. CSV cells hold 12-significant-digit
    renderings or the `undefined` marker; the JSON variant carries the
    same strings as numbers or null.
    """
    width = len(cells[0]) if cells else 0
    header = [str(i) for i in range(width)] if col_name is not None else list(value_names)
    if fmt == "csv":
        rows = [",".join([row_name] + header)]
        rows += [",".join([str(i)] + row) for i, row in enumerate(cells)]
        _write_text(path, "\n".join(rows) + "\n")
    else:
        doc = {
            "row_index": row_name,
            "columns": [col_name + str(i) for i in range(width)] if col_name is not None else header,
            "values": [[_cell_to_json(c) for c in row] for row in cells],
        }
        _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _cell_to_json(cell: str):
    if cell == UNDEFINED:
        return None
    try:
        return int(cell)
    except ValueError:
        return float(cell)


def _summary_text(config: RunConfig, result: _Result) -> str:
    report = result.report
    doc = {
        "tool": "countfix",
        "version": __version__,
        "p_loss": float(config.detector.p_loss),
        "lambda": float(config.detector.lam),
        "tail_epsilon": float(config.detector.tail_epsilon),
        "n_max": config.n_max,
        "m_max": result.matrix.m_max,
        "prior": result.prior.label,
        "prior_spec": config.prior_spec.text,
        "seed": config.seed,
        "shots": config.shots,
        "avg_fidelity_raw": float(_fmt(report.avg_fidelity_raw)),
        "avg_fidelity_opt": float(_fmt(report.avg_fidelity_opt)),
        "undefined_outcomes": np.flatnonzero(~report.defined).tolist(),
        "tied_outcomes": np.flatnonzero(report.tie).tolist(),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


if __name__ == "__main__":
    sys.exit(main())
