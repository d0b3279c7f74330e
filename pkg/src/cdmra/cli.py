"""Command-line front end: dB-aware parameter parsing, subcommand dispatch,
CSV/JSON emission, and one-shot regeneration of the reference result sets.

Outputs are byte-deterministic for a given config: the embedded resolved
config excludes execution-only knobs (threads, output destination), and no
timestamps are written. Exit codes: 0 success, 1 statistical failure,
2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .analytic import inv_success_limit, success_prob, throughput_sum
from .model import (
    INFINITE_SEQUENCES,
    ParameterError,
    Scheme,
    SystemParams,
    db_to_linear,
    linear_to_db,
    validate,
)
from .numerics import derive_seed
from .simulator import estimate_ps_given_k, estimate_throughput
from .sweep import (
    SweepSpec,
    crossover_lambda,
    limit_throughput,
    max_throughput,
    run_sweep,
    sequences_for_fraction,
    z_score,
)

ALL_SCHEMES = (Scheme.CONVENTIONAL, Scheme.ADAPTIVE_CONST, Scheme.ADAPTIVE_INV)
FIGURE_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")
_LAMBDA_GRID_STEP = 0.25
_LAMBDA_GRID_STOP = 40.0


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """Resolved invocation: parse -> to_argv -> parse round-trips identically."""

    command: str
    stations: int = 8192
    proc_gain: float = 64.0
    nseq: str = "128"               # integer text or "inf"
    eta_db: float = 5.0
    snr_db: float = 30.0
    outage: float = 0.7
    power_norm: str = "received"
    scheme: str = "all"
    lam: str = "18.1"
    slots: int = 100_000
    seed: int = 42
    threads: int = 1
    fmt: str = "csv"
    output: str = "-"
    out_dir: str = "figures"
    analytic_only: bool = False
    only: str = ""
    trials: int = 1_000_000
    k: int | None = None
    corrupt_noise: float = 1.0

    def to_argv(self) -> list[str]:
        argv = [
            self.command,
            "--stations", str(self.stations),
            "--proc-gain", repr(self.proc_gain),
            "--nseq", self.nseq,
            "--eta-db", repr(self.eta_db),
            "--snr-db", repr(self.snr_db),
            "--outage", repr(self.outage),
            "--power-norm", self.power_norm,
            "--scheme", self.scheme,
            "--seed", str(self.seed),
            "--threads", str(self.threads),
        ]
        if self.command in ("analytic", "simulate"):
            argv += ["--lambda", self.lam, "--format", self.fmt, "--output", self.output]
        if self.command == "simulate":
            argv += ["--slots", str(self.slots)]
        if self.command == "figures":
            argv += ["--out-dir", self.out_dir, "--slots", str(self.slots)]
            if self.analytic_only:
                argv += ["--analytic-only"]
            if self.only:
                argv += ["--only", self.only]
        if self.command == "validate":
            argv += ["--trials", str(self.trials), "--slots", str(self.slots)]
            if self.k is not None:
                argv += ["--k", str(self.k)]
            if self.corrupt_noise != 1.0:
                argv += ["--corrupt-noise", repr(self.corrupt_noise)]
        return argv

    def resolved(self) -> dict:
        """Config embedded in outputs; excludes execution-only knobs so the
        bytes are invariant under --threads and redirection."""
        d = asdict(self)
        for key in ("threads", "output", "out_dir"):
            d.pop(key, None)
        d["tool"] = "cdmra"
        d["version"] = __version__
        return d


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stations", type=int, default=8192, help="total remote stations")
    p.add_argument("--proc-gain", type=float, default=64.0, help="processing gain")
    p.add_argument("--nseq", default="128", help="number of sequences, or 'inf'")
    p.add_argument("--eta-db", type=float, default=5.0, help="minimum required SINR [dB]")
    p.add_argument("--snr-db", type=float, default=30.0, help="average packet SNR [dB]")
    p.add_argument("--outage", type=float, default=0.7, help="deferral probability in [0, 1)")
    p.add_argument("--power-norm", choices=("received", "average-tx"), default="received",
                   help="normalization of the gain-inverting power budget")
    p.add_argument("--scheme", choices=("conv", "const", "inv", "all"), default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=1,
                   help="simulation worker count (never changes results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdmra",
        description="Throughput of sequence-based slotted random access with SINR capture",
    )
    parser.add_argument("--version", action="version", version=f"cdmra {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form throughput table over arrival rates")
    _add_param_flags(p)
    p.add_argument("--lambda", dest="lam", default="18.1",
                   help="arrival rate value or start:stop:step (inclusive)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default="-", help="output path, or - for stdout")

    p = sub.add_parser("simulate", help="Monte Carlo throughput table over arrival rates")
    _add_param_flags(p)
    p.add_argument("--lambda", dest="lam", default="18.1",
                   help="arrival rate value or start:stop:step (inclusive)")
    p.add_argument("--slots", type=int, default=100_000)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default="-", help="output path, or - for stdout")

    p = sub.add_parser("figures", help="regenerate the reference result sets fig3..fig9")
    _add_param_flags(p)
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--slots", type=int, default=100_000)
    p.add_argument("--analytic-only", action="store_true",
                   help="skip simulation columns (runs in well under a minute)")
    p.add_argument("--only", default="", help="comma list of figures, e.g. fig3,fig5")

    p = sub.add_parser("validate", help="analytic vs simulated oracle grid; exit 1 on |z| >= 4")
    _add_param_flags(p)
    p.add_argument("--trials", type=int, default=1_000_000,
                   help="trials per capture-probability cell")
    p.add_argument("--slots", type=int, default=100_000,
                   help="slots per throughput cell")
    p.add_argument("--k", type=int, default=None,
                   help="probe a single transmitter count instead of the default grid")
    p.add_argument("--corrupt-noise", type=float, default=1.0, help=argparse.SUPPRESS)

    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for name in vars(cfg):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


def params_from_config(cfg: RunConfig) -> SystemParams:
    nseq_text = cfg.nseq.strip().lower()
    if nseq_text in ("inf", "infinite"):
        n_seq: int | float = INFINITE_SEQUENCES
    else:
        try:
            n_seq = int(nseq_text)
        except ValueError as exc:
            raise ParameterError([f"n_seq: expected an integer or 'inf', got {cfg.nseq!r}"]) from exc
    return validate(SystemParams(
        n_stations=cfg.stations,
        proc_gain=cfg.proc_gain,
        n_seq=n_seq,
        sinr_min=db_to_linear(cfg.eta_db),
        snr=db_to_linear(cfg.snr_db),
        outage=cfg.outage,
        power_norm=cfg.power_norm,
    ))


def schemes_from_config(cfg: RunConfig) -> tuple[Scheme, ...]:
    if cfg.scheme == "all":
        return ALL_SCHEMES
    return (Scheme.parse(cfg.scheme),)


def parse_lambda_spec(text: str) -> list[float]:
    """Arrival-rate axis: a single value or start:stop:step, endpoints
    inclusive within 1e-9."""
    parts = text.split(":")
    if len(parts) == 1:
        value = float(parts[0])
        if not value > 0:
            raise ParameterError([f"lambda: must be positive, got {text!r}"])
        return [value]
    if len(parts) != 3:
        raise ParameterError([f"lambda: expected VALUE or START:STOP:STEP, got {text!r}"])
    start, stop, step = (float(p) for p in parts)
    if not (start > 0 and stop >= start and step > 0):
        raise ParameterError([f"lambda: need 0 < start <= stop and step > 0, got {text!r}"])
    values = []
    i = 0
    while True:
        v = start + i * step
        if v > stop + 1e-9:
            break
        values.append(v)
        i += 1
    return values


# ---------------------------------------------------------------------------
# output formatting


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(cfg: RunConfig, header: list[str], rows: list[list]) -> None:
    out = sys.stdout if cfg.output == "-" else open(cfg.output, "w", newline="")
    try:
        if cfg.fmt == "csv":
            out.write(f"# tool: cdmra {__version__}\n")
            out.write("# config: " + json.dumps(cfg.resolved(), sort_keys=True) + "\n")
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        else:
            payload = {
                "meta": cfg.resolved(),
                "rows": [dict(zip(header, row)) for row in rows],
            }
            json.dump(payload, out, indent=2, sort_keys=True)
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


# ---------------------------------------------------------------------------
# subcommands


def cmd_analytic(cfg: RunConfig) -> int:
    params = params_from_config(cfg)
    schemes = schemes_from_config(cfg)
    lams = parse_lambda_spec(cfg.lam)
    rows = [
        [lam, scheme.value, throughput_sum(lam, params, scheme)]
        for lam in lams
        for scheme in schemes
    ]
    _write_table(cfg, ["lambda", "scheme", "throughput"], rows)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    params = params_from_config(cfg)
    schemes = schemes_from_config(cfg)
    lams = parse_lambda_spec(cfg.lam)
    if cfg.slots < 1:
        raise ParameterError([f"slots: must be >= 1, got {cfg.slots}"])
    rows = []
    row_index = 0
    for lam in lams:
        for scheme in schemes:
            est = estimate_throughput(
                params, scheme, lam, cfg.slots, derive_seed(cfg.seed, row_index),
                threads=cfg.threads,
            )
            warning = "stderr-degenerate" if cfg.slots == 1 else ""
            rows.append([lam, scheme.value, est.mean, est.stderr, cfg.slots, cfg.seed, warning])
            row_index += 1
    _write_table(
        cfg, ["lambda", "scheme", "throughput", "stderr", "slots", "seed", "warning"], rows
    )
    return 0


# -- figures ----------------------------------------------------------------


def _lambda_grid() -> tuple[float, ...]:
    n = int(round(_LAMBDA_GRID_STOP / _LAMBDA_GRID_STEP))
    return tuple((i + 1) * _LAMBDA_GRID_STEP for i in range(n))


def _fig_csv(path: Path, cfg: RunConfig, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as out:
        out.write(f"# tool: cdmra {__version__}\n")
        out.write("# config: " + json.dumps(cfg.resolved(), sort_keys=True) + "\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _sweep_rows(result, extra=()):
    rows = []
    for r in result.rows:
        rows.append(list(extra) + [r.axis_value, r.scheme.value, r.lambda_star,
                                   r.s_analytic, r.s_sim, r.sim_stderr, r.z, r.error])
    return rows


def _collect_z(result, pool: list[float]) -> None:
    pool.extend(r.z for r in result.rows if r.z is not None)


def _peak_summary(params, schemes) -> dict:
    out = {}
    for scheme in schemes:
        lam_star, s_star = max_throughput(params, scheme)
        out[scheme.value] = {"lambda_star": lam_star, "value": s_star}
    return out


def _fig_lambda_sweep(cfg: RunConfig, params, seed: int):
    spec = SweepSpec(
        schemes=ALL_SCHEMES,
        axis="lambda",
        values=_lambda_grid(),
        params=params,
        mode="analytic" if cfg.analytic_only else "both",
        slots=cfg.slots,
        seed=seed,
        threads=cfg.threads,
    )
    return run_sweep(spec)


def cmd_figures(cfg: RunConfig) -> int:
    base = params_from_config(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = FIGURE_NAMES if not cfg.only else tuple(
        name.strip() for name in cfg.only.split(",") if name.strip()
    )
    unknown = [name for name in wanted if name not in FIGURE_NAMES]
    if unknown:
        raise ParameterError([f"only: unknown figure(s) {unknown}; expected subset of {FIGURE_NAMES}"])

    summary: dict = {"meta": cfg.resolved()}
    z_pool: list[float] = []
    failures: list[str] = []
    header = ["scheme", "lambda_star", "s_analytic", "s_sim", "stderr", "z", "error"]

    # fig3/fig4: throughput vs arrival rate at 5 dB, 128 sequences,
    # deferral probability 0.2 / 0.7
    for name, outage in (("fig3", 0.2), ("fig4", 0.7)):
        if name not in wanted:
            continue
        try:
            params = validate(base.replace(sinr_min=db_to_linear(5.0), n_seq=128, outage=outage))
            result = _fig_lambda_sweep(cfg, params, derive_seed(cfg.seed, FIGURE_NAMES.index(name)))
            _collect_z(result, z_pool)
            _fig_csv(out_dir / f"{name}.csv", cfg, ["lambda"] + header[:1] + header[2:],
                     [[r.axis_value, r.scheme.value, r.s_analytic, r.s_sim, r.sim_stderr,
                       r.z, r.error] for r in result.rows])
            summary[name] = {
                "outage": outage,
                "peaks": _peak_summary(params, ALL_SCHEMES),
            }
            if name == "fig3":
                summary[name]["crossover_lambda"] = crossover_lambda(params)
        except Exception as exc:  # noqa: BLE001 - leave completed files behind
            failures.append(f"{name}: {exc}")

    # fig5: lambda-maximized throughput vs deferral probability at 5 dB
    if "fig5" in wanted:
        try:
            params = validate(base.replace(sinr_min=db_to_linear(5.0), n_seq=128))
            values = tuple(round(i * 0.01, 2) for i in range(100))
            spec = SweepSpec(
                schemes=ALL_SCHEMES, axis="outage", values=values, params=params,
                mode="analytic" if cfg.analytic_only else "both",
                slots=cfg.slots, seed=derive_seed(cfg.seed, 4), threads=cfg.threads,
            )
            result = run_sweep(spec)
            _collect_z(result, z_pool)
            _fig_csv(out_dir / "fig5.csv", cfg, ["outage"] + header, _sweep_rows(result))
            by_scheme = {s: [r for r in result.rows if r.scheme is s and r.error is None]
                         for s in ALL_SCHEMES}
            inv_vals = [r.s_analytic for r in by_scheme[Scheme.ADAPTIVE_INV]]
            const_rows = by_scheme[Scheme.ADAPTIVE_CONST]
            min_row = min(const_rows, key=lambda r: r.s_analytic)
            conv_max = max(r.s_analytic for r in by_scheme[Scheme.CONVENTIONAL])
            summary["fig5"] = {
                "inv_spread": max(inv_vals) - min(inv_vals),
                "const_min": {"outage": min_row.axis_value, "value": min_row.s_analytic},
                "const_at_outage_0.99": const_rows[-1].s_analytic,
                "inv_over_conv_ratio": max(inv_vals) / conv_max,
            }
        except Exception as exc:  # noqa: BLE001
            failures.append(f"fig5: {exc}")

    # fig6: throughput vs arrival rate for 64/128/256 sequences at 0.7 deferral
    if "fig6" in wanted:
        try:
            rows = []
            maxima: dict = {}
            for j, n_seq in enumerate((64, 128, 256)):
                params = validate(base.replace(sinr_min=db_to_linear(5.0), outage=0.7, n_seq=n_seq))
                result = _fig_lambda_sweep(cfg, params, derive_seed(cfg.seed, 50 + j))
                _collect_z(result, z_pool)
                rows.extend([[n_seq, r.axis_value, r.scheme.value, r.s_analytic, r.s_sim,
                              r.sim_stderr, r.z, r.error] for r in result.rows])
                peaks = _peak_summary(params, ALL_SCHEMES)
                maxima[str(n_seq)] = {
                    "peaks": peaks,
                    "const_over_conv": peaks["const"]["value"] / peaks["conv"]["value"],
                    "inv_over_conv": peaks["inv"]["value"] / peaks["conv"]["value"],
                }
            _fig_csv(out_dir / "fig6.csv", cfg,
                     ["n_seq", "lambda", "scheme", "s_analytic", "s_sim", "stderr", "z", "error"],
                     rows)
            summary["fig6"] = maxima
        except Exception as exc:  # noqa: BLE001
            failures.append(f"fig6: {exc}")

    # fig7/8/9: lambda-maximized throughput vs sequence count at 1/5/10 dB
    for name, eta_db in (("fig7", 1.0), ("fig8", 5.0), ("fig9", 10.0)):
        if name not in wanted:
            continue
        try:
            params = validate(base.replace(sinr_min=db_to_linear(eta_db), outage=0.7))
            values = tuple(float(2**x) for x in range(1, 15))
            spec = SweepSpec(
                schemes=ALL_SCHEMES, axis="n_seq", values=values, params=params,
                mode="analytic" if cfg.analytic_only else "both",
                slots=cfg.slots, seed=derive_seed(cfg.seed, 100 + FIGURE_NAMES.index(name)),
                threads=cfg.threads,
            )
            result = run_sweep(spec)
            _collect_z(result, z_pool)
            _fig_csv(out_dir / f"{name}.csv", cfg, ["n_seq"] + header, _sweep_rows(result))
            limits = {s.value: limit_throughput(params, s) for s in ALL_SCHEMES}
            seq80 = {}
            for s in ALL_SCHEMES:
                found = sequences_for_fraction(params, s, 0.8)
                seq80[s.value] = {
                    "n_seq": found.n_seq,
                    "reached": found.reached,
                    "bracket": list(found.bracket),
                    "crossing": found.crossing,
                }
            summary[name] = {"eta_db": eta_db, "limits": limits, "seq_for_80pct": seq80}
        except Exception as exc:  # noqa: BLE001
            failures.append(f"{name}: {exc}")

    if z_pool:
        abs_z = [abs(z) for z in z_pool]
        summary["z_health"] = {
            "rows": len(abs_z),
            "max_abs_z": max(abs_z),
            "frac_abs_z_lt_4": sum(1 for z in abs_z if z < 4.0) / len(abs_z),
        }
    else:
        summary["z_health"] = None
    if failures:
        summary["failures"] = failures

    with open(out_dir / "summary.json", "w") as out:
        json.dump(summary, out, indent=2, sort_keys=True)
        out.write("\n")

    for line in failures:
        print(f"error: {line}", file=sys.stderr)
    return 1 if failures else 0


# -- validate ----------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    params = params_from_config(cfg)
    schemes = schemes_from_config(cfg)
    ks = [cfg.k] if cfg.k is not None else [1, 2, 5, 10, 20, 50]
    analytic_params = params if cfg.corrupt_noise == 1.0 else validate(
        params.replace(snr=params.snr / cfg.corrupt_noise)
    )

    print(f"cdmra {__version__} validation report")
    print(f"params: eta={linear_to_db(params.sinr_min):.3g} dB, snr={linear_to_db(params.snr):.3g} dB, "
          f"outage={params.outage}, n_seq={params.n_seq}, N={params.proc_gain}")
    if cfg.corrupt_noise != 1.0:
        print(f"note: analytic noise term corrupted by factor {cfg.corrupt_noise} (test hook)")

    max_abs_z = 0.0
    worst = ""
    print("\ncapture probability given k (analytic vs simulated):")
    print(f"{'scheme':>6} {'k':>4} {'analytic':>12} {'simulated':>12} {'stderr':>10} {'z':>8}")
    row_index = 0
    for scheme in schemes:
        for k in ks:
            est = estimate_ps_given_k(params, scheme, k, cfg.trials,
                                      derive_seed(cfg.seed, row_index), threads=cfg.threads)
            analytic = success_prob(k, analytic_params, scheme)
            z = z_score(analytic, est.mean, est.stderr)
            if abs(z) > max_abs_z:
                max_abs_z = abs(z)
                worst = f"ps[{scheme.value}, k={k}]"
            print(f"{scheme.value:>6} {k:>4} {analytic:>12.6f} {est.mean:>12.6f} "
                  f"{est.stderr:>10.2e} {z:>8.2f}")
            row_index += 1

    print("\nthroughput (analytic vs simulated):")
    print(f"{'scheme':>6} {'lambda':>8} {'analytic':>12} {'simulated':>12} {'stderr':>10} {'z':>8}")
    for scheme in schemes:
        for lam in (5.0, 15.0, 25.0):
            est = estimate_throughput(params, scheme, lam, cfg.slots,
                                      derive_seed(cfg.seed, 1000 + row_index),
                                      threads=cfg.threads)
            analytic = throughput_sum(lam, analytic_params, scheme)
            z = z_score(analytic, est.mean, est.stderr)
            if abs(z) > max_abs_z:
                max_abs_z = abs(z)
                worst = f"throughput[{scheme.value}, lambda={lam}]"
            print(f"{scheme.value:>6} {lam:>8.2f} {analytic:>12.4f} {est.mean:>12.4f} "
                  f"{est.stderr:>10.2e} {z:>8.2f}")
            row_index += 1

    if any(s is Scheme.ADAPTIVE_INV for s in schemes):
        lim = inv_success_limit(params)
        lim_strict = inv_success_limit(params, "floor-strict")
        print("\ngain-inversion boundary:")
        print(f"  deterministic SINR exceeds the threshold for k <= {lim} "
              f"(rule used here and by the simulator)")
        if lim_strict != lim:
            print(f"  the strict floor rule instead stops at k <= {lim_strict}: "
                  f"it drops k = {lim} although the SINR at k = {lim} is above threshold")
        if cfg.k is not None:
            both = {"sinr": 1.0 if cfg.k <= lim else 0.0,
                    "floor-strict": 1.0 if cfg.k <= lim_strict else 0.0}
            print(f"  probe k={cfg.k}: capture under sinr rule = {both['sinr']}, "
                  f"under floor-strict rule = {both['floor-strict']}")

    ok = max_abs_z < 4.0
    print(f"\nmax |z| = {max_abs_z:.3f}" + ("" if ok else f"  (worst cell: {worst})"))
    print("RESULT: OK" if ok else "RESULT: FAIL")
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = config_from_args(ns)
    handlers = {
        "analytic": cmd_analytic,
        "simulate": cmd_simulate,
        "figures": cmd_figures,
        "validate": cmd_validate,
    }
    try:
        return handlers[cfg.command](cfg)
    except ParameterError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
