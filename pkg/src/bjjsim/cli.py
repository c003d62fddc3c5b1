"""Command-line front end producing reproducible data files.

Commands
--------
visibility      Ramsey visibility curves: closed forms and the full matrix
                pipeline on a time grid, one block per interaction strength.
cat-relaxation  Fock-basis matrices, equatorial Husimi scans and relaxation
                summaries of the q=2 superposition under increasing noise,
                with the Markov-matched q=4 companion.
fisher-scan     Quantum Fisher information of the filtered two-component
                superposition versus noise spread, with the optimal axis and
                the sensitivity gain in dB.
mc-validate     Monte-Carlo trajectory average against the analytic kernel;
                nonzero exit status when the statistical bound is exceeded.

Conventions
-----------
Config files are UTF-8 JSON documents mirroring RunConfig field for field;
serialization round-trips losslessly.  All frequencies are the printed
caption numbers interpreted as rad/s (a value quoted as "pi*0.05 Hz" enters
as 0.15707963...; no extra 2*pi is applied).  Scan output is CSV with a fixed
column order and 17 significant digits, or JSON-lines with identical keys;
reports are JSON.  Files are written atomically (temp file + rename) and are
bit-identical across reruns of the same config and seed.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .dynamics import CatSpec, QuenchSpec, cat_state, decompose, evolve
from .hilbert import coherent_state
from .noise import NoiseModel, apply_dephasing, mc_density_matrix, sample_trajectories, spread_phase, steady_state
from .observables import (
    fisher_information,
    husimi_scan,
    offdiag_weight,
    trace_distance,
    visibility,
    visibility_noisy,
)

__all__ = ["RunConfig", "default_config", "load_config", "save_config", "main"]

GAIN_REFERENCE_DB = 10  # gain in dB is 10*log10 of the sensitivity ratio sqrt(N/F)


@dataclass
class RunConfig:
    """Flat parameter block shared by all commands; unused fields are ignored."""

    command: str
    n_atoms: int = 10
    chi_values: list = field(default_factory=lambda: [math.pi * 0.25])  # rad/s
    lambda_bar: float = 0.0  # rad/s, carried by the quench evolution
    noise_kind: str = "ou"  # "ou" | "white"
    noise_h0: float = 0.0  # rad^2/s^2
    noise_tau_c: float = 1.0  # s
    noise_diffusion: float = 0.0  # rad^2/s
    noise_lambda_bar: float = 0.0  # rad/s, carried by the noise process
    q: int = 2
    time_stop: float = 0.2  # s
    time_num: int = 81
    spread_values: list = field(default_factory=lambda: [0.0, 0.9, 2.9])  # rad, q=2 anchors
    phi_num: int = 256
    mc_samples: int = 20000
    mc_dt: float = 0.02  # s
    mc_times: list = field(default_factory=lambda: [1.0, 2.5, 5.0])  # s
    mc_bound_factor: float = 5.0  # statistical gate: factor / sqrt(samples)
    seed: int = 20260810
    threads: int = 1
    out: str = "out"
    format: str = "csv"  # "csv" | "json-lines"

    def noise_model(self) -> NoiseModel:
        if self.noise_kind == "ou":
            return NoiseModel.ornstein_uhlenbeck(self.noise_h0, self.noise_tau_c, self.noise_lambda_bar)
        if self.noise_kind == "white":
            return NoiseModel.white(self.noise_diffusion, self.noise_lambda_bar)
        raise ValueError(f"config noise kind must be 'ou' or 'white', got {self.noise_kind!r}")

    def validate(self) -> None:
        if self.format not in ("csv", "json-lines"):
            raise ValueError(f"format must be 'csv' or 'json-lines', got {self.format!r}")
        if self.n_atoms < 1 or self.time_num < 1 or self.mc_samples < 1 or self.threads < 1:
            raise ValueError("counts must be positive")
        for name in ("chi_values", "spread_values", "mc_times"):
            vals = getattr(self, name)
            if not vals or not all(math.isfinite(v) for v in vals):
                raise ValueError(f"{name} must be a nonempty list of finite numbers")
        if any(c <= 0 for c in self.chi_values):
            raise ValueError("interaction strengths must be positive")
        self.noise_model()  # validates the noise block


def default_config(command: str) -> RunConfig:
    """Built-in parameter sets; the visibility defaults reproduce the published curves."""
    if command == "visibility":
        return RunConfig(
            command=command,
            n_atoms=400,
            chi_values=[math.pi * 0.05, math.pi * 0.13, math.pi * 0.25],
            noise_kind="ou",
            noise_h0=64.0,  # (8 rad/s)^2
            noise_tau_c=1.0e7,  # quasi-static: a2(t) = h0 t^2 on the plotted window
            time_stop=0.2,
            time_num=81,
        )
    if command == "cat-relaxation":
        return RunConfig(command=command, n_atoms=10, chi_values=[math.pi * 0.25], q=2)
    if command == "fisher-scan":
        return RunConfig(
            command=command,
            n_atoms=10,
            chi_values=[math.pi * 0.25],
            spread_values=[round(0.1 * i, 10) for i in range(31)],
        )
    if command == "mc-validate":
        return RunConfig(
            command=command,
            n_atoms=10,
            chi_values=[1.0],
            noise_kind="ou",
            noise_h0=0.1,
            noise_tau_c=1.0,
            mc_dt=0.02,
            mc_times=[1.0, 2.5, 5.0],
            mc_samples=20000,
        )
    raise ValueError(f"unknown command {command!r}")


def save_config(config: RunConfig, path: str) -> None:
    _atomic_write(path, json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True) + "\n")


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(**raw)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_rows(path: str, columns: list, rows: list, fmt: str) -> None:
    """Emit rows either as CSV (fixed column order, 17 significant digits) or JSON lines."""
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_format_cell(row[c]) for c in columns) for row in rows]
        _atomic_write(path, "\n".join(lines) + "\n")
    else:
        lines = [json.dumps({c: row[c] for c in columns}) for row in rows]
        _atomic_write(path, "\n".join(lines) + "\n")


def _data_path(config: RunConfig, name: str) -> str:
    ext = "csv" if config.format == "csv" else "jsonl"
    return os.path.join(config.out, f"{name}.{ext}")


def cmd_visibility(config: RunConfig) -> int:
    """Time scans of nu_noiseless, nu_noisy (closed form) and nu_matrix (full pipeline)."""
    model = config.noise_model()
    times = np.linspace(0.0, config.time_stop, config.time_num)
    rows = []
    worst = 0.0
    for chi in config.chi_values:
        spec = QuenchSpec(config.n_atoms, chi, config.lambda_bar)
        initial = coherent_state(config.n_atoms, math.pi / 2, 0.0)
        for t in times:
            rho = evolve(initial, spec, float(t)).density_matrix()
            rho = apply_dephasing(rho, model, float(t))
            nu_matrix = visibility(rho)
            nu_noisy = visibility_noisy(spec, model, float(t))
            rows.append(
                {
                    "chi": chi,
                    "t": float(t),
                    "nu_noiseless": math.cos(chi * t) ** (config.n_atoms - 1),
                    "nu_noisy": nu_noisy,
                    "nu_matrix": nu_matrix,
                }
            )
            worst = max(worst, abs(nu_matrix - nu_noisy))
    write_rows(_data_path(config, "visibility"), ["chi", "t", "nu_noiseless", "nu_noisy", "nu_matrix"], rows, config.format)
    if worst > 1e-9:
        print(f"visibility: matrix pipeline deviates from closed form by {worst:.3e}", file=sys.stderr)
        return 1
    return 0


def _matrix_rows(q: int, anchor: float, a_q: float, rho_d: np.ndarray, rho_od: np.ndarray) -> list:
    dim = rho_d.shape[0]
    half = (dim - 1) / 2
    rows = []
    for i in range(dim):
        for j in range(dim):
            rows.append(
                {
                    "q": q,
                    "a2_anchor": anchor,
                    "a_q": a_q,
                    "n": i - half,
                    "n_prime": j - half,
                    "d_real": rho_d[i, j].real,
                    "d_imag": rho_d[i, j].imag,
                    "d_abs": abs(rho_d[i, j]),
                    "od_real": rho_od[i, j].real,
                    "od_imag": rho_od[i, j].imag,
                    "od_abs": abs(rho_od[i, j]),
                }
            )
    return rows


def cmd_cat_relaxation(config: RunConfig) -> int:
    """Relaxation and decoherence of the q=2 superposition, plus the Markov-matched q=4 run.

    The anchors in spread_values are the q=2 accumulated spreads a_2; matching
    the q=4 run at the same white-noise intensity gives a_4 = a_2/sqrt(2)
    exactly (a_q^2 = 2 D t_q and t_q is proportional to 1/q).
    """
    chi = config.chi_values[0]
    rho_inf = steady_state(config.n_atoms)
    matrix_rows, husimi_rows, summary_rows = [], [], []
    phis = np.linspace(0.0, 2 * math.pi, config.phi_num, endpoint=False)
    for q in (2, 4):
        spec = QuenchSpec(config.n_atoms, chi, config.lambda_bar)
        cat = CatSpec(spec, q)
        rho0 = cat_state(cat).density_matrix()
        for anchor in config.spread_values:
            a_q = anchor / math.sqrt(q / 2.0)
            filtered = spread_phase(rho0, a_q * a_q)
            rho_d, rho_od = decompose(filtered, q)
            matrix_rows += _matrix_rows(q, anchor, a_q, rho_d, rho_od)
            scan = husimi_scan(filtered, [math.pi / 2], phis)
            husimi_rows += [
                {"q": q, "a2_anchor": anchor, "a_q": a_q, "phi": float(p), "husimi": float(v)}
                for p, v in zip(phis, scan.values[0])
            ]
            summary_rows.append(
                {
                    "q": q,
                    "a2_anchor": anchor,
                    "a_q": a_q,
                    "trace_distance_to_steady": trace_distance(rho_d, rho_inf),
                    "offdiag_weight": offdiag_weight(rho_od),
                }
            )
    write_rows(
        _data_path(config, "cat_matrices"),
        ["q", "a2_anchor", "a_q", "n", "n_prime", "d_real", "d_imag", "d_abs", "od_real", "od_imag", "od_abs"],
        matrix_rows,
        config.format,
    )
    write_rows(_data_path(config, "cat_husimi"), ["q", "a2_anchor", "a_q", "phi", "husimi"], husimi_rows, config.format)
    write_rows(
        _data_path(config, "cat_summary"),
        ["q", "a2_anchor", "a_q", "trace_distance_to_steady", "offdiag_weight"],
        summary_rows,
        config.format,
    )
    return 0


def cmd_fisher_scan(config: RunConfig) -> int:
    """Fisher information of the filtered q-component superposition versus spread."""
    chi = config.chi_values[0]
    spec = QuenchSpec(config.n_atoms, chi, config.lambda_bar)
    rho0 = cat_state(CatSpec(spec, config.q)).density_matrix()
    n_atoms = config.n_atoms
    rows = []
    for a in config.spread_values:
        result = fisher_information(spread_phase(rho0, a * a))
        if not 0.0 <= result.value <= n_atoms ** 2 * (1 + 1e-9):
            print(f"fisher-scan: value {result.value} outside [0, N^2]", file=sys.stderr)
            return 1
        gain_db = GAIN_REFERENCE_DB * math.log10(math.sqrt(n_atoms / result.value))
        rows.append(
            {
                "a2": a,
                "f_q": result.value,
                "dir_x": float(result.direction[0]),
                "dir_y": float(result.direction[1]),
                "dir_z": float(result.direction[2]),
                "gain_db": gain_db,
            }
        )
    write_rows(_data_path(config, "fisher_scan"), ["a2", "f_q", "dir_x", "dir_y", "dir_z", "gain_db"], rows, config.format)
    return 0


def cmd_mc_validate(config: RunConfig) -> int:
    """Trajectory-sampled noise average against the analytic kernel, with pass/fail gate."""
    chi = config.chi_values[0]
    spec = QuenchSpec(config.n_atoms, chi, config.lambda_bar)
    model = config.noise_model()
    initial = coherent_state(config.n_atoms, math.pi / 2, 0.0)
    t_max = max(config.mc_times)
    ensemble = sample_trajectories(model, t_max, config.mc_dt, config.mc_samples, config.seed, config.threads)
    bound = config.mc_bound_factor / math.sqrt(config.mc_samples)
    entries = []
    all_pass = True
    for t in config.mc_times:
        t_grid = ensemble.times[ensemble.index_of(t)]
        rho_mc = mc_density_matrix(initial, spec, ensemble, t_grid)
        rho_exact = apply_dephasing(evolve(initial, spec, t_grid).density_matrix(), model, t_grid)
        dev = float(np.abs(rho_mc.elements - rho_exact.elements).max())
        ok = dev < bound
        all_pass &= ok
        entries.append({"t": float(t_grid), "max_abs_deviation": dev, "bound": bound, "pass": ok})
    report = {
        "samples": config.mc_samples,
        "dt": config.mc_dt,
        "seed": config.seed,
        "bound": bound,
        "times": entries,
        "pass": all_pass,
    }
    _atomic_write(os.path.join(config.out, "mc_report.json"), json.dumps(report, indent=2) + "\n")
    if not all_pass:
        print(f"mc-validate: deviation exceeded the {bound:.4f} bound", file=sys.stderr)
    return 0 if all_pass else 1


_COMMANDS = {
    "visibility": cmd_visibility,
    "cat-relaxation": cmd_cat_relaxation,
    "fisher-scan": cmd_fisher_scan,
    "mc-validate": cmd_mc_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bjjsim", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; defaults are built in")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=["csv", "json-lines"], help="data file format")
        p.add_argument("--seed", type=int, help="RNG seed override")
        p.add_argument("--threads", type=int, help="worker threads for trajectory sampling")
        p.add_argument("--dump-config", help="write the effective config to this path and continue")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else default_config(args.command)
        if config.command != args.command:
            raise ValueError(f"config is for {config.command!r}, invoked as {args.command!r}")
        for attr in ("out", "format", "seed", "threads"):
            value = getattr(args, attr)
            if value is not None:
                setattr(config, attr, value)
        config.validate()
        if args.dump_config:
            save_config(config, args.dump_config)
        return _COMMANDS[args.command](config)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
