"""Command-line front end: simulation, trajectories, distances, generator report.

Exit codes: 0 success, 2 argument/validation errors, 3 numerical contract
violations (singular generator time without --segment, non-unitary V or
non-density state inside an otherwise well-formed file). All numbers are
serialized with 17 significant digits so identical argv + seed reproduce
byte-identical files; CSV uses comma separators, Unix newlines and a
mandatory header row.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .channels import (
    PauliWeights,
    affine_of,
    bloch_vector,
    density_from_bloch,
    is_indivisible_family,
)
from .collision import (
    RandomUnitarySpec,
    RandomUnitaryTerm,
    ghz_env,
    ru_collision,
    simulate_closed,
    simulate_dense,
    target_eta,
)
from .dynamics import (
    FamilyParams,
    SingularAt,
    coeff_extract,
    coeff_printed,
    family_det3,
    family_map,
    generator_numeric,
    singular_times,
    step_bound,
    step_delta_estimate,
)
from .linalg import check_density

STATE_ALIASES = {
    "z+": (0.0, 0.0, 1.0),
    "z-": (0.0, 0.0, -1.0),
    "x+": (1.0, 0.0, 0.0),
    "x-": (-1.0, 0.0, 0.0),
    "y+": (0.0, 1.0, 0.0),
    "y-": (0.0, -1.0, 0.0),
}

TRAJECTORY_HEADER = ["t", "state", "rx", "ry", "rz"]
DISTANCE_HEADER = ["j", "delta_lower", "c_coef", "d_coef", "bound"]
GENERATOR_HEADER = [
    "t",
    "b_num",
    "c_num",
    "d_num",
    "residual",
    "b_printed",
    "c_printed",
    "d_printed",
    "det3",
]


class CliError(Exception):
    """Carries the intended process exit code alongside the message."""

    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _json_fragment(value) -> str:
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt17(value)
    if isinstance(value, dict):
        inner = ",".join(
            f"{json.dumps(str(k))}:{_json_fragment(value[k])}" for k in sorted(value)
        )
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_json_fragment(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dump_json(payload: dict) -> str:
    return _json_fragment(payload) + "\n"


def complex_matrix_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def real_matrix_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=float)
    return [[float(v) for v in row] for row in m]


def parse_complex_matrix(obj, what: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise CliError(2, f"{what} must be a non-empty nested list")
    rows = []
    width = None
    for row in obj:
        if not isinstance(row, list) or (width is not None and len(row) != width):
            raise CliError(2, f"{what} must be rectangular")
        width = len(row)
        entries = []
        for cell in row:
            if (
                not isinstance(cell, list)
                or len(cell) != 2
                or not all(isinstance(v, (int, float)) for v in cell)
            ):
                raise CliError(2, f"{what} entries must be [re, im] pairs")
            entries.append(complex(cell[0], cell[1]))
        rows.append(entries)
    return np.array(rows, dtype=complex)


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, str):
                if "," in cell or "\n" in cell:
                    raise ValueError(f"CSV cell {cell!r} contains a separator")
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)) and not isinstance(cell, bool):
                cells.append(str(int(cell)))
            else:
                cells.append(fmt17(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(2, f"cannot write {path}: {exc}") from exc


def load_affine(path: str) -> np.ndarray:
    """Read back the affine map from a JSON channel output file."""
    with open(path) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or "affine" not in obj:
        raise CliError(2, f"{path} does not contain an affine map")
    mat = np.array(obj["affine"], dtype=float)
    if mat.shape != (4, 4):
        raise CliError(2, f"affine map in {path} has shape {mat.shape}, expected (4, 4)")
    return mat


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_weights(text: str) -> PauliWeights:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError(2, f"--q expects three comma-separated weights, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise CliError(2, f"--q weights must be numbers, got {text!r}") from exc
    try:
        return PauliWeights(*vals)
    except ValueError as exc:
        raise CliError(2, str(exc)) from exc


def parse_state(token: str, ordinal: int) -> tuple[str, np.ndarray]:
    token = token.strip()
    if token in STATE_ALIASES:
        return token, np.array(STATE_ALIASES[token])
    parts = token.split(",")
    if len(parts) != 3:
        raise CliError(
            2, f"state {token!r} is neither an alias ({'/'.join(STATE_ALIASES)}) nor a triple"
        )
    try:
        vec = np.array([float(p) for p in parts])
    except ValueError as exc:
        raise CliError(2, f"state {token!r} has non-numeric components") from exc
    if np.linalg.norm(vec) > 1.0 + 1e-12:
        raise CliError(2, f"state {token!r} lies outside the Bloch ball")
    return f"s{ordinal}", vec


def parse_states(text: str) -> list[tuple[str, np.ndarray]]:
    tokens = [tok for tok in text.split(";") if tok.strip()]
    if not tokens:
        raise CliError(2, "--states must list at least one state (';'-separated)")
    out = []
    labels = set()
    for i, tok in enumerate(tokens):
        label, vec = parse_state(tok, i + 1)
        if label in labels:
            raise CliError(2, f"duplicate state label {label!r}")
        labels.add(label)
        out.append((label, vec))
    return out


def _require_positive(name: str, value: int) -> int:
    if value < 1:
        raise CliError(2, f"{name} must be >= 1, got {value}")
    return value


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    q = parse_weights(args.q)
    n = _require_positive("--n", args.n)
    j = args.j if args.j is not None else n
    if not 0 <= j <= n:
        raise CliError(2, f"--j must satisfy 0 <= j <= n, got {j}")
    eta = args.eta_override if args.eta_override is not None else target_eta(n)
    label, r_in = parse_state(args.state, 1)
    rho_in = density_from_bloch(r_in)

    if args.backend == "fast":
        def apply(rho):
            return simulate_closed(rho, q, j * eta)
    else:
        try:
            env = ghz_env(q, n)
        except ValueError as exc:
            raise CliError(2, str(exc)) from exc

        def apply(rho):
            return simulate_dense(rho, env, eta, j)

    rho_out = apply(rho_in)
    affine = affine_of(apply)
    r_out = bloch_vector(rho_out)

    if args.format == "json":
        payload = {
            "schema": "channel.v1",
            "backend": args.backend,
            "q": [q.qx, q.qy, q.qz],
            "n": n,
            "j": j,
            "eta": eta,
            "state": label,
            "bloch_in": [float(v) for v in r_in],
            "bloch_out": [float(v) for v in r_out],
            "rho_out": complex_matrix_json(rho_out),
            "affine": real_matrix_json(affine),
        }
        write_text(args.out, dump_json(payload))
    else:
        rows = [
            ("backend", args.backend),
            ("state", label),
            ("eta", eta),
            ("j", j),
            ("n", n),
            ("qx", q.qx),
            ("qy", q.qy),
            ("qz", q.qz),
        ]
        for axis, v in zip("xyz", r_in):
            rows.append((f"bloch_in_{axis}", v))
        for axis, v in zip("xyz", r_out):
            rows.append((f"bloch_out_{axis}", v))
        for a in range(2):
            for b in range(2):
                rows.append((f"rho_out_{a}{b}_re", rho_out[a, b].real))
                rows.append((f"rho_out_{a}{b}_im", rho_out[a, b].imag))
        for a in range(4):
            for b in range(4):
                rows.append((f"affine_{a}{b}", affine[a, b]))
        write_text(args.out, csv_text(["key", "value"], rows))
    print(
        f"simulate: wrote {args.out} "
        f"(bloch_out = {fmt17(r_out[0])},{fmt17(r_out[1])},{fmt17(r_out[2])})"
    )
    return 0


def _cmd_trajectory(args) -> int:
    q = parse_weights(args.q)
    n = _require_positive("--n", args.n)
    if args.samples < 2:
        raise CliError(2, f"--samples must be >= 2, got {args.samples}")
    states = parse_states(args.states)
    p = FamilyParams(q=q, n=n)
    ts = np.linspace(0.0, float(n), args.samples)
    rows = []
    for label, r0 in states:
        v0 = np.concatenate(([1.0], r0))
        for t in ts:
            v = family_map(float(t), p) @ v0
            rows.append((float(t), label, v[1], v[2], v[3]))
    write_text(args.out, csv_text(TRAJECTORY_HEADER, rows))
    print(f"trajectory: wrote {args.out} ({len(rows)} rows, {len(states)} states)")
    return 0


def _cmd_distance(args) -> int:
    q = parse_weights(args.q)
    n = _require_positive("--n", args.n)
    trials = _require_positive("--trials", args.trials)
    rows = []
    for j in range(n):
        est = step_delta_estimate(j, n, q, trials=trials, seed=args.seed)
        sb = step_bound(j, n)
        rows.append((j, est, sb.c_next, sb.d_next, sb.bound))
    write_text(args.out, csv_text(DISTANCE_HEADER, rows))
    print(f"distance: wrote {args.out} ({n} rows, trials = {trials}, seed = {args.seed})")
    return 0


def _cmd_generator(args) -> int:
    q = parse_weights(args.q)
    n = _require_positive("--n", args.n)
    p = FamilyParams(q=q, n=n)
    if args.t is not None:
        ts = [float(args.t)]
    else:
        if args.samples < 2:
            raise CliError(2, f"--samples must be >= 2, got {args.samples}")
        ts = [float(t) for t in np.linspace(0.0, float(n), args.samples)]
    margin = 1e-3 * n
    stars = singular_times(p, min(ts) - margin, max(ts) + margin)

    rows = []
    skipped = 0
    for t in ts:
        near = min((abs(t - s) for s in stars), default=np.inf) < margin
        if near:
            if args.segment:
                skipped += 1
                continue
            raise CliError(
                3,
                f"family map is singular near t = {t!r} "
                f"(det3 = {family_det3(t, p):.3e}); use --segment to skip the window",
            )
        try:
            l_mat = generator_numeric(t, p)
        except SingularAt as exc:
            if args.segment:
                skipped += 1
                continue
            raise CliError(3, str(exc)) from exc
        coeffs, residual = coeff_extract(l_mat)
        try:
            printed = coeff_printed(t, p.alpha).as_tuple()
        except ZeroDivisionError:
            printed = (float("nan"),) * 3
        rows.append(
            (t, coeffs.b, coeffs.c, coeffs.d, residual, *printed, family_det3(t, p))
        )
    write_text(args.out, csv_text(GENERATOR_HEADER, rows))
    print(f"generator: wrote {args.out} ({len(rows)} rows, {skipped} skipped)")
    return 0


def _cmd_divisible(args) -> int:
    q = parse_weights(args.q)
    print("true" if is_indivisible_family(q) else "false")
    return 0


def _load_ru_spec(path: str) -> RandomUnitarySpec:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise CliError(2, f"cannot read spec file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(2, f"spec file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CliError(2, "spec file must hold a JSON object")
    for key in ("d", "n", "terms"):
        if key not in obj:
            raise CliError(2, f"spec file is missing {key!r}")
    d, n, terms_obj = obj["d"], obj["n"], obj["terms"]
    if not isinstance(d, int) or not isinstance(n, int):
        raise CliError(2, "spec fields 'd' and 'n' must be integers")
    if not isinstance(terms_obj, list) or not terms_obj:
        raise CliError(2, "spec field 'terms' must be a non-empty list")
    weights = []
    for i, term in enumerate(terms_obj):
        if not isinstance(term, dict) or "q" not in term or "V" not in term:
            raise CliError(2, f"terms[{i}] must contain 'q' and 'V'")
        if not isinstance(term["q"], (int, float)):
            raise CliError(2, f"terms[{i}].q must be a number")
        weights.append(float(term["q"]))
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
        raise CliError(2, f"term weights must be >= 0 and sum to 1, got {weights}")
    terms = []
    for i, term in enumerate(terms_obj):
        v = parse_complex_matrix(term["V"], f"terms[{i}].V")
        if v.shape != (d, d):
            raise CliError(2, f"terms[{i}].V has shape {v.shape}, expected ({d}, {d})")
        try:
            terms.append(RandomUnitaryTerm(weight=weights[i], unitary=v))
        except ValueError as exc:
            raise CliError(3, f"terms[{i}]: {exc}") from exc
    try:
        return RandomUnitarySpec(d=d, n=n, terms=tuple(terms))
    except ValueError as exc:
        raise CliError(2, str(exc)) from exc


def _load_state_file(path: str, d: int) -> np.ndarray:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise CliError(2, f"cannot read state file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(2, f"state file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "rho" not in obj:
        raise CliError(2, "state file must hold a JSON object with 'rho'")
    rho = parse_complex_matrix(obj["rho"], "rho")
    if rho.shape != (d, d):
        raise CliError(2, f"rho has shape {rho.shape}, expected ({d}, {d})")
    try:
        return check_density(rho)
    except ValueError as exc:
        raise CliError(3, str(exc)) from exc


def _cmd_randomunitary(args) -> int:
    spec = _load_ru_spec(args.spec)
    rho0 = _load_state_file(args.state_file, spec.d)
    if not 0 <= args.k <= spec.n:
        raise CliError(2, f"--k must satisfy 0 <= k <= n = {spec.n}, got {args.k}")
    rho_out = ru_collision(rho0, spec, args.k)
    payload = {
        "schema": "randomunitary-state.v1",
        "d": spec.d,
        "n": spec.n,
        "k": args.k,
        "rho": complex_matrix_json(rho_out),
    }
    write_text(args.out, dump_json(payload))
    print(f"randomunitary: wrote {args.out} (k = {args.k} of n = {spec.n})")
    return 0


# ---------------------------------------------------------------------------
# Parser plumbing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcollide",
        description="Collision-model channel simulation and family diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="final state and affine map after j collisions")
    sim.add_argument("--q", required=True, help="weights qx,qy,qz")
    sim.add_argument("--n", type=int, required=True, help="environment size")
    sim.add_argument("--j", type=int, default=None, help="collision count (default n)")
    sim.add_argument("--backend", choices=("fast", "dense"), default="fast")
    sim.add_argument("--state", required=True, help="alias (z+/z-/x+/x-/y+/y-) or rx,ry,rz")
    sim.add_argument("--eta-override", type=float, default=None, dest="eta_override",
                     help="interaction angle (default pi/(2n))")
    sim.add_argument("--format", choices=("json", "csv"), default="json")
    sim.add_argument("--out", required=True)
    sim.set_defaults(handler=_cmd_simulate)

    traj = sub.add_parser("trajectory", help="family-map path of chosen states over [0, n]")
    traj.add_argument("--q", required=True)
    traj.add_argument("--n", type=int, required=True)
    traj.add_argument("--samples", type=int, required=True)
    traj.add_argument("--states", required=True, help="';'-separated aliases or triples")
    traj.add_argument("--out", required=True)
    traj.set_defaults(handler=_cmd_trajectory)

    dist = sub.add_parser("distance", help="per-step disturbance estimates and bound")
    dist.add_argument("--q", required=True)
    dist.add_argument("--n", type=int, required=True)
    dist.add_argument("--trials", type=int, required=True)
    dist.add_argument("--seed", type=int, default=0)
    dist.add_argument("--out", required=True)
    dist.set_defaults(handler=_cmd_distance)

    gen = sub.add_parser("generator", help="numeric vs printed generator coefficients")
    gen.add_argument("--q", required=True)
    gen.add_argument("--n", type=int, required=True)
    grid = gen.add_mutually_exclusive_group(required=True)
    grid.add_argument("--samples", type=int, default=None, help="t-grid size over [0, n]")
    grid.add_argument("--t", type=float, default=None, help="single evaluation time")
    gen.add_argument("--segment", action="store_true",
                     help="skip rows inside singular windows instead of failing")
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=_cmd_generator)

    div = sub.add_parser("divisible", help="indivisible-family membership of the weights")
    div.add_argument("--q", required=True)
    div.set_defaults(handler=_cmd_divisible)

    ru = sub.add_parser("randomunitary", help="random-unitary collision endpoint")
    ru.add_argument("--spec", required=True, help="JSON spec file")
    ru.add_argument("--k", type=int, required=True, help="collision count")
    ru.add_argument("--state-file", required=True, dest="state_file")
    ru.add_argument("--out", required=True)
    ru.set_defaults(handler=_cmd_randomunitary)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, dispatch, and map failures onto the documented exit codes."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SingularAt as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
