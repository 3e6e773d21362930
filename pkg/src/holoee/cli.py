"""``holo-ee`` command-line front end.

Exit codes: 0 success, 2 a scientific check failed, 3 input or config error.
JSON reports have the shape ``{command, config_hash, seed, timestamp, payload}``;
``payload`` depends only on the flags, config and seed. The timestamp honours
``SOURCE_DATE_EPOCH`` when set.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import circuits, mincut, nmr, qmath, tensornet
from .errors import ConfigError, ContractionError, HoloError, UnsupportedScaleError, ValidationError
from .plots import entropy_curve_svg

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 2, 3
CSV_COLUMNS = ("k", "mean_bits", "spread_bits", "ideal_bits", "maxent_bits")
CONFIG_ENV = "HOLOEE_CONFIG"


class InputError(HoloError):
    """Bad command-line input; maps to exit code 3."""


def density_to_dict(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"n_qubits": qmath.num_qubits(rho.shape[0]), "real": rho.real.tolist(), "imag": rho.imag.tolist()}


def density_from_dict(d: dict) -> np.ndarray:
    rho = np.asarray(d["real"], dtype=float) + 1j * np.asarray(d["imag"], dtype=float)
    if rho.shape != (1 << d["n_qubits"],) * 2:
        raise ValidationError("density-matrix JSON has inconsistent size")
    return qmath.as_density_matrix(rho)


def _load_config(args) -> tuple[nmr.NmrSystemConfig, str]:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = nmr.load_config(path) if path else nmr.default_config()
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return cfg, hashlib.sha256(canonical.encode()).hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.isoformat(timespec="seconds")


def _report(command: str, args, config_hash, payload: dict) -> dict:
    return {
        "command": command,
        "config_hash": config_hash,
        "seed": args.seed,
        "timestamp": _timestamp(),
        "payload": payload,
    }


def _write_json(path, obj) -> None:
    if path:
        Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows) -> None:
    if not path:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _parse_region(text: str) -> list[int]:
    """``"0,1,2"`` or ``"3-7"`` or a mix; empty string is the empty region."""
    out: list[int] = []
    for part in filter(None, (p.strip() for p in (text or "").split(","))):
        try:
            if "-" in part:
                lo, hi = part.split("-", 1)
                out += list(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise InputError(f"cannot parse region component {part!r}") from None
    return out


# --- commands ---------------------------------------------------------------

def cmd_verify_pt(args) -> int:
    try:
        graph = circuits.resolve_graph(args.graph)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    state = circuits.run(circuits.graph_state_circuit(graph))
    rep = circuits.is_perfect_tensor(state)
    payload = {"graph": [list(e) for e in graph.edges], "graph_name": args.graph or "searched", **rep.to_dict()}
    print(f"graph edges: {list(graph.edges)}")
    print(f"worst deviation from I/8: {rep.worst_deviation:.3e}")
    if rep.is_perfect:
        print("perfect tensor: yes")
    else:
        print(f"perfect tensor: NO (failing subset {list(rep.failing_subset)})")
    _write_json(args.json, _report("verify-pt", args, None, payload))
    return EXIT_OK if rep.is_perfect else EXIT_CHECK_FAILED


def _simulate(cfg: nmr.NmrSystemConfig, noise_on: bool):
    circ = circuits.graph_state_circuit(circuits.search_perfect_graph())
    if cfg.n_spins != circ.n_qubits:
        raise ConfigError(f"config has {cfg.n_spins} spins; the perfect-tensor circuit needs {circ.n_qubits}")
    seq = nmr.compile_circuit_to_sequence(circ, cfg)
    rho = nmr.run_sequence(seq, cfg, noise_on)
    return rho, seq


def _compensate(rho, cfg, seq, how: str, factor: float):
    if how == "exact-inverse":
        return nmr.compensate_dephasing(rho, cfg.t2star, nmr.coherence_times(seq, cfg.n_spins))
    if how == "rescale":
        return nmr.rescale_compensation(rho, factor)
    raise InputError(f"unknown compensation {how!r}")


def _curve_rows(curve):
    return [(p.k, p.mean, p.spread, float(min(p.k, 6 - p.k)), float(p.k)) for p in curve]


def cmd_entropy_curve(args) -> int:
    cfg, chash = _load_config(args)
    ideal = qmath.projector(circuits.perfect_tensor_state())
    if args.mode == "ideal":
        rho = ideal
    else:
        rho, seq = _simulate(cfg, noise_on=True)
        rho = nmr.tomography_emulate(rho, range(6), args.shot_sigma, args.seed)
        if args.mode == "compensated":
            rho = _compensate(rho, cfg, seq, args.compensate, args.factor)
    curve = nmr.entropy_curve(rho)
    rows = _curve_rows(curve)
    print(",".join(CSV_COLUMNS))
    for r in rows:
        print(f"{r[0]},{r[1]:.6f},{r[2]:.6f},{r[3]:.1f},{r[4]:.1f}")
    _write_csv(args.csv, CSV_COLUMNS, [(k, repr(m), repr(s), repr(i), repr(x)) for k, m, s, i, x in rows])
    if args.svg:
        series = {
            "ideal": [(k, i, 0.0) for k, _, _, i, _ in rows],
            "maxent": [(k, x, 0.0) for k, _, _, _, x in rows],
            args.mode if args.mode != "ideal" else "measured": [(k, m, s) for k, m, s, _, _ in rows],
        }
        Path(args.svg).write_text(entropy_curve_svg(series, f"S(k), {args.mode}"))
    payload = {
        "mode": args.mode,
        "shot_sigma": args.shot_sigma,
        "fidelity": qmath.fidelity(ideal, rho),
        "curve": [{"k": p.k, "mean_bits": p.mean, "spread_bits": p.spread, "windows": list(p.windows)} for p in curve],
    }
    _write_json(args.json, _report("entropy-curve", args, chash, payload))
    return EXIT_OK


def _region_label(region) -> str:
    return ",".join(map(str, region))


def cmd_rt_check(args) -> int:
    try:
        tn = tensornet.build_hexagonal_tn(args.layers)
    except (UnsupportedScaleError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    b = tn.n_boundary
    if args.regions == "all-contiguous":
        regions = tensornet.contiguous_regions(b)
    else:
        rng = random.Random(args.seed)
        regions = [sorted(rng.sample(range(b), rng.randint(1, b - 1))) for _ in range(args.n_random)]
    try:
        entropies = tensornet.boundary_entropies(tn, regions, args.backend)
    except UnsupportedScaleError as exc:
        raise InputError(str(exc)) from exc
    rows, mismatches = [], 0
    for region, s in zip(regions, entropies):
        cut = mincut.min_cut(tn, region).value
        match = abs(s - cut) < 1e-9
        mismatches += not match
        rows.append((_region_label(region), s, cut, match))
        print(f"[{_region_label(region)}] entropy={s:.6f} min_cut={cut} match={'yes' if match else 'NO'}")
    print(f"{len(rows) - mismatches}/{len(rows)} regions match")
    _write_csv(args.csv, ("region", "entropy_bits", "min_cut", "match"),
               [(r, repr(s), c, int(m)) for r, s, c, m in rows])
    payload = {
        "layers": args.layers,
        "backend": args.backend,
        "regions": args.regions,
        "n_regions": len(rows),
        "mismatches": mismatches,
        "rows": [{"region": r, "entropy_bits": s, "min_cut": c, "match": m} for r, s, c, m in rows],
    }
    _write_json(args.json, _report("rt-check", args, None, payload))
    return EXIT_OK if mismatches == 0 else EXIT_CHECK_FAILED


def cmd_nmr_run(args) -> int:
    cfg, chash = _load_config(args)
    rho_sim, seq = _simulate(cfg, noise_on=not args.noiseless)
    rho = nmr.tomography_emulate(rho_sim, range(6), args.shot_sigma, args.seed)
    ideal = qmath.projector(circuits.perfect_tensor_state())
    fid = qmath.fidelity(ideal, rho)
    curve = nmr.entropy_curve(rho)
    payload = {
        "noise_on": not args.noiseless,
        "sequence_duration_s": seq.total_duration,
        "shot_sigma": args.shot_sigma,
        "fidelity": fid,
        "purity": qmath.purity(rho),
        "curve": [{"k": p.k, "mean_bits": p.mean, "spread_bits": p.spread} for p in curve],
    }
    print(f"sequence duration: {seq.total_duration * 1e3:.3f} ms")
    print(f"fidelity to ideal perfect tensor: {fid:.6f}")
    for p in curve:
        print(f"S({p.k}) = {p.mean:.4f} +/- {p.spread:.4f}")
    if args.compensate != "none":
        comp = _compensate(rho, cfg, seq, args.compensate, args.factor)
        cfid = qmath.fidelity(ideal, comp)
        ccurve = nmr.entropy_curve(comp)
        payload["compensation"] = {
            "method": args.compensate,
            "factor": args.factor if args.compensate == "rescale" else None,
            "fidelity": cfid,
            "curve": [{"k": p.k, "mean_bits": p.mean, "spread_bits": p.spread} for p in ccurve],
        }
        print(f"compensated ({args.compensate}) fidelity: {cfid:.6f}")
    payload["rho"] = density_to_dict(rho)
    _write_json(args.json, _report("nmr-run", args, chash, payload))
    if args.rho_json:
        Path(args.rho_json).write_text(json.dumps(density_to_dict(rho), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_mincut(args) -> int:
    if args.network:
        try:
            tn = tensornet.load_network(args.network)
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"cannot load network {args.network}: {exc}") from exc
    else:
        tn = tensornet.build_hexagonal_tn(args.layers)
    problems = tensornet.validate(tn)
    if problems:
        raise InputError("invalid network: " + "; ".join(problems))
    region = _parse_region(args.region)
    try:
        res = mincut.min_cut(tn, region)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    print(f"min cut: {res.value}")
    for e in res.cut_edges:
        if e.kind == "link":
            a, b = tn.links[e.index]
            print(f"  {e.id}  {tuple(a)} - {tuple(b)}")
        else:
            print(f"  {e.id}  dangling {tuple(tn.dangling[e.index])}")
    _write_json(args.json, _report("mincut", args, None, {"region": region, **res.to_dict()}))
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"NMR config JSON (fallback: ${CONFIG_ENV}, then built-in default)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", help="write the run report here")
    common.add_argument("--csv", help="write the result table here")
    common.add_argument("--svg", help="write a plot here (entropy-curve only)")

    p = argparse.ArgumentParser(prog="holo-ee", description="Perfect-tensor holographic entropy toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-pt", parents=[common], help="certify the perfect-tensor graph state")
    s.add_argument("--graph", default=None, help="searched (default) or a named fixture, e.g. ghz-like-fixture")
    s.set_defaults(func=cmd_verify_pt)

    def add_nmr_opts(s):
        s.add_argument("--shot-sigma", type=float, default=0.0, help="Gaussian noise on Pauli expectations")
        s.add_argument("--factor", type=float, default=1.25, help="off-diagonal factor for --compensate rescale")

    s = sub.add_parser("entropy-curve", parents=[common], help="S(k) over cyclic windows, k = 1..5")
    s.add_argument("--mode", choices=("ideal", "noisy", "compensated"), default="ideal")
    s.add_argument("--compensate", choices=("exact-inverse", "rescale"), default="exact-inverse")
    add_nmr_opts(s)
    s.set_defaults(func=cmd_entropy_curve)

    s = sub.add_parser("rt-check", parents=[common], help="boundary entropy vs min-cut")
    s.add_argument("--layers", type=int, default=0)
    s.add_argument("--regions", choices=("all-contiguous", "random"), default="all-contiguous")
    s.add_argument("--n-random", type=int, default=200)
    s.add_argument("--backend", choices=tensornet.BACKENDS, default="stabilizer")
    s.set_defaults(func=cmd_rt_check)

    s = sub.add_parser("nmr-run", parents=[common], help="simulate preparation, tomography, compensation")
    s.add_argument("--noiseless", action="store_true")
    s.add_argument("--compensate", choices=("none", "exact-inverse", "rescale"), default="none")
    s.add_argument("--rho-json", help="dump the reconstructed density matrix here")
    add_nmr_opts(s)
    s.set_defaults(func=cmd_nmr_run)

    s = sub.add_parser("mincut", parents=[common], help="minimal cut for a boundary region")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--network", help="network description JSON")
    src.add_argument("--layers", type=int, default=0, help="use the built-in hexagonal network")
    s.add_argument("--region", default="", help='boundary indices, e.g. "0,1,2" or "0-4"')
    s.set_defaults(func=cmd_mincut)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigError, ValidationError, UnsupportedScaleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ContractionError as exc:
        print(f"contraction failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
