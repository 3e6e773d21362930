"""NMR pipeline emulation: internal Hamiltonian, sliced evolution with T2* dephasing,
tomography, and decoherence compensation.

Evolution is sliced in steps of ``cfg.dt``. Each step applies the propagator
of the internal plus control Hamiltonian and then damps every density-matrix
element ``rho[a, b]`` by ``exp(-dt * sum_j [a_j != b_j] / T2*_j)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from . import qmath
from .circuits import Circuit, Gate, apply_gate
from .errors import CompensationError, ConfigError, UnsupportedScaleError, ValidationError

STEP_TOL = 1e-9
COHERENCE_CREATING = ("H", "RX", "RY")


@dataclass(frozen=True, eq=False)
class NmrSystemConfig:
    """Spin-system parameters. Frequencies in Hz, times in seconds."""

    n_spins: int
    nu: tuple
    J: np.ndarray
    t2star: tuple
    dt: float = 1e-5
    gate_durations: dict = field(default_factory=dict)
    total_budget_s: Optional[float] = 0.06

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        object.__setattr__(self, "t2star", tuple(float(v) for v in self.t2star))
        object.__setattr__(self, "J", np.asarray(self.J, dtype=float))
        n = self.n_spins
        if len(self.nu) != n or len(self.t2star) != n or self.J.shape != (n, n):
            raise ConfigError(f"parameter sizes do not match n_spins={n}")
        if not np.allclose(self.J, self.J.T) or np.any(np.diag(self.J) != 0):
            raise ConfigError("J must be symmetric with zero diagonal")
        if any(not t > 0 for t in self.t2star):
            raise ConfigError("every T2* must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if n > qmath.MAX_DENSITY_QUBITS:
            raise UnsupportedScaleError(f"{n} spins exceeds the density-matrix cap")

    @classmethod
    def from_dict(cls, d: dict) -> "NmrSystemConfig":
        try:
            return cls(
                n_spins=int(d["n_spins"]),
                nu=d["nu"],
                J=d["J"],
                t2star=[math.inf if t is None else t for t in d["t2star"]],
                dt=float(d.get("dt", 1e-5)),
                gate_durations={k: float(v) for k, v in (d.get("gate_durations") or {}).items()},
                total_budget_s=d.get("total_budget_s", 0.06),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad NMR config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "nu": list(self.nu),
            "J": self.J.tolist(),
            "t2star": [None if math.isinf(t) else t for t in self.t2star],
            "dt": self.dt,
            "gate_durations": dict(sorted(self.gate_durations.items())),
            "total_budget_s": self.total_budget_s,
        }

    def with_(self, **changes) -> "NmrSystemConfig":
        d = {
            "n_spins": self.n_spins, "nu": self.nu, "J": self.J, "t2star": self.t2star,
            "dt": self.dt, "gate_durations": self.gate_durations, "total_budget_s": self.total_budget_s,
        }
        d.update(changes)
        return NmrSystemConfig(**d)


def load_config(path) -> NmrSystemConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return NmrSystemConfig.from_dict(data)


def default_config_text() -> str:
    return resources.files("holoee").joinpath("data/default_config.json").read_text()


def default_config() -> NmrSystemConfig:
    return NmrSystemConfig.from_dict(json.loads(default_config_text()))


@dataclass(frozen=True)
class PulseSlice:
    """Either a timed slice (``duration > 0``, optional per-spin control field) or an
    ideal-gate marker (``duration == 0``).

    A marker applies ``gate`` instantaneously and undoes ``refocus_s`` seconds of
    internal-Hamiltonian evolution, standing in for a shaped pulse whose net
    effect over that time is exactly the gate.
    """

    duration: float
    amplitudes: Optional[tuple] = None  # Hz, per spin
    phases: Optional[tuple] = None  # radians, per spin
    gate: Optional[Gate] = None
    refocus_s: float = 0.0

    @property
    def is_marker(self) -> bool:
        return self.duration == 0


@dataclass(frozen=True)
class PulseSequence:
    slices: tuple = ()

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.slices)


def _bits(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return (idx[:, None] >> (n - 1 - np.arange(n))) & 1


def internal_hamiltonian(cfg: NmrSystemConfig) -> np.ndarray:
    """``sum_j pi nu_j Z_j + sum_{j<k} (pi/2) J_jk Z_j Z_k`` as a dense matrix (rad/s)."""
    n = cfg.n_spins
    z = 1 - 2 * _bits(n)  # eigenvalue of Z_j on each basis state
    diag = np.pi * z @ np.asarray(cfg.nu)
    for j in range(n):
        for k in range(j + 1, n):
            diag = diag + (np.pi / 2) * cfg.J[j, k] * z[:, j] * z[:, k]
    return np.diag(diag).astype(complex)


def control_hamiltonian(n: int, amplitudes, phases) -> np.ndarray:
    """``sum_j pi a_j (cos phi_j X_j + sin phi_j Y_j)``; amplitude ``a_j`` is a nutation rate in Hz."""
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for j, (a, phi) in enumerate(zip(amplitudes, phases)):
        if a == 0:
            continue
        local = np.pi * a * (np.cos(phi) * qmath.PAULI["X"] + np.sin(phi) * qmath.PAULI["Y"])
        h += np.kron(np.kron(np.eye(1 << j), local), np.eye(1 << (n - 1 - j)))
    return h


def decay_rates(t2star: Sequence[float]) -> np.ndarray:
    """``R[a, b] = sum_j [a_j != b_j] / T2*_j`` (1/s)."""
    n = len(t2star)
    bits = _bits(n)
    inv = np.array([0.0 if math.isinf(t) else 1.0 / t for t in t2star])
    diff = bits[:, None, :] != bits[None, :, :]
    return diff @ inv


@lru_cache(maxsize=64)
def _gate_unitary(gate: Gate, n: int) -> np.ndarray:
    eye = np.eye(1 << n, dtype=complex)
    return np.stack([apply_gate(eye[:, k], gate, n) for k in range(1 << n)], axis=1)


def _steps(duration: float, dt: float) -> int:
    steps = round(duration / dt)
    if abs(steps * dt - duration) > STEP_TOL * max(1.0, duration) or steps < 0:
        raise ValidationError(f"slice duration {duration} is not a multiple of dt={dt}")
    return steps


def evolve_slice(rho, cfg: NmrSystemConfig, slc: PulseSlice, noise_on: bool = True) -> np.ndarray:
    rho = qmath.as_density_matrix(rho)
    n = cfg.n_spins
    if rho.shape[0] != 1 << n:
        raise ValidationError(f"density matrix size does not match {n} spins")
    h_int = np.diag(internal_hamiltonian(cfg))
    if slc.is_marker:
        u = np.exp(1j * h_int * slc.refocus_s)[:, None] * np.eye(1 << n)
        if slc.gate is not None:
            u = _gate_unitary(slc.gate, n) @ u
        return u @ rho @ u.conj().T
    steps = _steps(slc.duration, cfg.dt)
    damp = np.exp(-cfg.dt * decay_rates(cfg.t2star)) if noise_on else None
    if slc.amplitudes is None or not np.any(slc.amplitudes):
        ph = np.exp(-1j * h_int * cfg.dt)
        step = np.outer(ph, ph.conj())
        if damp is not None:
            step = step * damp
        for _ in range(steps):
            rho = rho * step
        return rho
    phases = slc.phases if slc.phases is not None else (0.0,) * n
    u = expm(-1j * (np.diag(h_int) + control_hamiltonian(n, slc.amplitudes, phases)) * cfg.dt)
    for _ in range(steps):
        rho = u @ rho @ u.conj().T
        if damp is not None:
            rho = rho * damp
    return rho


def schedule_alap(circuit: Circuit) -> list[Gate]:
    """Delay each single-qubit gate until just before the next gate on its qubit.

    Only commutations of gates on disjoint qubits are used, so the circuit's
    unitary is unchanged.
    """
    out: list[Gate] = []
    waiting: list[Gate] = []
    for g in circuit.gates:
        if len(g.targets) == 1:
            waiting.append(g)
            continue
        out += [p for p in waiting if p.targets[0] in g.targets]
        waiting = [p for p in waiting if p.targets[0] not in g.targets]
        out.append(g)
    out.extend(waiting)
    return out


def calibrate_gate_durations(circuit: Circuit, budget: float, dt: float) -> dict:
    """Uniform per-gate duration so that ``circuit`` fills ``budget`` exactly."""
    kinds = sorted({g.kind for g in circuit.gates})
    if not circuit.gates:
        return {}
    per_gate = budget / len(circuit.gates)
    if abs(round(per_gate / dt) * dt - per_gate) > STEP_TOL * max(1.0, per_gate):
        raise ConfigError(f"budget {budget} s does not split into {len(circuit.gates)} whole multiples of dt")
    return {k: per_gate for k in kinds}


def resolve_gate_durations(circuit: Circuit, cfg: NmrSystemConfig, gate_durations=None) -> dict:
    if gate_durations:
        return dict(gate_durations)
    if cfg.gate_durations:
        return dict(cfg.gate_durations)
    if cfg.total_budget_s is None:
        raise ConfigError("no gate durations and no total budget configured")
    return calibrate_gate_durations(circuit, cfg.total_budget_s, cfg.dt)


def compile_circuit_to_sequence(circuit: Circuit, cfg: NmrSystemConfig, gate_durations=None,
                                schedule: str = "alap") -> PulseSequence:
    """Ideal-gate markers, each preceded by ``dt`` slices of free evolution lasting the
    gate's configured duration."""
    durations = resolve_gate_durations(circuit, cfg, gate_durations)
    if schedule == "alap":
        gates = schedule_alap(circuit)
    elif schedule == "asap":
        gates = list(circuit.gates)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    slices = []
    for g in gates:
        if g.kind not in durations:
            raise ConfigError(f"no duration configured for gate kind {g.kind}")
        d = durations[g.kind]
        try:
            steps = _steps(d, cfg.dt)
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
        slices += [PulseSlice(cfg.dt)] * steps
        slices.append(PulseSlice(0.0, gate=g, refocus_s=steps * cfg.dt))
    return PulseSequence(tuple(slices))


def coherence_times(seq: PulseSequence, n: int) -> np.ndarray:
    """Per spin, the free-evolution time after its first coherence-creating gate."""
    t = np.zeros(n)
    active = np.zeros(n, dtype=bool)
    for s in seq.slices:
        if s.is_marker:
            if s.gate is not None and s.gate.kind in COHERENCE_CREATING:
                active[s.gate.targets[0]] = True
        else:
            t[active] += s.duration
    return t


def run_sequence(seq: PulseSequence, cfg: NmrSystemConfig, noise_on: bool, rho0=None) -> np.ndarray:
    n = cfg.n_spins
    rho = qmath.projector(qmath.basis_state([0] * n)) if rho0 is None else rho0
    # consecutive free slices collapse into one call; evolve_slice still steps by dt
    pending = 0
    for s in seq.slices:
        if s.is_marker or s.amplitudes is not None:
            if pending:
                rho = evolve_slice(rho, cfg, PulseSlice(pending * cfg.dt), noise_on)
                pending = 0
            rho = evolve_slice(rho, cfg, s, noise_on)
        else:
            pending += _steps(s.duration, cfg.dt)
    if pending:
        rho = evolve_slice(rho, cfg, PulseSlice(pending * cfg.dt), noise_on)
    return rho


def run_noisy_circuit(circuit: Circuit, cfg: NmrSystemConfig, noise_on: bool = True,
                      schedule: str = "alap") -> np.ndarray:
    """Simulated density matrix after running ``circuit`` from ``|0...0>``."""
    if circuit.n_qubits != cfg.n_spins:
        raise ValueError(f"circuit has {circuit.n_qubits} qubits, system has {cfg.n_spins} spins")
    seq = compile_circuit_to_sequence(circuit, cfg, schedule=schedule)
    return run_sequence(seq, cfg, noise_on)


# --- tomography -------------------------------------------------------------

_PAULI_BASIS = np.stack([qmath.PAULI[c] for c in "IXYZ"])
_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def pauli_expectations(rho) -> np.ndarray:
    """All ``tr(P rho)`` for ``P`` in ``{I,X,Y,Z}^k``, shaped ``(4,)*k``."""
    rho = np.asarray(rho, dtype=complex)
    k = qmath.num_qubits(rho.shape[0])
    if k == 0:
        return np.array(np.trace(rho).real)
    rows, cols, paulis = _LETTERS[:k], _LETTERS[k:2 * k], _LETTERS[2 * k:3 * k].upper()
    ops = ",".join(f"{p}{c}{r}" for r, c, p in zip(rows, cols, paulis))
    expr = f"{rows}{cols},{ops}->{paulis}"
    return np.einsum(expr, rho.reshape([2] * (2 * k)), *([_PAULI_BASIS] * k), optimize=True).real


def reconstruct_from_expectations(exps) -> np.ndarray:
    """``(1/2^k) sum_P <P> P``."""
    exps = np.asarray(exps, dtype=float)
    k = exps.ndim
    if k == 0:
        return np.array([[exps.item()]], dtype=complex)
    rows, cols, paulis = _LETTERS[:k], _LETTERS[k:2 * k], _LETTERS[2 * k:3 * k].upper()
    ops = ",".join(f"{p}{r}{c}" for r, c, p in zip(rows, cols, paulis))
    out = np.einsum(f"{paulis},{ops}->{rows}{cols}", exps.astype(complex), *([_PAULI_BASIS] * k), optimize=True)
    return out.reshape(1 << k, 1 << k) / (1 << k)


def tomography_emulate(rho, keep, shot_sigma: float = 0.0, seed=None) -> np.ndarray:
    """Pauli tomography of the reduction onto ``keep`` with Gaussian readout noise.

    The identity expectation is left exact; the result is projected onto the
    PSD unit-trace set.
    """
    keep = list(keep)
    if len(keep) > 6:
        raise UnsupportedScaleError(f"tomography of {len(keep)} qubits exceeds the cap of 6")
    if shot_sigma < 0:
        raise ValueError("shot_sigma must be non-negative")
    red = qmath.partial_trace(qmath.as_density_matrix(rho), keep)
    exps = pauli_expectations(red)
    if shot_sigma > 0:
        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, shot_sigma, size=exps.shape)
        noise.flat[0] = 0.0
        exps = exps + noise
    return qmath.project_psd(reconstruct_from_expectations(exps))


# --- analysis ---------------------------------------------------------------

@dataclass(frozen=True)
class EntropyPoint:
    k: int
    mean: float
    spread: float
    windows: tuple


def entropy_curve(rho6) -> list[EntropyPoint]:
    """Mean and sample standard deviation of ``S(k)`` over the six cyclic windows, k = 1..5."""
    rho6 = qmath.as_density_matrix(rho6)
    if rho6.shape[0] != 64:
        raise ValueError("entropy curve needs a 6-qubit density matrix")
    out = []
    for k in range(1, 6):
        vals = tuple(
            qmath.von_neumann_entropy(qmath.partial_trace(rho6, [(j + i) % 6 for i in range(k)]))
            for j in range(6)
        )
        out.append(EntropyPoint(k, float(np.mean(vals)), float(np.std(vals, ddof=1)), vals))
    return out


def _finish_compensation(rho) -> np.ndarray:
    if not np.all(np.isfinite(rho)):
        raise CompensationError("compensated matrix is not finite")
    try:
        return qmath.project_psd(rho)
    except ValidationError as exc:
        raise CompensationError(str(exc)) from exc


def rescale_compensation(rho, factor: float) -> np.ndarray:
    """Scale every off-diagonal element by ``factor`` and re-project to a state."""
    if not math.isfinite(factor) or factor < 1:
        raise ValueError(f"factor must be finite and >= 1, got {factor}")
    rho = np.array(rho, dtype=complex)
    d = np.diag(rho).copy()
    rho *= factor
    np.fill_diagonal(rho, d)
    return _finish_compensation(rho)


def compensate_dephasing(rho, t2star: Sequence[float], times) -> np.ndarray:
    """Undo the dephasing model: ``rho[a, b] *= exp(sum_j [a_j != b_j] t_j / T2*_j)``.

    ``times`` is a single duration or one per spin.
    """
    rho = np.asarray(rho, dtype=complex)
    n = qmath.num_qubits(rho.shape[0])
    if len(t2star) != n:
        raise ValueError(f"need {n} T2* values, got {len(t2star)}")
    times = np.broadcast_to(np.asarray(times, dtype=float), (n,))
    inv = np.array([0.0 if math.isinf(t) else 1.0 / t for t in t2star])
    diff = _bits(n)[:, None, :] != _bits(n)[None, :, :]
    with np.errstate(over="ignore", invalid="ignore"):
        boosted = rho * np.exp(diff @ (times * inv))
    return _finish_compensation(boosted)
