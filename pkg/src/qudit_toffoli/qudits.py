"""Mixed-radix pure-state engine.

Registers are ordered lists of wires with independent dimensions (2 for a
qubit, 3 for a qutrit, ...).  Basis states are addressed big-endian: the
first wire is the most significant digit, so for dims (2, 2, 3) the ket
|i, j, k> sits at linear index i*6 + j*3 + k.

Everything here is a pure function on immutable-by-convention values; no
operation mutates its inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12      # norm / unitarity of exact constructions
PRODUCT_TOL = 1e-10   # accumulated gate products


class WireError(ValueError):
    """A wire index or per-wire digit is out of range."""


# ---------------------------------------------------------------------------
# Register description and indexing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WireDims:
    """Per-wire dimensions of a register, e.g. (2, 2, 3) for qubit+qubit+qutrit."""

    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims:
            raise WireError("register needs at least one wire")
        for w, d in enumerate(self.dims):
            if d < 2:
                raise WireError(f"wire {w}: dimension {d} < 2")

    @property
    def n_wires(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        p = 1
        for d in self.dims:
            p *= d
        return p

    def index(self, digits) -> int:
        return basis_index(digits, self)

    def digits(self, index: int) -> tuple[int, ...]:
        return basis_digits(index, self)


def basis_index(digits, dims: WireDims) -> int:
    """Linear index of the basis ket with the given per-wire levels (big-endian)."""
    if len(digits) != dims.n_wires:
        raise WireError(f"expected {dims.n_wires} digits, got {len(digits)}")
    idx = 0
    for w, (digit, d) in enumerate(zip(digits, dims.dims)):
        if not 0 <= digit < d:
            raise WireError(f"wire {w}: digit {digit} out of range for dimension {d}")
        idx = idx * d + digit
    return idx


def basis_digits(index: int, dims: WireDims) -> tuple[int, ...]:
    """Inverse of :func:`basis_index`."""
    if not 0 <= index < dims.total_dim:
        raise WireError(f"index {index} out of range for total dimension {dims.total_dim}")
    out = []
    for d in reversed(dims.dims):
        out.append(index % d)
        index //= d
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# States and gates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over a mixed-radix register."""

    dims: WireDims
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.dims.total_dim,):
            raise WireError(
                f"amplitude vector has length {amps.shape}, register needs {self.dims.total_dim}")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, dims: WireDims, digits) -> "PureState":
        amps = np.zeros(dims.total_dim, dtype=complex)
        amps[basis_index(digits, dims)] = 1.0
        return cls(dims, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, digits) -> complex:
        return complex(self.amps[basis_index(digits, self.dims)])


@dataclass(frozen=True)
class GateMatrix:
    """Unitary acting on a (sub)register with the given per-wire dimensions."""

    wire_dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        wd = tuple(int(d) for d in self.wire_dims)
        object.__setattr__(self, "wire_dims", wd)
        mat = np.asarray(self.matrix, dtype=complex)
        dim = int(np.prod(wd))
        if mat.shape != (dim, dim):
            raise WireError(f"matrix shape {mat.shape} does not match wire dims {wd}")
        err = np.max(np.abs(mat.conj().T @ mat - np.eye(dim)))
        if err > NORM_TOL:
            raise WireError(f"matrix is not unitary (deviation {err:.3e})")
        object.__setattr__(self, "matrix", mat)

    @property
    def arity(self) -> int:
        return len(self.wire_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.wire_dims))


def _apply_to_block(amps: np.ndarray, gate: GateMatrix, wires, dims: WireDims) -> np.ndarray:
    """Apply a gate to wires of `amps`, where amps has shape (total_dim,) or
    (total_dim, batch).  Batched form is what circuit_unitary feeds in."""
    wires = list(wires)
    if len(set(wires)) != len(wires):
        raise WireError(f"repeated wire index in {wires}")
    for w in wires:
        if not 0 <= w < dims.n_wires:
            raise WireError(f"wire index {w} out of range for {dims.n_wires} wires")
    for w, d in zip(wires, gate.wire_dims):
        if dims.dims[w] != d:
            raise WireError(
                f"wire {w} has dimension {dims.dims[w]}, gate expects {d}")

    batched = amps.ndim == 2
    batch = amps.shape[1] if batched else 1
    tensor = amps.reshape(dims.dims + (batch,))
    k = len(wires)
    tensor = np.moveaxis(tensor, wires, range(k))
    head = gate.dim
    rest = tensor.shape[k:]
    out = gate.matrix @ tensor.reshape(head, -1)
    tensor = out.reshape(tensor.shape[:k] + rest)
    tensor = np.moveaxis(tensor, range(k), wires)
    flat = tensor.reshape(dims.total_dim, batch)
    return flat if batched else flat[:, 0]


def apply_gate(state: PureState, gate: GateMatrix, wires) -> PureState:
    """Gate embedded as identity on all other wires; preserves the norm."""
    new_amps = _apply_to_block(state.amps, gate, wires, state.dims)
    drift = abs(float(np.linalg.norm(new_amps)) - state.norm())
    if drift > NORM_TOL:
        raise WireError(f"norm drifted by {drift:.3e} during gate application")
    return PureState(state.dims, new_amps)


def embed_gate(gate: GateMatrix, wires, dims: WireDims) -> np.ndarray:
    """Full-register matrix of a gate acting on the given wires."""
    eye = np.eye(dims.total_dim, dtype=complex)
    return _apply_to_block(eye, gate, wires, dims)


def equiv_up_to_global_phase(a, b, tol: float = PRODUCT_TOL):
    """Whether a == lam * b for some unit-modulus lam; returns (bool, lam or None)."""
    am = a.matrix if isinstance(a, GateMatrix) else np.asarray(a, dtype=complex)
    bm = b.matrix if isinstance(b, GateMatrix) else np.asarray(b, dtype=complex)
    if am.shape != bm.shape:
        raise WireError(f"shape mismatch: {am.shape} vs {bm.shape}")
    pivot = np.unravel_index(np.argmax(np.abs(bm)), bm.shape)
    if abs(bm[pivot]) < tol:
        # b is numerically zero; equivalence reduces to a being zero too
        return (bool(np.max(np.abs(am)) < tol), 1.0 + 0.0j)
    lam = am[pivot] / bm[pivot]
    if abs(abs(lam) - 1.0) > tol:
        return (False, None)
    lam /= abs(lam)
    if np.max(np.abs(am - lam * bm)) < tol:
        return (True, complex(lam))
    return (False, None)


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateStep:
    """One circuit step: a named gate with parameters, applied to target wires."""

    name: str
    params: tuple
    wires: tuple[int, ...]
    gate: GateMatrix

    @property
    def is_multi_wire(self) -> bool:
        return len(self.wires) > 1


@dataclass(frozen=True)
class CircuitDescription:
    """Ordered gate applications on a fixed register."""

    dims: WireDims
    steps: tuple[GateStep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for s, step in enumerate(self.steps):
            for w in step.wires:
                if not 0 <= w < self.dims.n_wires:
                    raise WireError(f"step {s}: wire index {w} out of range")
            for w, d in zip(step.wires, step.gate.wire_dims):
                if self.dims.dims[w] != d:
                    raise WireError(
                        f"step {s}: wire {w} has dimension {self.dims.dims[w]}, "
                        f"gate {step.name} expects {d}")

    def apply(self, state: PureState, upto: int | None = None) -> PureState:
        """Run the circuit (or its first `upto` steps) on a state."""
        for step in self.steps[:upto]:
            state = apply_gate(state, step.gate, step.wires)
        return state

    def two_qudit_gate_count(self) -> int:
        return sum(1 for s in self.steps if s.is_multi_wire)

    def single_qudit_gate_count(self) -> int:
        return sum(1 for s in self.steps if not s.is_multi_wire)


def circuit_unitary(circ: CircuitDescription) -> GateMatrix:
    """Ordered product of the embedded step unitaries over the full register."""
    amps = np.eye(circ.dims.total_dim, dtype=complex)
    for step in circ.steps:
        amps = _apply_to_block(amps, step.gate, step.wires, circ.dims)
    dim = circ.dims.total_dim
    err = np.max(np.abs(amps.conj().T @ amps - np.eye(dim)))
    if err > PRODUCT_TOL:
        raise WireError(f"accumulated circuit product not unitary (deviation {err:.3e})")
    # bypass GateMatrix's strict constructor tolerance: products are checked at 1e-10
    gm = object.__new__(GateMatrix)
    object.__setattr__(gm, "wire_dims", circ.dims.dims)
    object.__setattr__(gm, "matrix", amps)
    return gm


# ---------------------------------------------------------------------------
# Circuit text format
# ---------------------------------------------------------------------------
#
#   # comment
#   dims 2 2 3
#   xa 2
#   cnot 1 2
#   swap(1,3) 2
#
# First directive must be "dims".  Each following line is
# "<gate>[ (p1,p2,...) ] <wire> [<wire> ...]".  Gate names are resolved by a
# caller-supplied builder: builder(name, params, wire_dims) -> GateMatrix.

class CircuitParseError(ValueError):
    """Raised with a 1-based line number on malformed circuit text."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


_STEP_RE = re.compile(r"^([a-zA-Z_][a-zA-Z_0-9]*)\s*(?:\(([^)]*)\))?\s*(.*)$")


def parse_circuit(text: str, gate_builder) -> CircuitDescription:
    """Parse circuit text into a CircuitDescription.

    `gate_builder(name, params, wire_dims)` must return the GateMatrix for a
    lower-cased gate name and raise ValueError/KeyError for unknown names.
    """
    dims: WireDims | None = None
    steps: list[GateStep] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if dims is None:
            parts = line.split()
            if parts[0].lower() != "dims":
                raise CircuitParseError(line_no, "first directive must be 'dims'")
            try:
                dims = WireDims(tuple(int(p) for p in parts[1:]))
            except (ValueError, WireError) as exc:
                raise CircuitParseError(line_no, f"bad dims: {exc}") from exc
            continue
        match = _STEP_RE.match(line)
        if not match:
            raise CircuitParseError(line_no, f"cannot parse step {line!r}")
        name = match.group(1).lower()
        params: tuple = ()
        if match.group(2) is not None:
            try:
                params = tuple(
                    float(p) if "." in p or "e" in p.lower() else int(p)
                    for p in match.group(2).split(",") if p.strip())
            except ValueError as exc:
                raise CircuitParseError(line_no, f"bad parameters: {exc}") from exc
        try:
            wires = tuple(int(w) for w in match.group(3).split())
        except ValueError as exc:
            raise CircuitParseError(line_no, f"bad wire list: {exc}") from exc
        if not wires:
            raise CircuitParseError(line_no, "step names no target wires")
        for w in wires:
            if not 0 <= w < dims.n_wires:
                raise CircuitParseError(line_no, f"wire {w} out of range")
        wire_dims = tuple(dims.dims[w] for w in wires)
        try:
            gate = gate_builder(name, params, wire_dims)
        except (KeyError, ValueError) as exc:
            raise CircuitParseError(line_no, str(exc)) from exc
        steps.append(GateStep(name, params, wires, gate))
    if dims is None:
        raise CircuitParseError(1, "no 'dims' directive found")
    return CircuitDescription(dims, tuple(steps))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
