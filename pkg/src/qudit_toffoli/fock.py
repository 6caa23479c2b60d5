"""Bosonic Fock-space engine for m optical modes at fixed total photon number.

Conventions, fixed once and used everywhere:

* Basis enumeration is lexicographically descending in the occupation tuple,
  so for (m=2, N=2): (2,0), (1,1), (0,2).
* A beamsplitter of reflectivity eta on modes (p, q) applies the real block

      [ sqrt(eta)    sqrt(1-eta) ]
      [ sqrt(1-eta)  -sqrt(eta)  ]

  i.e. the sign sits on the reflection off the "dotted" surface, which by
  default is the second listed mode (pass dotted=first mode to move it).
  This matrix is an involution, and the two-photon stay-put amplitude is
  1 - 2*eta: zero at a balanced splitter (Hong-Ou-Mandel) and +1/3 at
  eta = 1/3, so two-photon interference cancels the reflection sign there.
* A polarizing beamsplitter on spatial paths (h1,v1) and (h2,v2) transmits
  the h modes and swaps the v modes, with no phase.
* A half-wave plate at angle theta applies [[cos 2t, sin 2t], [sin 2t,
  -cos 2t]] to its (h, v) pair; theta = pi/8 (22.5 degrees) is a Hadamard.
* An attenuator is a beamsplitter against an explicit vacuum ancilla mode,
  keeping the whole evolution unitary; its `eta` is the probability the
  photon stays.
* A cross-Kerr element multiplies each basis amplitude by
  exp(i * chi * n_a * n_b); it is diagonal and not a mode-linear element.

Two independent routes compute multi-photon amplitudes: `lift_to_fock`
expands products of creation-operator linear forms, while
`permanent_amplitude_oracle` evaluates scaled matrix permanents directly.
They must agree; tests hold them to 1e-9 of each other.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .qudits import PureState, WireDims

MODE_UNITARY_TOL = 1e-10
ORACLE_TOL = 1e-9
HADAMARD_HWP_ANGLE = math.pi / 8


class PhotonNumberError(ValueError):
    """Occupations do not conserve the total photon number."""


# ---------------------------------------------------------------------------
# Basis and states
# ---------------------------------------------------------------------------

def _enumerate_occupations(m: int, n: int):
    if m == 1:
        yield (n,)
        return
    for head in range(n, -1, -1):
        for tail in _enumerate_occupations(m - 1, n - head):
            yield (head,) + tail


class FockBasis:
    """All occupation tuples of m modes holding exactly N photons."""

    def __init__(self, m: int, n_photons: int):
        if m < 1 or n_photons < 0:
            raise ValueError(f"bad basis shape m={m}, N={n_photons}")
        self.m = m
        self.n_photons = n_photons
        self.states: tuple[tuple[int, ...], ...] = tuple(_enumerate_occupations(m, n_photons))
        self._index = {occ: i for i, occ in enumerate(self.states)}

    @property
    def size(self) -> int:
        return len(self.states)

    def index_of(self, occupation) -> int:
        occ = tuple(int(x) for x in occupation)
        if occ not in self._index:
            raise PhotonNumberError(
                f"occupation {occ} is not a state of {self.m} modes / {self.n_photons} photons")
        return self._index[occ]

    def __eq__(self, other) -> bool:
        return isinstance(other, FockBasis) and (self.m, self.n_photons) == (other.m, other.n_photons)

    def __hash__(self):
        return hash((self.m, self.n_photons))

    def __repr__(self):
        return f"FockBasis(m={self.m}, N={self.n_photons}, size={self.size})"


@dataclass(frozen=True)
class OpticalState:
    """Amplitude vector over a FockBasis.  Unit norm before post-selection;
    after post-selection the squared norm is the success probability."""

    basis: FockBasis
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise ValueError(f"amplitude vector length {amps.shape} != basis size {self.basis.size}")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def fock(cls, basis: FockBasis, occupation) -> "OpticalState":
        amps = np.zeros(basis.size, dtype=complex)
        amps[basis.index_of(occupation)] = 1.0
        return cls(basis, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, occupation) -> complex:
        return complex(self.amps[self.basis.index_of(occupation)])

    def normalized(self) -> "OpticalState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        return OpticalState(self.basis, self.amps / n)


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

class OpticalElement:
    """Base: every element maps FockBasis(m, N) to itself unitarily."""

    is_mode_linear = True

    def mode_block(self):
        """(modes, block) for mode-linear elements."""
        raise NotImplementedError

    def embedded_mode_matrix(self, m: int) -> np.ndarray:
        modes, block = self.mode_block()
        mat = np.eye(m, dtype=complex)
        mat[np.ix_(modes, modes)] = block
        return mat

    def apply(self, state: OpticalState) -> OpticalState:
        modes, block = self.mode_block()
        return _apply_mode_block(state, modes, block)


@dataclass(frozen=True)
class Beamsplitter(OpticalElement):
    """Asymmetric beamsplitter; `dotted` names the mode whose reflection
    picks up the minus sign (defaults to the second listed mode)."""

    eta: float
    modes: tuple[int, int]
    dotted: int | None = None

    def __post_init__(self):
        if not 0.0 <= float(self.eta) <= 1.0:
            raise ValueError(f"reflectivity {self.eta} outside [0, 1]")
        if self.modes[0] == self.modes[1]:
            raise ValueError("beamsplitter needs two distinct modes")
        if self.dotted is not None and self.dotted not in self.modes:
            raise ValueError(f"dotted mode {self.dotted} is not one of {self.modes}")

    def mode_block(self):
        r = math.sqrt(float(self.eta))
        t = math.sqrt(1.0 - float(self.eta))
        if self.dotted is None or self.dotted == self.modes[1]:
            block = np.array([[r, t], [t, -r]], dtype=complex)
        else:
            block = np.array([[-r, t], [t, r]], dtype=complex)
        return list(self.modes), block


def VacuumAttenuator(eta, mode: int, ancilla: int) -> Beamsplitter:
    """Attenuating beamsplitter against an explicit vacuum ancilla: the
    photon stays in `mode` with amplitude sqrt(eta)."""
    return Beamsplitter(eta, (mode, ancilla))


@dataclass(frozen=True)
class HalfWavePlate(OpticalElement):
    """Wave plate on one (h, v) polarization pair; theta in radians."""

    theta: float
    modes: tuple[int, int]

    def __post_init__(self):
        if self.modes[0] == self.modes[1]:
            raise ValueError("wave plate needs two distinct modes")

    def mode_block(self):
        c = math.cos(2.0 * self.theta)
        s = math.sin(2.0 * self.theta)
        return list(self.modes), np.array([[c, s], [s, -c]], dtype=complex)


@dataclass(frozen=True)
class PolarizingBeamsplitter(OpticalElement):
    """Mode permutation on two spatial paths: h modes pass, v modes swap."""

    path1: tuple[int, int]
    path2: tuple[int, int]

    def __post_init__(self):
        all_modes = self.path1 + self.path2
        if len(set(all_modes)) != 4:
            raise ValueError("polarizing beamsplitter needs four distinct modes")

    def mode_block(self):
        h1, v1 = self.path1
        h2, v2 = self.path2
        block = np.zeros((4, 4), dtype=complex)
        order = [h1, v1, h2, v2]
        pos = {mode: i for i, mode in enumerate(order)}
        block[pos[h1], pos[h1]] = 1.0
        block[pos[h2], pos[h2]] = 1.0
        block[pos[v2], pos[v1]] = 1.0
        block[pos[v1], pos[v2]] = 1.0
        return order, block

    def apply(self, state: OpticalState) -> OpticalState:
        # permutation: relabel occupations directly, no amplitude mixing
        h1, v1 = self.path1
        h2, v2 = self.path2
        basis = state.basis
        amps = np.zeros_like(state.amps)
        for idx, occ in enumerate(basis.states):
            if state.amps[idx] == 0:
                continue
            out = list(occ)
            out[v1], out[v2] = occ[v2], occ[v1]
            amps[basis.index_of(tuple(out))] += state.amps[idx]
        return OpticalState(basis, amps)


@dataclass(frozen=True)
class CrossKerr(OpticalElement):
    """Diagonal two-mode phase exp(i chi n_a n_b): only doubly occupied
    mode pairs pick up the phase."""

    chi: float
    modes: tuple[int, int]

    is_mode_linear = False

    def __post_init__(self):
        if self.modes[0] == self.modes[1]:
            raise ValueError("cross-Kerr needs two distinct modes")

    def mode_block(self):
        raise TypeError("cross-Kerr is not a mode-linear element")

    def apply(self, state: OpticalState) -> OpticalState:
        a, b = self.modes
        phases = np.array([
            np.exp(1j * self.chi * occ[a] * occ[b]) if occ[a] and occ[b] else 1.0
            for occ in state.basis.states])
        return OpticalState(state.basis, state.amps * phases)


# ---------------------------------------------------------------------------
# Mode-matrix composition and Fock lifting
# ---------------------------------------------------------------------------

def single_photon_transfer(elements, m: int) -> np.ndarray:
    """Compose per-element blocks into the interferometer's m x m mode matrix.

    Only mode-linear elements participate; a cross-Kerr in the list is an
    error.  The composition is checked unitary as an internal bug guard.
    """
    mat = np.eye(m, dtype=complex)
    for el in elements:
        if not el.is_mode_linear:
            raise TypeError(f"{type(el).__name__} has no single-photon mode matrix")
        mat = el.embedded_mode_matrix(m) @ mat
    err = np.max(np.abs(mat.conj().T @ mat - np.eye(m)))
    if err > MODE_UNITARY_TOL:
        raise ValueError(f"composed mode matrix not unitary (deviation {err:.3e})")
    return mat


def _expand_creation_product(mode_matrix: np.ndarray, occupation, basis: FockBasis) -> np.ndarray:
    """Column of the lifted operator for one input occupation, by expanding
    prod_j (sum_i U[i,j] a_i^dag)^{n_j} |vac> with ladder factors."""
    m = basis.m
    current: dict[tuple[int, ...], complex] = {(0,) * m: 1.0 + 0.0j}
    for j, nj in enumerate(occupation):
        for _ in range(nj):
            nxt: dict[tuple[int, ...], complex] = {}
            for occ, coeff in current.items():
                for i in range(m):
                    u = mode_matrix[i, j]
                    if u == 0:
                        continue
                    out = list(occ)
                    out[i] += 1
                    key = tuple(out)
                    nxt[key] = nxt.get(key, 0.0) + coeff * u * math.sqrt(out[i])
            current = nxt
    norm = math.sqrt(math.prod(math.factorial(n) for n in occupation))
    column = np.zeros(basis.size, dtype=complex)
    for occ, coeff in current.items():
        column[basis.index_of(occ)] = coeff / norm
    return column


def lift_to_fock(mode_matrix: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Many-photon unitary induced by an m x m mode unitary on the basis.

    Matrix elements equal permanents of row/column-repeated submatrices
    scaled by occupation factorials; here they are built by expanding
    creation-operator polynomials, which keeps this route independent of the
    permanent oracle.
    """
    mode_matrix = np.asarray(mode_matrix, dtype=complex)
    if mode_matrix.shape != (basis.m, basis.m):
        raise ValueError(f"mode matrix shape {mode_matrix.shape} != ({basis.m}, {basis.m})")
    err = np.max(np.abs(mode_matrix.conj().T @ mode_matrix - np.eye(basis.m)))
    if err > MODE_UNITARY_TOL:
        raise ValueError(f"mode matrix not unitary (deviation {err:.3e})")
    out = np.zeros((basis.size, basis.size), dtype=complex)
    for col, occ in enumerate(basis.states):
        out[:, col] = _expand_creation_product(mode_matrix, occ, basis)
    return out


def _apply_mode_block(state: OpticalState, modes, block: np.ndarray) -> OpticalState:
    """Apply a small mode-linear block to a state without building the full
    lifted operator: basis states are grouped by the photon count inside the
    block and transformed by cached two-mode (or k-mode) lifts."""
    basis = state.basis
    modes = list(modes)
    k = len(modes)
    others = [i for i in range(basis.m) if i not in modes]
    amps = np.zeros_like(state.amps)
    lift_cache: dict[int, tuple[FockBasis, np.ndarray]] = {}
    for idx, occ in enumerate(basis.states):
        a = state.amps[idx]
        if a == 0:
            continue
        inner = tuple(occ[i] for i in modes)
        n_inner = sum(inner)
        if n_inner == 0:
            amps[idx] += a
            continue
        if n_inner not in lift_cache:
            sub_basis = FockBasis(k, n_inner)
            lift_cache[n_inner] = (sub_basis, lift_to_fock(block, sub_basis))
        sub_basis, lifted = lift_cache[n_inner]
        col = lifted[:, sub_basis.index_of(inner)]
        base = list(occ)
        for row, sub_occ in enumerate(sub_basis.states):
            c = col[row]
            if c == 0:
                continue
            for mode, n in zip(modes, sub_occ):
                base[mode] = n
            amps[basis.index_of(tuple(base))] += a * c
    return OpticalState(basis, amps)


def apply_elements(state: OpticalState, elements) -> OpticalState:
    for el in elements:
        state = el.apply(state)
    return state


def circuit_fock_operator(elements, basis: FockBasis) -> np.ndarray:
    """Dense many-photon operator of an ordered element list (Kerr included)."""
    out = np.eye(basis.size, dtype=complex)
    for col in range(basis.size):
        state = OpticalState(basis, out[:, col].copy())
        out[:, col] = apply_elements(state, elements).amps
    return out


# convenience wrappers matching the way circuits are described in the text

def apply_kerr(state: OpticalState, chi: float, mode_a: int, mode_b: int) -> OpticalState:
    return CrossKerr(chi, (mode_a, mode_b)).apply(state)


def apply_hwp(state: OpticalState, theta: float, mode_h: int, mode_v: int) -> OpticalState:
    return HalfWavePlate(theta, (mode_h, mode_v)).apply(state)


def apply_pbs(state: OpticalState, path1, path2) -> OpticalState:
    return PolarizingBeamsplitter(tuple(path1), tuple(path2)).apply(state)


def apply_beamsplitter(state: OpticalState, eta, mode_1: int, mode_2: int,
                       dotted: int | None = None) -> OpticalState:
    return Beamsplitter(eta, (mode_1, mode_2), dotted).apply(state)


# ---------------------------------------------------------------------------
# Permanent oracle
# ---------------------------------------------------------------------------

def permanent(mat: np.ndarray) -> complex:
    """Matrix permanent by Ryser's inclusion-exclusion formula, O(n 2^n).

    Plain-Python accumulation: the matrices here are tiny (n <= photon
    number) and array overhead would dominate.
    """
    mat = np.asarray(mat, dtype=complex)
    n = mat.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    rows = [tuple(row) for row in mat]
    total = 0.0 + 0.0j
    for subset in range(1, 1 << n):
        prod = 1.0 + 0.0j
        for row in rows:
            acc = 0.0 + 0.0j
            s = subset
            j = 0
            while s:
                if s & 1:
                    acc += row[j]
                s >>= 1
                j += 1
            prod *= acc
        total += -prod if subset.bit_count() & 1 else prod
    return complex(total if n % 2 == 0 else -total)


def permanent_amplitude_oracle(mode_matrix: np.ndarray, in_occupation, out_occupation) -> complex:
    """Transfer amplitude <out| Phi(U) |in> = per(U[out, in]) / sqrt(prod n! prod n'!).

    The submatrix repeats row i out_i times and column j in_j times.  This is
    the independent check on lift_to_fock.
    """
    mode_matrix = np.asarray(mode_matrix, dtype=complex)
    in_occ = tuple(int(x) for x in in_occupation)
    out_occ = tuple(int(x) for x in out_occupation)
    if sum(in_occ) != sum(out_occ):
        raise PhotonNumberError(
            f"photon number mismatch: {sum(in_occ)} in, {sum(out_occ)} out")
    rows = [i for i, n in enumerate(out_occ) for _ in range(n)]
    cols = [j for j, n in enumerate(in_occ) for _ in range(n)]
    sub = mode_matrix[np.ix_(rows, cols)]
    scale = math.sqrt(math.prod(math.factorial(n) for n in in_occ)
                      * math.prod(math.factorial(n) for n in out_occ))
    return permanent(sub) / scale


# ---------------------------------------------------------------------------
# Detection and post-selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectionPattern:
    """Exact photon-count conditions on a subset of modes; unlisted modes are
    unconstrained.  `zero(...)` is the common zero-detection condition."""

    conditions: tuple[tuple[int, int], ...]

    def __post_init__(self):
        conds = tuple(sorted((int(m), int(c)) for m, c in self.conditions))
        if not conds:
            raise ValueError("detection pattern must constrain at least one mode")
        modes = [m for m, _ in conds]
        if len(set(modes)) != len(modes):
            raise ValueError("detection pattern repeats a mode")
        for m, c in conds:
            if m < 0 or c < 0:
                raise ValueError(f"bad condition mode={m} count={c}")
        object.__setattr__(self, "conditions", conds)

    @classmethod
    def exact(cls, counts: dict) -> "DetectionPattern":
        return cls(tuple(counts.items()))

    @classmethod
    def zero(cls, modes) -> "DetectionPattern":
        return cls(tuple((m, 0) for m in modes))

    def matches(self, occupation) -> bool:
        return all(occupation[m] == c for m, c in self.conditions)

    def modes(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.conditions)


@dataclass(frozen=True)
class PostselectResult:
    """Unnormalized conditional state plus its probability.  `possible` is
    False when the pattern has zero weight (flagged, not raised)."""

    state: OpticalState
    probability: float

    @property
    def possible(self) -> bool:
        return self.probability > 1e-30

    def normalized(self) -> OpticalState | None:
        return self.state.normalized() if self.possible else None


def postselect(state: OpticalState, pattern: DetectionPattern) -> PostselectResult:
    """Project onto the detection pattern; probability is the surviving weight."""
    for m, _ in pattern.conditions:
        if m >= state.basis.m:
            raise ValueError(f"pattern mode {m} out of range for {state.basis.m} modes")
    keep = np.array([pattern.matches(occ) for occ in state.basis.states])
    amps = np.where(keep, state.amps, 0.0)
    prob = float(np.sum(np.abs(amps) ** 2))
    return PostselectResult(OpticalState(state.basis, amps), prob)


def exhaustive_patterns(basis: FockBasis, modes) -> list[DetectionPattern]:
    """Mutually exclusive, exhaustive detection patterns on the given modes:
    every way of distributing at most N photons among them."""
    modes = list(modes)
    n = basis.n_photons
    patterns = []
    for total in range(n + 1):
        for combo in combinations_with_replacement(range(len(modes)), total):
            counts = [0] * len(modes)
            for c in combo:
                counts[c] += 1
            patterns.append(DetectionPattern(tuple(zip(modes, counts))))
    return patterns


# ---------------------------------------------------------------------------
# Dual-rail (and qudit-rail) encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeLayout:
    """Maps logical wires onto disjoint mode groups: one photon per group,
    its position within the group being the logical level."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(m) for m in g) for g in self.groups)
        flat = [m for g in groups for m in g]
        if len(set(flat)) != len(flat):
            raise ValueError("layout groups overlap")
        for g in groups:
            if len(g) < 2:
                raise ValueError("each logical wire needs at least two modes")
        object.__setattr__(self, "groups", groups)

    @property
    def wire_dims(self) -> WireDims:
        return WireDims(tuple(len(g) for g in self.groups))

    @property
    def n_photons(self) -> int:
        return len(self.groups)

    def occupation(self, digits, m: int) -> tuple[int, ...]:
        dims = self.wire_dims
        if len(digits) != len(self.groups):
            raise ValueError(f"expected {len(self.groups)} digits, got {len(digits)}")
        occ = [0] * m
        for digit, group, d in zip(digits, self.groups, dims.dims):
            if not 0 <= digit < d:
                raise ValueError(f"digit {digit} out of range for a {d}-level wire")
            occ[group[digit]] = 1
        return tuple(occ)

    def encode(self, digits, basis: FockBasis) -> OpticalState:
        return OpticalState.fock(basis, self.occupation(digits, basis.m))

    def logical_digits(self, occupation) -> tuple[int, ...] | None:
        """Digits of a logical basis occupation, or None if it leaks out of
        the one-photon-per-group subspace."""
        used = sum(occupation[m] for g in self.groups for m in g)
        if used != sum(occupation):
            return None
        digits = []
        for group in self.groups:
            counts = [occupation[m] for m in group]
            if sum(counts) != 1 or max(counts) != 1:
                return None
            digits.append(counts.index(1))
        return tuple(digits)

    def decode(self, state: OpticalState) -> tuple[PureState, float]:
        """Project onto the logical subspace.  Returns the (unnormalized)
        logical state and the norm that leaked outside it."""
        dims = self.wire_dims
        amps = np.zeros(dims.total_dim, dtype=complex)
        leaked = 0.0
        for idx, occ in enumerate(state.basis.states):
            a = state.amps[idx]
            if a == 0:
                continue
            digits = self.logical_digits(occ)
            if digits is None:
                leaked += abs(a) ** 2
            else:
                amps[dims.index(digits)] = a
        return PureState(dims, amps), math.sqrt(leaked)


def logical_transfer(operator: np.ndarray, basis: FockBasis,
                     layout_in: ModeLayout, layout_out: ModeLayout | None = None) -> np.ndarray:
    """Post-selected logical matrix <enc_out(y)| U |enc_in(x)> over all digit
    tuples; input and output layouts may differ when a construction relabels
    its target modes."""
    layout_out = layout_out or layout_in
    dims_in = layout_in.wire_dims
    dims_out = layout_out.wire_dims
    if dims_in.total_dim != dims_out.total_dim:
        raise ValueError("input and output layouts have different logical dimensions")
    rows = [basis.index_of(layout_out.occupation(dims_out.digits(y), basis.m))
            for y in range(dims_out.total_dim)]
    cols = [basis.index_of(layout_in.occupation(dims_in.digits(x), basis.m))
            for x in range(dims_in.total_dim)]
    return operator[np.ix_(rows, cols)]


# ---------------------------------------------------------------------------
# Optical circuit text format
# ---------------------------------------------------------------------------
#
#   modes 8
#   photons 3
#   pbs 4 5 6 7          # path1 h v, path2 h v
#   hwp 22.5 4 5         # angle in degrees, then h v
#   kerr 180 1 5         # phase in degrees (180 = pi), two modes
#   bs 1/3 0 3           # reflectivity (fraction or float), two modes
#   bs 1/3 0 3 dotted=0  # move the phase-flip surface to the first mode
#   atten 1/3 1 4        # stay probability, mode, vacuum ancilla
#   detect 4=0 5=0       # exact per-mode photon counts

class OpticalParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class OpticalCircuit:
    """Parsed optical circuit: mode count, photon number, ordered elements,
    optional detection pattern."""

    m: int
    n_photons: int
    elements: tuple
    pattern: DetectionPattern | None = None

    def basis(self) -> FockBasis:
        return FockBasis(self.m, self.n_photons)


def _parse_value(token: str, line_no: int) -> float:
    try:
        if "/" in token:
            return float(Fraction(token))
        return float(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise OpticalParseError(line_no, f"bad numeric value {token!r}") from exc


def parse_optical_circuit(text: str) -> OpticalCircuit:
    m: int | None = None
    n_photons: int | None = None
    elements: list = []
    pattern: DetectionPattern | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        if kind == "modes":
            m = int(parts[1])
            continue
        if kind == "photons":
            n_photons = int(parts[1])
            continue
        if m is None or n_photons is None:
            raise OpticalParseError(line_no, "'modes' and 'photons' must come first")

        def want_modes(tokens, count):
            try:
                idx = tuple(int(t) for t in tokens)
            except ValueError as exc:
                raise OpticalParseError(line_no, f"bad mode list {tokens}") from exc
            if len(idx) != count:
                raise OpticalParseError(line_no, f"{kind} needs {count} modes, got {len(idx)}")
            for i in idx:
                if not 0 <= i < m:
                    raise OpticalParseError(line_no, f"mode {i} out of range")
            return idx

        try:
            if kind == "bs":
                dotted = None
                tokens = parts[1:]
                if tokens and tokens[-1].startswith("dotted="):
                    dotted = int(tokens[-1].split("=", 1)[1])
                    tokens = tokens[:-1]
                eta = _parse_value(tokens[0], line_no)
                elements.append(Beamsplitter(eta, want_modes(tokens[1:], 2), dotted))
            elif kind == "atten":
                eta = _parse_value(parts[1], line_no)
                mode, anc = want_modes(parts[2:], 2)
                elements.append(VacuumAttenuator(eta, mode, anc))
            elif kind == "hwp":
                theta = math.radians(_parse_value(parts[1], line_no))
                elements.append(HalfWavePlate(theta, want_modes(parts[2:], 2)))
            elif kind == "kerr":
                chi = math.radians(_parse_value(parts[1], line_no))
                elements.append(CrossKerr(chi, want_modes(parts[2:], 2)))
            elif kind == "pbs":
                modes = want_modes(parts[1:], 4)
                elements.append(PolarizingBeamsplitter(modes[:2], modes[2:]))
            elif kind == "detect":
                conds = []
                for token in parts[1:]:
                    if not re.fullmatch(r"\d+=\d+", token):
                        raise OpticalParseError(line_no, f"bad detection condition {token!r}")
                    mode, count = token.split("=")
                    if not 0 <= int(mode) < m:
                        raise OpticalParseError(line_no, f"mode {mode} out of range")
                    conds.append((int(mode), int(count)))
                pattern = DetectionPattern(tuple(conds))
            else:
                raise OpticalParseError(line_no, f"unknown element {kind!r}")
        except OpticalParseError:
            raise
        except (ValueError, IndexError) as exc:
            raise OpticalParseError(line_no, str(exc)) from exc
    if m is None or n_photons is None:
        raise OpticalParseError(1, "missing 'modes' or 'photons' directive")
    return OpticalCircuit(m, n_photons, tuple(elements), pattern)
