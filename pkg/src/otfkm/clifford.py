"""Construction and validation of real Clifford-algebra representations and
symmetric Clifford systems.

The skew generators E_1, ..., E_nu on R^l satisfy

    E_a E_b + E_b E_a = -2 delta_ab I,

and the derived symmetric system P_0, ..., P_m on R^{2l} satisfies

    P_a P_b + P_b P_a = 2 delta_ab I.

Generators are built deterministically: left-multiplication matrices of the
Cayley-Dickson algebras (complex numbers, quaternions, octonions) cover
nu <= 7 at the minimal dimension; eight anticommuting complex structures on
R^16 plus the chirality operator extend any system by eight generators at
16x the dimension, which realizes the period-8 dimension table.  All
constructed matrices have entries in {0, +-1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError
from .numerics import symmetric_eigendecomposition

RELATION_TOL = 1e-12

_DELTA_TABLE = {1: 1, 2: 2, 3: 4, 4: 4, 5: 8, 6: 8, 7: 8, 8: 8}


def delta_dim(m: int) -> int:
    """Dimension of an irreducible module of the Clifford algebra C_{m-1}.

    Table delta(1..8) = 1, 2, 4, 4, 8, 8, 8, 8 extended by
    delta(m + 8) = 16 * delta(m).
    """
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DimensionError(f"m must be an integer, got {m!r}")
    if m <= 0:
        raise DimensionError(f"m must be positive, got {m}")
    factor = 1
    while m > 8:
        factor *= 16
        m -= 8
    return factor * _DELTA_TABLE[m]


@lru_cache(maxsize=None)
def _cayley_dickson_table(dim: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Structure constants of the Cayley-Dickson algebra of dimension ``dim``
    (1, 2, 4 or 8): table[i][j] = (index, sign) with e_i e_j = sign * e_index.
    """
    if dim == 1:
        return (((0, 1),),)
    half = _cayley_dickson_table(dim // 2)
    h = dim // 2

    def conj(idx: int, sign: int) -> tuple[int, int]:
        return (idx, sign if idx == 0 else -sign)

    table = [[(0, 0)] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            # (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))
            if i < h and j < h:
                table[i][j] = half[i][j]
            elif i < h and j >= h:
                # (a, 0)(0, d) = (0, d a)
                idx, sign = half[j - h][i]
                table[i][j] = (idx + h, sign)
            elif i >= h and j < h:
                # (0, b)(c, 0) = (0, b conj(c))
                cj, cs = conj(j, 1)
                idx, sign = half[i - h][cj]
                table[i][j] = (idx + h, cs * sign)
            else:
                # (0, b)(0, d) = (-conj(d) b, 0)
                dj, ds = conj(j - h, 1)
                idx, sign = half[dj][i - h]
                table[i][j] = (idx, -ds * sign)
    return tuple(tuple(row) for row in table)


def _left_multiplications(dim: int) -> list[np.ndarray]:
    """Left-multiplication matrices L_{e_a}, a = 1..dim-1, acting on R^dim."""
    table = _cayley_dickson_table(dim)
    mats = []
    for a in range(1, dim):
        mat = np.zeros((dim, dim))
        for col in range(dim):
            idx, sign = table[a][col]
            mat[idx, col] = float(sign)
        mats.append(mat)
    return mats


def _sixteen_dim_block() -> tuple[list[np.ndarray], np.ndarray]:
    """Eight anticommuting complex structures J_1..J_8 on R^16 together with
    the chirality operator w = J_1 ... J_8 (symmetric, w^2 = I, anticommuting
    with every J_a)."""
    oct_l = _left_multiplications(8)
    eye8 = np.eye(8)
    js = [np.block([[e, np.zeros((8, 8))], [np.zeros((8, 8)), -e]]) for e in oct_l]
    js.append(np.block([[np.zeros((8, 8)), -eye8], [eye8, np.zeros((8, 8))]]))
    omega = js[0].copy()
    for j in js[1:]:
        omega = omega @ j
    return js, omega


def _minimal_generators(nu: int) -> list[np.ndarray]:
    """nu anticommuting skew-orthogonal generators on R^{delta(nu+1)}."""
    if nu == 0:
        return []
    if nu <= 7:
        dim = 2 if nu == 1 else (4 if nu <= 3 else 8)
        return _left_multiplications(dim)[:nu]
    js, omega = _sixteen_dim_block()
    base = _minimal_generators(nu - 8)
    inner = delta_dim(nu - 7)
    eye_inner = np.eye(inner)
    gens = [np.kron(j, eye_inner) for j in js]
    gens.extend(np.kron(omega, e) for e in base)
    return gens


@dataclass(frozen=True)
class SkewGeneratorSet:
    """Orthogonal matrices E_1..E_nu on R^l with E_a E_b + E_b E_a = -2 d_ab I."""

    nu: int
    l: int
    generators: tuple[np.ndarray, ...]

    def validate(self, tol: float = RELATION_TOL) -> float:
        """Check all defining relations; returns the max entrywise residual."""
        worst = 0.0
        eye = np.eye(self.l)
        for a, e in enumerate(self.generators):
            if e.shape != (self.l, self.l):
                raise DimensionError(f"generator {a} has shape {e.shape}, expected {(self.l, self.l)}")
            worst = max(worst, float(np.max(np.abs(e.T @ e - eye))))
        for a in range(self.nu):
            for b in range(a, self.nu):
                anti = self.generators[a] @ self.generators[b] + self.generators[b] @ self.generators[a]
                target = -2.0 * eye if a == b else 0.0
                worst = max(worst, float(np.max(np.abs(anti - target))))
        if worst > tol:
            raise ValueError(f"skew generator relations violated: residual {worst:.3e}")
        return worst


def build_skew_generators(nu: int, l: int) -> SkewGeneratorSet:
    """Build nu anticommuting skew generators on R^l.

    ``l`` must be a positive multiple of delta(nu + 1); the minimal system
    is replicated block-diagonally to reach ``l``.
    """
    if nu < 0:
        raise DimensionError(f"generator count must be >= 0, got {nu}")
    if l <= 0:
        raise DimensionError(f"l must be positive, got {l}")
    minimal = delta_dim(nu + 1)
    if l % minimal != 0:
        raise DimensionError(
            f"l={l} is not a multiple of delta({nu + 1})={minimal}; "
            f"the minimal admissible l is {minimal}"
        )
    gens = _minimal_generators(nu)
    copies = l // minimal
    if copies > 1:
        eye = np.eye(copies)
        gens = [np.kron(eye, g) for g in gens]
    gens = tuple(_frozen(g) for g in gens)
    out = SkewGeneratorSet(nu=nu, l=l, generators=gens)
    out.validate()
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CliffordSystem:
    """Symmetric Clifford system P_0..P_m on R^{2l}, l = k * delta(m).

    Block layout: P_0 = diag(I, -I), P_1 = antidiag(I, I), and
    P_a = [[0, E_{a-1}], [-E_{a-1}, 0]] for a >= 2.  Immutable after
    construction; safe to share between threads.
    """

    m: int
    l: int
    k: int
    matrices: tuple[np.ndarray, ...]
    skew_source: SkewGeneratorSet = field(repr=False)

    @property
    def ambient_dim(self) -> int:
        return 2 * self.l

    def validate(self, tol: float = RELATION_TOL, check_spectrum: bool = True) -> float:
        """Check symmetry, anticommutation, tracelessness, and (for
        2l <= 32) the +-1 eigenvalue multiplicities.  Returns the max
        relation residual."""
        dim = self.ambient_dim
        eye = np.eye(dim)
        worst = 0.0
        for a, p in enumerate(self.matrices):
            if p.shape != (dim, dim):
                raise DimensionError(f"P_{a} has shape {p.shape}, expected {(dim, dim)}")
            worst = max(worst, float(np.max(np.abs(p - p.T))))
            if abs(float(np.trace(p))) > tol * dim:
                raise ValueError(f"P_{a} is not traceless")
        for a in range(self.m + 1):
            for b in range(a, self.m + 1):
                anti = self.matrices[a] @ self.matrices[b] + self.matrices[b] @ self.matrices[a]
                target = 2.0 * eye if a == b else 0.0
                worst = max(worst, float(np.max(np.abs(anti - target))))
        if worst > tol:
            raise ValueError(f"Clifford system relations violated: residual {worst:.3e}")
        if check_spectrum and dim <= 32:
            for a, p in enumerate(self.matrices):
                w, _ = symmetric_eigendecomposition(p)
                plus = int(np.sum(np.abs(w - 1.0) < 1e-8))
                minus = int(np.sum(np.abs(w + 1.0) < 1e-8))
                if plus != self.l or minus != self.l:
                    raise ValueError(
                        f"P_{a} eigenvalue multiplicities ({plus}, {minus}) != ({self.l}, {self.l})"
                    )
        return worst

    def relation_residual(self) -> float:
        """Max entrywise anticommutator residual over all index pairs."""
        dim = self.ambient_dim
        eye = np.eye(dim)
        worst = 0.0
        for a in range(self.m + 1):
            for b in range(a, self.m + 1):
                anti = self.matrices[a] @ self.matrices[b] + self.matrices[b] @ self.matrices[a]
                target = 2.0 * eye if a == b else 0.0
                worst = max(worst, float(np.max(np.abs(anti - target))))
        return worst

    def to_json(self) -> str:
        payload = {
            "m": self.m,
            "l": self.l,
            "k": self.k,
            "matrices": [p.reshape(-1).tolist() for p in self.matrices],
        }
        return json.dumps(payload)


def build_symmetric_system(m: int, k: int) -> CliffordSystem:
    """Build the symmetric Clifford system with m + 1 matrices on R^{2l},
    l = k * delta(m)."""
    if m < 1:
        raise DimensionError(f"m must be >= 1, got {m}")
    if k < 1:
        raise DimensionError(f"k must be >= 1, got {k}")
    l = k * delta_dim(m)
    skew = build_skew_generators(m - 1, l)
    eye = np.eye(l)
    zero = np.zeros((l, l))
    mats = [
        np.block([[eye, zero], [zero, -eye]]),
        np.block([[zero, eye], [eye, zero]]),
    ]
    for e in skew.generators:
        mats.append(np.block([[zero, e], [-e, zero]]))
    mats = mats[: m + 1]
    system = CliffordSystem(
        m=m, l=l, k=k, matrices=tuple(_frozen(p) for p in mats), skew_source=skew
    )
    system.validate()
    return system


def load_system(text: str) -> CliffordSystem:
    """Load a CliffordSystem from its JSON document, re-validating every
    invariant (including the block layout)."""
    payload = json.loads(text)
    m, l, k = int(payload["m"]), int(payload["l"]), int(payload["k"])
    dim = 2 * l
    raw = payload["matrices"]
    if len(raw) != m + 1:
        raise ValueError(f"expected {m + 1} matrices, got {len(raw)}")
    mats = []
    for flat in raw:
        arr = np.asarray(flat, dtype=float)
        if arr.size != dim * dim:
            raise DimensionError(f"matrix has {arr.size} entries, expected {dim * dim}")
        mats.append(arr.reshape(dim, dim))
    # Re-derive the skew generators from the stated block layout.
    eye = np.eye(l)
    if np.max(np.abs(mats[0] - np.block([[eye, 0 * eye], [0 * eye, -eye]]))) > RELATION_TOL:
        raise ValueError("P_0 does not have the diag(I, -I) block layout")
    if m >= 1 and np.max(np.abs(mats[1] - np.block([[0 * eye, eye], [eye, 0 * eye]]))) > RELATION_TOL:
        raise ValueError("P_1 does not have the antidiag(I, I) block layout")
    gens = []
    for a in range(2, m + 1):
        top_right = mats[a][:l, l:]
        expected = np.block(
            [[0 * eye, top_right], [-top_right, 0 * eye]]
        )
        if np.max(np.abs(mats[a] - expected)) > RELATION_TOL:
            raise ValueError(f"P_{a} does not have the off-diagonal block layout")
        gens.append(top_right.copy())
    skew = SkewGeneratorSet(nu=m - 1, l=l, generators=tuple(_frozen(g) for g in gens))
    skew.validate()
    system = CliffordSystem(
        m=m, l=l, k=k, matrices=tuple(_frozen(p) for p in mats), skew_source=skew
    )
    system.validate()
    return system


def unit_combination(system: CliffordSystem, c: np.ndarray) -> np.ndarray:
    """P_c = sum_a c_a P_a for a unit coefficient vector c in R^{m+1}.

    P_c is symmetric with P_c^2 = I; its +1 eigenspace has dimension l.
    Coefficient vectors shorter than m + 1 are zero-padded (combinations of
    a leading subset of the system).
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size > system.m + 1 or c.size == 0:
        raise ValueError(f"coefficient vector must have 1..{system.m + 1} entries")
    if abs(float(c @ c) - 1.0) > 1e-12:
        raise ValueError(f"coefficient vector must be unit, got |c|^2 = {float(c @ c)!r}")
    out = np.zeros((system.ambient_dim, system.ambient_dim))
    for coeff, mat in zip(c, system.matrices):
        if coeff != 0.0:
            out += coeff * mat
    return out
