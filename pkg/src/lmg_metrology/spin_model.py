"""LMG Hamiltonian on N spin-1/2 sites in the computational basis.

Basis convention: bit ``k`` of a basis index holds spin ``k``; bit value 0 is
spin up (sigma_z eigenvalue +1).  With this choice the magnetization sectors
are popcount classes of the index.

    H(gamma, h) = -(1/N) sum_{j<k} (sx_j sx_k + gamma sy_j sy_k) - h sum_k sz_k
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.linalg import null_space

from .errors import DomainError, ConsistencyError

MIN_SITES = 2
MAX_SITES = 12
HERMITIAN_ATOL = 1e-12


class Parameter(str, enum.Enum):
    ANISOTROPY = "anisotropy"
    FIELD = "field"
    TEMPERATURE = "temperature"


class Symmetry(str, enum.Enum):
    SPIN_FLIP = "spin_flip"
    GAMMA_INVERSION = "gamma_inversion"


def _check_sites(n_sites: int) -> int:
    if int(n_sites) != n_sites or not MIN_SITES <= n_sites <= MAX_SITES:
        raise DomainError(f"n_sites must be an integer in [{MIN_SITES}, {MAX_SITES}], got {n_sites!r}")
    return int(n_sites)


@dataclass(frozen=True)
class ModelParams:
    """One LMG instance: number of sites, anisotropy and external field."""

    n_sites: int
    gamma: float
    field: float

    def __post_init__(self):
        object.__setattr__(self, "n_sites", _check_sites(self.n_sites))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "field", float(self.field))

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites

    @property
    def in_canonical_domain(self) -> bool:
        return -1.0 <= self.gamma <= 1.0 and self.field >= 0.0

    def replace(self, **changes) -> "ModelParams":
        values = {"n_sites": self.n_sites, "gamma": self.gamma, "field": self.field}
        values.update(changes)
        return ModelParams(**values)


def is_hermitian(op: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, rtol=0.0, atol=atol)


@lru_cache(maxsize=None)
def _spin_signs(n_sites: int) -> np.ndarray:
    # signs[b, k] = +1 if spin k is up in basis state b
    idx = np.arange(2 ** n_sites)[:, None]
    bits = (idx >> np.arange(n_sites)[None, :]) & 1
    return 1 - 2 * bits


@lru_cache(maxsize=None)
def _coupling_terms(n_sites: int):
    """Return (XX, YY, Z): sum_{j<k} sx sx, sum_{j<k} sy sy, sum_k sz.

    All three are real matrices.  Cached per N; callers must not mutate.
    """
    dim = 2 ** n_sites
    signs = _spin_signs(n_sites)
    idx = np.arange(dim)
    xx = np.zeros((dim, dim))
    yy = np.zeros((dim, dim))
    for j, k in combinations(range(n_sites), 2):
        flipped = idx ^ ((1 << j) | (1 << k))
        xx[flipped, idx] += 1.0
        # sy|up> = i|down>, sy|down> = -i|up>  =>  amplitude (i s_j)(i s_k)
        yy[flipped, idx] += -signs[:, j] * signs[:, k]
    z = np.diag(signs.sum(axis=1).astype(float))
    for m in (xx, yy, z):
        m.setflags(write=False)
    return xx, yy, z


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense 2^N x 2^N LMG Hamiltonian (real symmetric)."""
    xx, yy, z = _coupling_terms(params.n_sites)
    n = params.n_sites
    return -(xx + params.gamma * yy) / n - params.field * z


def hamiltonian_derivative(params: ModelParams, which) -> np.ndarray:
    """Exact derivative of H with respect to gamma or h.

    H is affine in both parameters, so the result does not depend on the
    value of the parameter being differentiated.
    """
    which = Parameter(which)
    xx, yy, z = _coupling_terms(params.n_sites)
    if which is Parameter.ANISOTROPY:
        return -yy / params.n_sites
    if which is Parameter.FIELD:
        return -np.array(z)
    raise DomainError(f"H has no explicit dependence on {which.value}")


def collective_spin(n_sites: int, axis: str) -> np.ndarray:
    """Collective spin S_axis = 1/2 sum_k sigma_axis^k."""
    n_sites = _check_sites(n_sites)
    dim = 2 ** n_sites
    signs = _spin_signs(n_sites)
    idx = np.arange(dim)
    if axis == "z":
        return np.diag(0.5 * signs.sum(axis=1)).astype(complex)
    if axis not in ("x", "y"):
        raise DomainError(f"axis must be one of x, y, z; got {axis!r}")
    op = np.zeros((dim, dim), dtype=complex)
    for k in range(n_sites):
        flipped = idx ^ (1 << k)
        if axis == "x":
            op[flipped, idx] += 0.5
        else:
            op[flipped, idx] += 0.5j * signs[:, k]
    return op


def hamiltonian_from_collective(params: ModelParams) -> np.ndarray:
    """H rebuilt from collective operators in the S^2, S_z, S_+- form.

    H = -(1/N)(1+g)(S^2 - Sz^2 - N/2) - (1/2N)(1-g)(S+^2 + S-^2) - 2h Sz
    """
    n = params.n_sites
    g, h = params.gamma, params.field
    sx = collective_spin(n, "x")
    sy = collective_spin(n, "y")
    sz = collective_spin(n, "z")
    s2 = sx @ sx + sy @ sy + sz @ sz
    sp = sx + 1j * sy
    sm = sx - 1j * sy
    eye = np.eye(2 ** n)
    return (-(1 + g) / n * (s2 - sz @ sz - n / 2 * eye)
            - (1 - g) / (2 * n) * (sp @ sp + sm @ sm)
            - 2 * h * sz)


@lru_cache(maxsize=None)
def spin_flip_unitary(n_sites: int) -> np.ndarray:
    """U = tensor product of sigma_x on every site (a permutation matrix)."""
    n_sites = _check_sites(n_sites)
    dim = 2 ** n_sites
    u = np.zeros((dim, dim))
    idx = np.arange(dim)
    u[idx ^ (dim - 1), idx] = 1.0
    u.setflags(write=False)
    return u


@lru_cache(maxsize=None)
def quarter_rotation_unitary(n_sites: int) -> np.ndarray:
    """R = tensor product of exp(-i pi sigma_z / 4): a pi/2 rotation about z.

    R^dag sx R = -sy and R^dag sy R = sx on every site.
    """
    n_sites = _check_sites(n_sites)
    sz_total = _spin_signs(n_sites).sum(axis=1)
    r = np.diag(np.exp(-0.25j * np.pi * sz_total))
    r.setflags(write=False)
    return r


def symmetry_conjugation(params: ModelParams, which, atol: float = 1e-10):
    """Apply one of the model's two symmetry maps and check it.

    ``spin_flip``: returns U^dag H(gamma, -h) U with U the global spin flip;
    this must equal H(gamma, h).

    ``gamma_inversion``: returns (1/gamma) R^dag H(gamma, h gamma) R with R a
    pi/2 rotation about z; this must equal H(1/gamma, h).  The 1/gamma
    rescaling of the energy scale is required: the rotation swaps the x and y
    couplings, giving gamma * H(1/gamma, h).

    Returns ``(transformed, unitary)``.  Raises ConsistencyError if the
    transformed operator differs from the target by more than ``atol``.
    """
    which = Symmetry(which)
    n, g, h = params.n_sites, params.gamma, params.field
    if which is Symmetry.SPIN_FLIP:
        unitary = spin_flip_unitary(n)
        source = build_hamiltonian(params.replace(field=-h))
        transformed = unitary.conj().T @ source @ unitary
        target = build_hamiltonian(params)
    else:
        if g == 0.0:
            raise DomainError("gamma_inversion is undefined at gamma = 0")
        unitary = quarter_rotation_unitary(n)
        source = build_hamiltonian(params.replace(field=h * g))
        transformed = unitary.conj().T @ source @ unitary / g
        target = build_hamiltonian(params.replace(gamma=1.0 / g))
    residual = np.max(np.abs(transformed - target))
    if residual > atol * max(1.0, np.max(np.abs(target))):
        raise ConsistencyError(f"{which.value} symmetry violated: residual {residual:.3e}")
    return transformed, unitary


# N = 4 total-spin block structure ------------------------------------------

N4_BLOCKS = (("A", 0, 5), ("B", 5, 8), ("B", 8, 11), ("C", 11, 16))


@lru_cache(maxsize=None)
def n4_block_basis() -> np.ndarray:
    """Orthogonal 16x16 change of basis that block-diagonalizes H_4.

    Columns, in order: the S=2 multiplet (m = 2..-2), two S=1 multiplets
    (m = 1, 0, -1), then a singlet, the third S=1 multiplet and a second
    singlet.  With this ordering the blocks read A (5x5), B, B (3x3) and
    C (5x5).  Multiplets are generated from highest-weight states with S_-,
    so the ladder matrix elements carry the standard positive phases.
    """
    n = 4
    sz = collective_spin(n, "z").real
    sp = (collective_spin(n, "x") + 1j * collective_spin(n, "y")).real
    sm = sp.T
    m_of_state = np.diag(sz)

    def highest_weights(m):
        sector = np.flatnonzero(np.isclose(m_of_state, m))
        kernel = null_space(sp[:, sector])
        vecs = np.zeros((16, kernel.shape[1]))
        vecs[sector] = kernel
        # fix sign: first nonzero component positive
        for col in vecs.T:
            lead = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
            col *= np.sign(lead)
        return vecs

    def multiplet(top, size):
        states = [top]
        for _ in range(size - 1):
            nxt = sm @ states[-1]
            states.append(nxt / np.linalg.norm(nxt))
        return states

    quintet_top = np.zeros(16)
    quintet_top[0] = 1.0
    quintet = multiplet(quintet_top, 5)
    triplets = [multiplet(top, 3) for top in highest_weights(1).T]
    singlets = list(highest_weights(0).T)
    columns = (quintet + triplets[0] + triplets[1]
               + [singlets[0]] + triplets[2] + [singlets[1]])
    basis = np.column_stack(columns)
    basis.setflags(write=False)
    return basis


def n4_block_matrices(gamma: float, field: float) -> dict:
    """The A, B and C blocks of H_4 as closed-form 5x5 / 3x3 / 5x5 matrices."""
    u, v, h = gamma - 1.0, gamma + 1.0, field
    s6 = np.sqrt(6.0)
    a = -0.25 * np.array([
        [16 * h, 0, -s6 * u, 0, 0],
        [0, 3 * v + 8 * h, 0, -3 * u, 0],
        [-s6 * u, 0, 4 * v, 0, -s6 * u],
        [0, -3 * u, 0, 3 * v - 8 * h, 0],
        [0, 0, -s6 * u, 0, -16 * h],
    ])
    b = 0.25 * np.array([
        [v - 8 * h, 0, u],
        [0, 0, 0],
        [u, 0, v + 8 * h],
    ])
    c = 0.25 * np.array([
        [2 * v, 0, 0, 0, 0],
        [0, v - 8 * h, 0, u, 0],
        [0, 0, 0, 0, 0],
        [0, u, 0, v + 8 * h, 0],
        [0, 0, 0, 0, 2 * v],
    ])
    return {"A": a, "B": b, "C": c}


# symmetry-adapted basis ---------------------------------------------------

@lru_cache(maxsize=None)
def symmetry_adapted_basis(n_sites: int):
    """Orthogonal basis of simultaneous S_z and S^2 eigenvectors.

    Returns ``(basis, labels)``.  ``labels[k]`` encodes (parity of the number
    of down spins, 2S) of column k; H and both parameter derivatives are
    block diagonal in these labels, because they are built from collective
    spins and flip spins in pairs.  Each S_z sector is exact (a set of
    computational basis states), S^2 is diagonalized inside it.
    """
    n_sites = _check_sites(n_sites)
    dim = 2 ** n_sites
    s2 = sum(collective_spin(n_sites, a) @ collective_spin(n_sites, a) for a in "xyz").real
    n_down = (_spin_signs(n_sites) < 0).sum(axis=1)
    basis = np.zeros((dim, dim))
    labels = np.empty(dim, dtype=int)
    col = 0
    for k in range(n_sites + 1):
        idx = np.flatnonzero(n_down == k)
        w, v = np.linalg.eigh(s2[np.ix_(idx, idx)])
        two_s = np.rint(np.sqrt(1.0 + 4.0 * w) - 1.0).astype(int)
        cols = slice(col, col + len(idx))
        basis[idx, cols] = v
        labels[cols] = 2 * two_s + (k % 2)
        col += len(idx)
    basis.setflags(write=False)
    labels.setflags(write=False)
    return basis, labels


def project_to_sectors(op: np.ndarray, basis: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """``basis^T op basis`` with couplings between different sectors set to zero."""
    out = basis.T @ op @ basis
    out[labels[:, None] != labels[None, :]] = 0.0
    return out
