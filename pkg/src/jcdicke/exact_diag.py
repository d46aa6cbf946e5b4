"""Finite-N exact diagonalization of the extended JC-Dicke Hamiltonian.

    H = omega_a a^+a + omega_b J_z + (eta/N) J_z^2
        + (lam/sqrt(N)) (a J_+ + a^+ J_-) + Omega (J_+ + J_-)

is represented in the truncated product basis ``|n, m>`` with photon number
``n = 0..n_max`` and collective spin projection ``m = -j..j``, ``j = N/2``.
Basis states are ordered photon-major: ``index = n*(N + 1) + (m + j)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh
from scipy.special import gammaln

from .exceptions import CutoffError, DimensionCap, NonConverged
from .meanfield import solve_model, total_energy_per_atom
from .params import ModelParams

DEFAULT_MAX_DIM = 20_000
DENSE_LIMIT = 1_000
CONVERGENCE_TOL = 1e-9
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class EDBasis:
    N: int
    n_max: int

    def __post_init__(self):
        if self.n_max < 0:
            raise CutoffError(f"photon cutoff must be non-negative, got {self.n_max}")

    @property
    def j(self) -> float:
        return 0.5 * self.N

    @property
    def spin_dim(self) -> int:
        return self.N + 1

    @property
    def dimension(self) -> int:
        return (self.n_max + 1) * (self.N + 1)

    def index(self, n: int, m: float) -> int:
        k = int(round(m + self.j))
        if not (0 <= n <= self.n_max and 0 <= k <= self.N and abs(k - self.j - m) < 1e-9):
            raise IndexError(f"|n={n}, m={m}> is not in the basis")
        return n * self.spin_dim + k

    def state(self, index: int) -> tuple[int, float]:
        if not 0 <= index < self.dimension:
            raise IndexError(index)
        n, k = divmod(index, self.spin_dim)
        return n, k - self.j

    def quantum_numbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Photon number and ``m`` of every basis state, in index order."""
        n = np.repeat(np.arange(self.n_max + 1), self.spin_dim)
        m = np.tile(np.arange(self.spin_dim) - self.j, self.n_max + 1)
        return n, m


def raising_coefficient(j: float, m) -> np.ndarray:
    """``<m+1|J_+|m> = sqrt(j(j+1) - m(m+1))``."""
    m = np.asarray(m, dtype=float)
    return np.sqrt(np.maximum(j * (j + 1.0) - m * (m + 1.0), 0.0))


def build_hamiltonian(params: ModelParams, n_max: int) -> sp.csr_matrix:
    """Sparse real symmetric Hamiltonian in the truncated basis."""
    basis = EDBasis(params.N, n_max)
    N, j, d = params.N, basis.j, basis.dimension
    n, m = basis.quantum_numbers()
    idx = np.arange(d)

    rows = [idx]
    cols = [idx]
    vals = [params.omega_a * n + params.omega_b * m + (params.eta / N) * m * m]

    k = idx % basis.spin_dim
    up = k < N  # J_+ acts non-trivially
    cp = raising_coefficient(j, m)

    if params.Omega != 0.0:
        src = idx[up]
        rows.append(src + 1)
        cols.append(src)
        vals.append(params.Omega * cp[up])

    if params.lam != 0.0 and n_max > 0:
        # a J_+ : |n, m> -> sqrt(n) C+(j, m) |n-1, m+1>
        sel = up & (n > 0)
        src = idx[sel]
        rows.append(src - basis.spin_dim + 1)
        cols.append(src)
        vals.append(params.lam / math.sqrt(N) * np.sqrt(n[sel]) * cp[sel])

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    off = r != c
    r, c, v = (np.concatenate([r, c[off]]), np.concatenate([c, r[off]]),
               np.concatenate([v, v[off]]))
    return sp.csr_matrix((v, (r, c)), shape=(d, d))


def excitation_number(basis: EDBasis) -> np.ndarray:
    """Eigenvalue of ``a^+a + J_z + j`` on each basis state."""
    n, m = basis.quantum_numbers()
    return n + np.rint(m + basis.j).astype(int)


@dataclass(frozen=True)
class EDResult:
    N: int
    energy_per_atom: float
    jz_per_atom: float
    photons_per_atom: float
    n_max_used: int
    converged: bool
    ground_degenerate: bool
    gap: float


def _lowest_pair(H: sp.csr_matrix, dense_limit: int):
    d = H.shape[0]
    if d <= 64:
        evals, evecs = np.linalg.eigh(H.toarray())
        return evals[:2], evecs[:, 0], evals[-1] - evals[0]
    if d < dense_limit:
        evals, evecs = scipy.linalg.eigh(H.toarray(), subset_by_index=[0, 1])
    else:
        v0 = np.ones(d) / math.sqrt(d)
        evals, evecs = eigsh(H, k=2, which="SA", v0=v0, tol=0.0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    v0 = np.ones(d) / math.sqrt(d)
    top = eigsh(H, k=1, which="LA", v0=v0, tol=1e-6, return_eigenvectors=False)[0]
    return evals, evecs[:, 0], top - evals[0]


def _solve_at(params: ModelParams, n_max: int, dense_limit: int):
    basis = EDBasis(params.N, n_max)
    H = build_hamiltonian(params, n_max)
    evals, psi, width = _lowest_pair(H, dense_limit)
    prob = psi * psi
    n, m = basis.quantum_numbers()
    gap = float(evals[1] - evals[0])
    return {
        "energy": float(evals[0]) / params.N,
        "jz": float(prob @ m) / params.N,
        "photons": float(prob @ n) / params.N,
        "gap": gap,
        "degenerate": gap < DEGENERACY_TOL * max(width, 1e-300),
    }


def initial_cutoff(params: ModelParams) -> int:
    """Photon cutoff guess from the mean-field photon number ``N alpha**2``."""
    alpha = solve_model(params).alpha
    occ = params.N * alpha * alpha
    return int(math.ceil(4.0 * occ + 10.0 * math.sqrt(occ + 1.0) + 10.0))


def ground_state(params: ModelParams, n_max: int | None = None, *,
                 max_dim: int = DEFAULT_MAX_DIM, dense_limit: int = DENSE_LIMIT,
                 tol: float = CONVERGENCE_TOL) -> EDResult:
    """Ground state of the finite-N Hamiltonian.

    Without ``n_max`` the cutoff is chosen from the mean-field photon number
    and doubled until ``E0/N`` changes by less than ``tol * max(1, |E0/N|)``.
    With an explicit ``n_max`` the result is taken at that cutoff and
    ``converged`` reports whether doubling it would change the energy within
    ``tol`` (``False`` if the doubled basis exceeds ``max_dim``).
    """
    spin_dim = params.N + 1
    auto = n_max is None
    cutoff = initial_cutoff(params) if auto else int(n_max)
    if cutoff < 0:
        raise CutoffError(f"photon cutoff must be non-negative, got {cutoff}")
    if (cutoff + 1) * spin_dim > max_dim:
        raise DimensionCap(f"dimension {(cutoff + 1) * spin_dim} exceeds cap {max_dim}")

    current = _solve_at(params, cutoff, dense_limit)
    converged = False
    while True:
        doubled = max(2 * cutoff, 1)
        if (doubled + 1) * spin_dim > max_dim:
            if auto:
                raise NonConverged(
                    f"cutoff doubling to {doubled} exceeds dimension cap {max_dim}"
                )
            break
        nxt = _solve_at(params, doubled, dense_limit)
        change = abs(nxt["energy"] - current["energy"])
        converged = change < tol * max(1.0, abs(nxt["energy"]))
        if not auto:
            break
        cutoff, current = doubled, nxt
        if converged:
            break

    return EDResult(
        N=params.N,
        energy_per_atom=current["energy"],
        jz_per_atom=current["jz"],
        photons_per_atom=current["photons"],
        n_max_used=cutoff,
        converged=converged,
        ground_degenerate=bool(current["degenerate"]),
        gap=current["gap"],
    )


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    energy_ed: float
    energy_mf: float
    gap: float
    n_max: int
    converged: bool


def convergence_study(params: ModelParams, N_list: Iterable[int], **kwargs) -> list[ConvergenceRow]:
    """``|E_ED/N - E_mf|`` for each atom number, other parameters held fixed.

    The collective parameters ``eta`` and ``lam`` are kept constant, which is
    the scaling under which the mean-field energy is the large-N limit.
    """
    e_mf = total_energy_per_atom(params)
    rows = []
    for N in N_list:
        res = ground_state(replace(params, N=int(N)), **kwargs)
        rows.append(ConvergenceRow(int(N), res.energy_per_atom, e_mf,
                                   abs(res.energy_per_atom - e_mf), res.n_max_used,
                                   res.converged))
    return rows


def coherent_state(params: ModelParams, n_max: int, beta: float, alpha: float) -> np.ndarray:
    """Product of a photon coherent state and a spin coherent state.

    The photon amplitude is ``sqrt(N) alpha``; the spin state puts a fraction
    ``beta**2`` of atoms in the upper level with transverse phase chosen so
    that ``<J_+> = -N beta sqrt(1 - beta**2)``, matching the displaced
    boson ``<b> = -sqrt(N) beta``. The photon part is renormalized on the
    truncated space.
    """
    N = params.N
    n = np.arange(n_max + 1)
    amp = math.sqrt(N) * alpha
    if amp == 0.0:
        photon = (n == 0).astype(float)
    else:
        log_mag = n * math.log(abs(amp)) - 0.5 * gammaln(n + 1)
        photon = np.exp(log_mag - log_mag.max()) * np.sign(amp) ** n
    photon /= np.linalg.norm(photon)

    k = np.arange(N + 1)  # number of excited atoms, m = k - N/2
    b = -beta
    c = math.sqrt(max(1.0 - beta * beta, 0.0))
    log_binom = 0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1))
    with np.errstate(divide="ignore"):
        log_mag = log_binom + k * np.log(abs(b)) + (N - k) * np.log(c)
    spin = np.where(np.isfinite(log_mag), np.exp(log_mag - np.max(log_mag)), 0.0)
    spin *= np.sign(b) ** k if b != 0 else 1.0
    spin /= np.linalg.norm(spin)
    return np.kron(photon, spin)


def coherent_energy_per_atom(params: ModelParams, n_max: int) -> float:
    """Variational energy per atom of the mean-field coherent state."""
    sol = solve_model(params)
    psi = coherent_state(params, n_max, sol.beta, sol.alpha)
    H = build_hamiltonian(params, n_max)
    return float(psi @ (H @ psi)) / params.N


def write_coo(path, H: sp.spmatrix) -> None:
    """Write ``H`` as a coordinate list.

    Format: a header line ``# dimension <d> nnz <k>``, then one line per
    stored entry ``row col value`` (0-based indices, value with 17
    significant digits), sorted by row then column.
    """
    coo = sp.coo_matrix(H)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# dimension {coo.shape[0]} nnz {coo.nnz}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")


def read_coo(path) -> sp.csr_matrix:
    with open(path) as fh:
        header = fh.readline().split()
        d = int(header[2])
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        return sp.csr_matrix((d, d))
    return sp.csr_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                         shape=(d, d))
