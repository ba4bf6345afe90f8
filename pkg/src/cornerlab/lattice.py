"""Driven 2D p_x + i p_y superconductor with dimerized y-couplings.

Builds the time-periodic Bogoliubov-de Gennes (BdG) matrix of the lattice
model in real space and momentum space, the decoupled 1D chain limit,
and the (anti)unitary symmetry checks.

Conventions
-----------
* Lattice is 2*Nx x 2*Ny sites, spacing 1. Row index j runs 1..2*Ny
  (1-based, as in the model definition); couplings alternate with
  (-1)**j between odd and even rows.
* Basis ordering of the BdG matrix: site-major with x fastest, then y;
  Nambu (particle, hole) innermost. Flat index = 2*(y*2*Nx + x) + nambu.
* H(t) = (1/2) Psi^dag h_BdG(t) Psi with Psi = (..., c_a, c_a^dag, ...),
  so the number term mu_j(t) c^dag c (after adding h.c. to mu_j/2 c^dag c)
  appears on the BdG diagonal with weight +/- mu_j(t).  The cosine drive
  therefore populates the m = +/-1 Fourier harmonics with weight
  (mu1 +/- dmu1)/2 each.
* Momentum space: 4x4 blocks, sublattice (sigma) outer, Nambu (eta)
  inner, so operators read as kron(sigma_i, eta_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

TWO_PI = 2.0 * np.pi

BOUNDARIES = ("open", "periodic-x", "periodic-y", "periodic-both")

# Pauli matrices; sigma acts on the y-sublattice, eta on Nambu space.
PAULI = {
    "0": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def sigma_eta(s: str, e: str) -> np.ndarray:
    """kron(sigma_s, eta_e) on the 4-dim (sublattice x Nambu) space."""
    return np.kron(PAULI[s], PAULI[e])


@dataclass(frozen=True)
class LatticeParams:
    """Couplings of the driven lattice model, in units of hbar/T.

    Jy and dJ (Dy and dDy) combine to the staggered y-hoppings (pairings)
    J_{y,j} = Jy + (-1)**j dJ and D_{y,j} = Dy + (-1)**j dDy.  The driven
    chemical potential is mu_j(t) = mu0 + (-1)**j dmu0
    + [mu1 + (-1)**j dmu1] cos(omega t).
    """

    Nx: int
    Ny: int
    Jx: float
    Jy: float
    dJ: float
    Dx: float
    Dy: float
    dDy: float
    mu0: float
    dmu0: float
    mu1: float
    dmu1: float
    omega: float = TWO_PI
    boundary: str = "open"

    def __post_init__(self):
        if self.Nx < 1 or self.Ny < 1:
            raise ValueError(f"need Nx, Ny >= 1, got {self.Nx}, {self.Ny}")
        if self.omega <= 0:
            raise ValueError(f"need omega > 0, got {self.omega}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")
        for name in ("Jx", "Jy", "dJ", "Dx", "Dy", "dDy",
                     "mu0", "dmu0", "mu1", "dmu1", "omega"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"coupling {name} is not finite: {v}")

    @property
    def shape(self) -> tuple[int, int]:
        """(Lx, Ly) = (2*Nx, 2*Ny) lattice extent in sites."""
        return 2 * self.Nx, 2 * self.Ny

    @property
    def pbc_x(self) -> bool:
        return self.boundary in ("periodic-x", "periodic-both")

    @property
    def pbc_y(self) -> bool:
        return self.boundary in ("periodic-y", "periodic-both")


def fig_s1_params(Nx: int = 8, Ny: int = 8, boundary: str = "open") -> LatticeParams:
    """The corner-mode benchmark parameter point (all couplings in hbar/T)."""
    return LatticeParams(
        Nx=Nx, Ny=Ny,
        Jx=np.pi / 2 + 0.3, Jy=0.15, dJ=0.05,
        Dx=np.pi / 2 - 0.2, Dy=0.55, dDy=0.45,
        mu0=np.pi / 2 + 0.12, dmu0=0.02, mu1=4.0, dmu1=0.0,
    )


class DrivenBdG:
    """Time-periodic BdG operator as a dict of Fourier harmonics.

    H(t) = sum_m harmonics[m] * exp(i m omega t).  Hermiticity of H(t)
    requires harmonics[-m] == harmonics[m]^dag, which is validated at
    construction.  Matrices are frozen (non-writeable views).
    """

    def __init__(self, harmonics: dict[int, np.ndarray], omega: float,
                 check: bool = True):
        if not harmonics:
            raise ValueError("need at least one harmonic")
        dims = {h.shape for h in harmonics.values()}
        if len(dims) != 1 or any(s[0] != s[1] for s in dims):
            raise ValueError(f"inconsistent harmonic shapes: {dims}")
        self.dim = next(iter(dims))[0]
        self.omega = float(omega)
        self._h = {}
        for m, mat in harmonics.items():
            arr = np.array(mat, dtype=complex)
            arr.setflags(write=False)
            self._h[int(m)] = arr
        if check:
            for m in self._h:
                partner = self._h.get(-m)
                if partner is None:
                    raise ValueError(f"harmonic {-m} missing for harmonic {m}")
                if not np.allclose(self._h[m].conj().T, partner, atol=1e-12):
                    raise ValueError(f"harmonics {m}/{-m} are not mutually adjoint")

    @property
    def harmonics(self) -> dict[int, np.ndarray]:
        return dict(self._h)

    def component(self, m: int) -> np.ndarray:
        """Fourier component h^(m); zero matrix if absent."""
        h = self._h.get(m)
        if h is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return h

    @property
    def max_harmonic(self) -> int:
        return max(abs(m) for m in self._h)

    def at_time(self, t: float) -> np.ndarray:
        """Instantaneous matrix H(t)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for m, h in self._h.items():
            out += h * np.exp(1j * m * self.omega * t)
        return out

    def __repr__(self):
        ms = sorted(self._h)
        return f"DrivenBdG(dim={self.dim}, harmonics={ms}, omega={self.omega:g})"

    def save_npz(self, path) -> None:
        """Export as dense complex arrays: one `h_<m>` entry per harmonic
        plus the scalar `omega` (numpy .npz layout)."""
        payload = {f"h_{m}": np.asarray(h) for m, h in self._h.items()}
        payload["omega"] = np.array(self.omega)
        np.savez(path, **payload)

    @classmethod
    def load_npz(cls, path) -> "DrivenBdG":
        with np.load(path) as data:
            omega = float(data["omega"])
            harmonics = {int(k[2:]): data[k] for k in data.files if k != "omega"}
        return cls(harmonics, omega)


@dataclass(frozen=True)
class SymmetryOp:
    """A symmetry acting on the 4-dim momentum-space BdG blocks.

    The defining relation checked by `check_symmetry` is
        U h^*(k)? U^dag = sign * h(flip * k)
    applied per time-Fourier harmonic (antiunitary kinds conjugate the
    matrix and send harmonic m -> -m before comparing).
    """

    kind: str
    matrix: np.ndarray
    antiunitary: bool
    sign: int          # +1 commuting-type, -1 anticommuting-type
    flips_k: bool      # whether the relation compares against h(-k)

    def __post_init__(self):
        u = self.matrix
        if not np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12):
            raise ValueError(f"{self.kind}: matrix is not unitary")


def symmetry_op(kind: str) -> SymmetryOp:
    """The model's symmetry operators: particle-hole P = eta_x K,
    chiral C = sigma_z eta_x, time-reversal T = sigma_z K,
    inversion I = sigma_x eta_z."""
    table = {
        "particle-hole": SymmetryOp("particle-hole", sigma_eta("0", "x"),
                                    antiunitary=True, sign=-1, flips_k=True),
        "chiral": SymmetryOp("chiral", sigma_eta("z", "x"),
                             antiunitary=False, sign=-1, flips_k=False),
        "time-reversal": SymmetryOp("time-reversal", sigma_eta("z", "0"),
                                    antiunitary=True, sign=+1, flips_k=True),
        "inversion": SymmetryOp("inversion", sigma_eta("x", "z"),
                                antiunitary=False, sign=+1, flips_k=True),
    }
    if kind not in table:
        raise ValueError(f"unknown symmetry kind {kind!r}")
    return table[kind]


def _bdg_from_blocks(T: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Interleave hopping block T and pairing block P into the Nambu-innermost
    BdG matrix [[T, P], [-P*, -T*]] (per site pair)."""
    n = T.shape[0]
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    h[0::2, 0::2] = T
    h[0::2, 1::2] = P
    h[1::2, 0::2] = -P.conj()
    h[1::2, 1::2] = -T.conj()
    return h


def build_realspace_bdg(params: LatticeParams) -> DrivenBdG:
    """First-quantized BdG Fourier components of the driven 2D model.

    Static couplings populate h^(0); the cosine drive populates h^(+-1)
    with half weight each.  dim = 2 * (2*Nx) * (2*Ny).
    """
    Lx, Ly = params.shape
    ns = Lx * Ly
    T0 = np.zeros((ns, ns), dtype=complex)
    T1 = np.zeros((ns, ns), dtype=complex)
    P0 = np.zeros((ns, ns), dtype=complex)

    def idx(x: int, y: int) -> int:
        return y * Lx + x

    for y in range(Ly):
        j = y + 1
        sgn = -1 if j % 2 else 1
        mu_static = params.mu0 + sgn * params.dmu0
        mu_drive = (params.mu1 + sgn * params.dmu1) / 2.0
        Jyj = params.Jy + sgn * params.dJ
        Dyj = params.Dy + sgn * params.dDy
        for x in range(Lx):
            a = idx(x, y)
            T0[a, a] += mu_static
            T1[a, a] += mu_drive
            if x + 1 < Lx or params.pbc_x:
                b = idx((x + 1) % Lx, y)
                T0[b, a] += -params.Jx
                T0[a, b] += -params.Jx
                P0[b, a] += params.Dx
                P0[a, b] += -params.Dx
            if y + 1 < Ly or params.pbc_y:
                b = idx(x, (y + 1) % Ly)
                T0[b, a] += -Jyj
                T0[a, b] += -Jyj
                P0[b, a] += 1j * Dyj
                P0[a, b] += -1j * Dyj

    h0 = _bdg_from_blocks(T0, P0)
    h1 = _bdg_from_blocks(T1, np.zeros_like(P0))
    return DrivenBdG({0: h0, 1: h1, -1: h1.conj().T}, params.omega)


def build_momentum_bdg(params: LatticeParams, kx: float, ky: float) -> DrivenBdG:
    """4x4 Bloch BdG Fourier components at momentum (kx, ky).

    h(k, t) = [-(J_{y,-} + J_{y,+} cos ky) sx - J_{y,+} sin ky sy
               - 2 Jx cos kx + mu0 + mu1 cos wt
               + (dmu0 + dmu1 cos wt) sz] ez
              + [(D_{y,-} - D_{y,+} cos ky) sy + D_{y,+} sin ky sx] ex
              + 2 Dx sin kx ey
    with s (e) the sublattice (Nambu) Paulis.
    """
    jyp = params.Jy + params.dJ
    jym = params.Jy - params.dJ
    dyp = params.Dy + params.dDy
    dym = params.Dy - params.dDy

    h0 = (
        -(jym + jyp * np.cos(ky)) * sigma_eta("x", "z")
        - jyp * np.sin(ky) * sigma_eta("y", "z")
        - 2 * params.Jx * np.cos(kx) * sigma_eta("0", "z")
        + params.mu0 * sigma_eta("0", "z")
        + params.dmu0 * sigma_eta("z", "z")
        + (dym - dyp * np.cos(ky)) * sigma_eta("y", "x")
        + dyp * np.sin(ky) * sigma_eta("x", "x")
        + 2 * params.Dx * np.sin(kx) * sigma_eta("0", "y")
    )
    h1 = (params.mu1 * sigma_eta("0", "z") + params.dmu1 * sigma_eta("z", "z")) / 2.0
    return DrivenBdG({0: h0, 1: h1, -1: h1.conj().T}, params.omega)


def momentum_grid(params: LatticeParams) -> list[tuple[float, float]]:
    """Bloch momenta matching the periodic lattice: 2*Nx values of kx and
    Ny values of ky (the y unit cell holds two sites), each in (-pi, pi]."""
    def wrap(k):
        return k - TWO_PI * np.floor(k / TWO_PI + 0.5) if k != np.pi else k

    kxs = [wrap(TWO_PI * m / (2 * params.Nx)) for m in range(2 * params.Nx)]
    kys = [wrap(TWO_PI * m / params.Ny) for m in range(params.Ny)]
    return [(kx, ky) for kx in kxs for ky in kys]


def check_symmetry(
    params: LatticeParams,
    sym: SymmetryOp,
    kgrid: Iterable[tuple[float, float]] | None = None,
    builder: Callable[[LatticeParams, float, float], DrivenBdG] = build_momentum_bdg,
) -> float:
    """Max residual of the symmetry relation over the k-grid and harmonics.

    For unitary kinds the relation per harmonic m is
        U h^(m)(k) U^dag - sign * h^(m)(k')
    and for antiunitary kinds (conjugation maps m -> -m)
        U [h^(-m)(k)]^* U^dag - sign * h^(m)(k')
    with k' = -k when the symmetry flips momentum.
    """
    if kgrid is None:
        vals = np.linspace(-np.pi, np.pi, 7, endpoint=False) + 0.211
        kgrid = [(kx, ky) for kx in vals for ky in vals]
    u = sym.matrix
    worst = 0.0
    for kx, ky in kgrid:
        bdg_k = builder(params, kx, ky)
        target = builder(params, -kx, -ky) if sym.flips_k else bdg_k
        ms = sorted(set(bdg_k.harmonics) | set(target.harmonics))
        for m in ms:
            if sym.antiunitary:
                lhs = u @ bdg_k.component(-m).conj() @ u.conj().T
            else:
                lhs = u @ bdg_k.component(m) @ u.conj().T
            resid = np.linalg.norm(lhs - sym.sign * target.component(m), ord=2)
            worst = max(worst, float(resid))
    return worst


def kitaev_chain_bdg(
    n_sites: int,
    J: float,
    Delta: float,
    mu0: float,
    mu1: float,
    omega: float = TWO_PI,
) -> DrivenBdG:
    """Driven Kitaev chain BdG: hopping -J, pairing Delta, on-site
    mu(t) = mu0 + mu1 cos(omega t), open ends; dim = 2*n_sites."""
    T0 = np.zeros((n_sites, n_sites), dtype=complex)
    P0 = np.zeros((n_sites, n_sites), dtype=complex)
    for x in range(n_sites):
        T0[x, x] = mu0
        if x + 1 < n_sites:
            T0[x + 1, x] = T0[x, x + 1] = -J
            P0[x + 1, x] = Delta
            P0[x, x + 1] = -Delta
    h0 = _bdg_from_blocks(T0, P0)
    h1 = _bdg_from_blocks((mu1 / 2.0) * np.eye(n_sites, dtype=complex),
                          np.zeros_like(P0))
    return DrivenBdG({0: h0, 1: h1, -1: h1.conj().T}, omega)


def reduce_to_1d(params: LatticeParams, atol: float = 1e-12) -> DrivenBdG:
    """1D chain BdG of the decoupled j = 1 row (requires Jy = dJ, Dy = dDy).

    At the decoupling point the odd rows j = 1 and j = 2*Ny detach from the
    bulk; the returned chain is exactly the j = 1 row block of the 2D model:
    hopping -Jx, pairing Dx, drive mu_1(t) = mu0 - dmu0 + (mu1 - dmu1) cos wt.
    """
    if abs(params.Jy - params.dJ) > atol or abs(params.Dy - params.dDy) > atol:
        raise ValueError(
            "decoupling requires Jy == dJ and Dy == dDy; got "
            f"Jy-dJ={params.Jy - params.dJ:.3e}, Dy-dDy={params.Dy - params.dDy:.3e}"
        )
    return kitaev_chain_bdg(
        2 * params.Nx,
        J=params.Jx,
        Delta=params.Dx,
        mu0=params.mu0 - params.dmu0,
        mu1=params.mu1 - params.dmu1,
        omega=params.omega,
    )


def row_block(bdg: DrivenBdG, params: LatticeParams, j: int) -> DrivenBdG:
    """Extract the BdG harmonics restricted to row j (1-based) of the lattice."""
    Lx, Ly = params.shape
    if not 1 <= j <= Ly:
        raise ValueError(f"row {j} outside 1..{Ly}")
    y = j - 1
    sites = [y * Lx + x for x in range(Lx)]
    sel = np.array([2 * s + n for s in sites for n in (0, 1)])
    return DrivenBdG(
        {m: h[np.ix_(sel, sel)] for m, h in bdg.harmonics.items()},
        bdg.omega,
    )
