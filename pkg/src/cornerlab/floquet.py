"""Sambe-space quasienergy solver and Majorana corner-mode extraction.

The extended-space (Sambe) matrix has blocks
    [H]_{nm} = h^(n-m) + n * omega * delta_{nm} * 1,
n, m = -M..M.  Diagonalizing it gives each physical quasienergy once per
replica shift by omega; physical representatives are selected by dominant
harmonic weight (argmax over n, ties broken towards small |n|), which keeps
exactly `blockdim` states.

Species windows: a mode is `zero` if its folded quasienergy lies within
tol_zero of 0, and `pi` if it lies within tol_pi of +-omega/2 on the
quasienergy circle.  Pi modes are re-represented at the +omega/2 boundary
(replica-shifting their harmonics by round((omega/2 - eps_raw)/omega)),
which aligns all members of a pi cluster to a common harmonic ladder; this
alignment is what makes the corner-basis rotation meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cornerlab.lattice import DrivenBdG


@dataclass(frozen=True)
class SambeMatrix:
    """Assembled extended-space matrix with cutoff M (blocks n = -M..M)."""

    m_cutoff: int
    blockdim: int
    omega: float
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return (2 * self.m_cutoff + 1) * self.blockdim


@dataclass
class FloquetMode:
    """One quasienergy solution with harmonic-resolved spatial amplitudes.

    components[i] is the spatial vector of harmonic n = i - m_cutoff; the
    total weight sums to 1.  For species 'pi' the quasienergy is reported
    at the +omega/2 boundary representative (it may exceed omega/2 by up
    to the species tolerance).
    """

    quasienergy: float
    components: np.ndarray   # shape (2M+1, blockdim)
    species: str             # "zero" | "pi" | "bulk"
    omega: float

    @property
    def m_cutoff(self) -> int:
        return (self.components.shape[0] - 1) // 2

    def harmonic(self, n: int) -> np.ndarray:
        return self.components[n + self.m_cutoff]

    def norm_sq(self) -> float:
        return float((np.abs(self.components) ** 2).sum())


@dataclass
class SpectrumResult:
    """Folded quasienergy spectrum plus the modes near 0 and +-omega/2."""

    quasienergies: np.ndarray          # sorted, folded to (-omega/2, omega/2]
    modes: list[FloquetMode]
    gaps: tuple[float, float]          # (gap around 0, gap around omega/2)
    omega: float
    tol_zero: float
    tol_pi: float

    def modes_of(self, species: str) -> list[FloquetMode]:
        return [m for m in self.modes if m.species == species]

    def counts(self) -> dict[str, int]:
        return {s: len(self.modes_of(s)) for s in ("zero", "pi")}


def assemble_sambe(bdg: DrivenBdG, M: int) -> SambeMatrix:
    """Block-assemble the Sambe matrix for harmonic cutoff M >= 1."""
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if bdg.max_harmonic > 2 * M:
        raise ValueError("cutoff M too small for the harmonic content")
    d = bdg.dim
    D = (2 * M + 1) * d
    H = np.zeros((D, D), dtype=complex)
    for n in range(-M, M + 1):
        rn = (n + M) * d
        for m in range(-M, M + 1):
            h = bdg.harmonics.get(n - m)
            if h is None and n != m:
                continue
            cm = (m + M) * d
            blk = h if h is not None else 0.0
            H[rn:rn + d, cm:cm + d] = blk
            if n == m:
                H[rn:rn + d, cm:cm + d] += n * bdg.omega * np.eye(d)
    return SambeMatrix(m_cutoff=M, blockdim=d, omega=bdg.omega, matrix=H)


def fold(eps: np.ndarray | float, omega: float) -> np.ndarray | float:
    """Fold quasienergies into (-omega/2, omega/2], boundary at +omega/2."""
    e = np.asarray(eps, dtype=float)
    out = e - omega * np.floor(e / omega + 0.5)
    out = np.where(out <= -omega / 2 + 1e-14 * omega, out + omega, out)
    if np.isscalar(eps):
        return float(out)
    return out


def circular_distance(eps, target, omega):
    """Distance between quasienergies on the circle of circumference omega."""
    d = np.asarray(eps, dtype=float) - target
    return np.abs(d - omega * np.round(d / omega))


def _dominant_harmonic(weights: np.ndarray, M: int) -> int:
    """argmax over harmonics; near-ties (within 1e-12) resolved to small |n|."""
    top = weights.max()
    cand = np.nonzero(weights >= top - 1e-12)[0]
    best = min(cand, key=lambda i: (abs(i - M), i - M))
    return int(best - M)


def _shift_components(comp: np.ndarray, k: int) -> np.ndarray:
    """Replica shift by k: new^(n) = old^(n-k); the weight truncated at the
    cutoff (at most the outermost harmonic's) is restored by renormalizing."""
    if k == 0:
        return comp.copy()
    out = np.zeros_like(comp)
    if k > 0:
        out[k:] = comp[:-k]
    else:
        out[:k] = comp[-k:]
    return out / np.sqrt((np.abs(out) ** 2).sum())


def quasienergy_spectrum(
    sambe: SambeMatrix,
    tol_zero: float | None = None,
    tol_pi: float | None = None,
) -> SpectrumResult:
    """Diagonalize, fold, deduplicate replicas, and package Majorana modes.

    Mode tolerances default to 1e-3 * omega.  Eigenvectors are kept only
    for states inside the zero/pi windows; pi modes are aligned to the
    +omega/2 representative via their raw (unfolded) eigenvalue.
    """
    w = sambe.omega
    if tol_zero is None:
        tol_zero = 1e-3 * w
    if tol_pi is None:
        tol_pi = 1e-3 * w
    M, d = sambe.m_cutoff, sambe.blockdim
    try:
        evals, evecs = np.linalg.eigh(sambe.matrix)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Sambe eigensolver failed: {exc}") from exc

    folded = []
    modes = []
    for i in range(evals.size):
        comp = evecs[:, i].reshape(2 * M + 1, d)
        wts = (np.abs(comp) ** 2).sum(axis=1)
        if _dominant_harmonic(wts, M) != 0:
            continue
        raw = float(evals[i])
        eps = float(fold(raw, w))
        folded.append(eps)
        if abs(eps) <= tol_zero:
            k = int(round((0.0 - raw) / w))
            modes.append(FloquetMode(raw + k * w, _shift_components(comp, k),
                                     "zero", w))
        elif circular_distance(eps, w / 2, w) <= tol_pi:
            k = int(round((w / 2 - raw) / w))
            modes.append(FloquetMode(raw + k * w, _shift_components(comp, k),
                                     "pi", w))

    folded = np.sort(np.array(folded))
    zero_d = np.sort(np.abs(folded))
    pi_d = np.sort(circular_distance(folded, w / 2, w))
    n0 = sum(1 for m in modes if m.species == "zero")
    npi = len(modes) - n0
    gap0 = float(zero_d[n0]) if n0 < folded.size else np.inf
    gappi = float(pi_d[npi]) if npi < folded.size else np.inf
    return SpectrumResult(
        quasienergies=folded,
        modes=modes,
        gaps=(gap0, gappi),
        omega=w,
        tol_zero=tol_zero,
        tol_pi=tol_pi,
    )


def find_majorana_modes(
    spec: SpectrumResult, tol_zero: float | None = None, tol_pi: float | None = None
) -> list[FloquetMode]:
    """Modes tagged zero/pi within the requested tolerances.

    Tolerances can only be tightened relative to the windows used when the
    spectrum was computed (eigenvectors outside those were not retained).
    """
    t0 = spec.tol_zero if tol_zero is None else tol_zero
    tpi = spec.tol_pi if tol_pi is None else tol_pi
    if t0 > spec.tol_zero or tpi > spec.tol_pi:
        raise ValueError("cannot widen tolerances beyond the captured windows")
    out = []
    for m in spec.modes:
        if m.species == "zero" and abs(m.quasienergy) <= t0:
            out.append(m)
        elif m.species == "pi" and circular_distance(
                m.quasienergy, spec.omega / 2, spec.omega) <= tpi:
            out.append(m)
    return out


def _site_probability(mode: FloquetMode) -> np.ndarray:
    """Per-site probability, summed over harmonics and the Nambu pair."""
    p = (np.abs(mode.components) ** 2).sum(axis=0)
    return p[0::2] + p[1::2]


def _quadrant_values(shape: tuple[int, int]) -> np.ndarray:
    """Site -> quadrant label (0..3): x-half + 2 * y-half."""
    Lx, Ly = shape
    q = np.zeros(Lx * Ly)
    for s in range(Lx * Ly):
        x, y = s % Lx, s // Lx
        q[s] = (1 if x >= Lx // 2 else 0) + 2 * (1 if y >= Ly // 2 else 0)
    return q


def corner_basis_rotation(
    modes: list[FloquetMode], shape: tuple[int, int]
) -> list[FloquetMode]:
    """Rotate a (near-)degenerate cluster to corner-localized representatives.

    Diagonalizes the position-quadrant weight matrix
        Q_ab = sum_n <psi_a^(n)| diag(quadrant) |psi_b^(n)>
    within the cluster.  All cluster members must share a species (their
    harmonics are then aligned to a common ladder by construction).
    Quasienergies of the rotated modes are expectation values of the
    cluster's diagonal quasienergy matrix in the rotated basis.
    """
    if not modes:
        return []
    species = {m.species for m in modes}
    if len(species) > 1:
        raise ValueError(f"cluster mixes species {species}")
    Lx, Ly = shape
    d = modes[0].components.shape[1]
    if d != 2 * Lx * Ly:
        raise ValueError(f"shape {shape} does not match blockdim {d}")
    qv = _quadrant_values(shape)
    k = len(modes)
    Q = np.zeros((k, k), dtype=complex)
    for a in range(k):
        for b in range(k):
            acc = 0.0
            for n in range(modes[0].components.shape[0]):
                va = modes[a].components[n]
                vb = modes[b].components[n]
                dens = va.conj()[0::2] * vb[0::2] + va.conj()[1::2] * vb[1::2]
                acc += (qv * dens).sum()
            Q[a, b] = acc
    _, U = np.linalg.eigh((Q + Q.conj().T) / 2)
    eps = np.array([m.quasienergy for m in modes])
    out = []
    for c in range(k):
        comp = sum(U[a, c] * modes[a].components for a in range(k))
        comp = comp / np.sqrt((np.abs(comp) ** 2).sum())
        e_rot = float(np.abs(U[:, c]) ** 2 @ eps)
        out.append(FloquetMode(e_rot, comp, modes[0].species, modes[0].omega))
    return out


def corner_localization(
    mode: FloquetMode, corner_frac: float, shape: tuple[int, int]
) -> np.ndarray:
    """Probability weight in the four corner blocks of side
    corner_frac*Lx x corner_frac*Ly, ordered (x-low,y-low), (x-high,y-low),
    (x-low,y-high), (x-high,y-high)."""
    if not 0 < corner_frac <= 0.5:
        raise ValueError(f"corner_frac must be in (0, 0.5], got {corner_frac}")
    Lx, Ly = shape
    site_p = _site_probability(mode)
    if site_p.size != Lx * Ly:
        raise ValueError(f"shape {shape} does not match mode size {site_p.size}")
    wx = max(1, int(round(corner_frac * Lx)))
    wy = max(1, int(round(corner_frac * Ly)))
    grid = site_p.reshape(Ly, Lx)
    weights = []
    for cy in (0, 1):
        for cx in (0, 1):
            xs = slice(Lx - wx, Lx) if cx else slice(0, wx)
            ys = slice(Ly - wy, Ly) if cy else slice(0, wy)
            weights.append(float(grid[ys, xs].sum()))
    # reorder to (low,low), (high,low), (low,high), (high,high)
    return np.array(weights)


def fourier_weight_profile(mode: FloquetMode) -> dict[int, float]:
    """Harmonic-resolved weights ||psi^(n)||^2, summing to 1."""
    M = mode.m_cutoff
    w = (np.abs(mode.components) ** 2).sum(axis=1)
    return {n - M: float(w[n]) for n in range(2 * M + 1)}


def _window_eigs(evals: np.ndarray, omega: float, count: int) -> np.ndarray:
    """The `count` folded eigenvalues closest to 0 and to omega/2, sorted
    by circular distance within each window and concatenated."""
    near0 = np.sort(np.abs(evals))[:count]
    nearpi = np.sort(circular_distance(evals, omega / 2, omega))[:count]
    return np.concatenate([near0, nearpi])


def convergence_check(bdg: DrivenBdG, M: int, count: int = 16) -> float:
    """Max shift of the `count` physical quasienergies nearest 0 and
    omega/2 between cutoffs M-1 and M (replica-deduplicated, matched by
    sorted order within each window)."""
    if M < 2:
        raise ValueError(f"need M >= 2, got {M}")
    a = quasienergy_spectrum(assemble_sambe(bdg, M - 1)).quasienergies
    b = quasienergy_spectrum(assemble_sambe(bdg, M)).quasienergies
    n = min(count, a.size)
    wa = _window_eigs(a, bdg.omega, n)
    wb = _window_eigs(b, bdg.omega, n)
    return float(np.abs(wa - wb).max())
