"""Floquet degenerate perturbation theory and its lead-Majorana applications.

Three layers:

1. Generic machinery on any time-periodic Hermitian problem, phrased in
   Sambe space: quasienergy corrections through third order for states
   with no internal first-order matrix elements (the textbook formula with
   time-averaged inner products), and a quasi-degenerate effective block
   (Van Vleck form) that also tolerates first-order internal structure.

2. Lead-Majorana effective couplings: the co-tunneling amplitudes
   T^(00), T^(pipi), T^(0pi) between two single-level leads mediated by a
   nonlocal fermion, and the four-lead third-order amplitude h1234; plus
   exact toy Fock models (leads x Majoranas x a 3-state particle-number
   register) used as oracles for both.

3. The harmonically-driven mode expansion: nested-commutator construction
   of zero and pi Majorana operators order by order in 1/omega, with the
   Sambe-norm residual history.

Conventions: couplings are Fourier components on the omega/2 grid,
lambda(t) = sum_n lam[n] * exp(i n omega t / 2); eps_plus/eps_minus are
the quasienergy differences eps_N - eps_{N+-1} (the toy register places
the N+-1 levels at -eps_+-).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from cornerlab import fock
from cornerlab.floquet import assemble_sambe, fold
from cornerlab.lattice import DrivenBdG

TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------
# generic Floquet perturbation theory
# --------------------------------------------------------------------------

def sambe_lift(harmonics: dict[int, np.ndarray], M: int) -> np.ndarray:
    """Block matrix [V]_{nm} = v^(n-m) without any diagonal n*omega term."""
    dims = {h.shape[0] for h in harmonics.values()}
    d = dims.pop()
    D = (2 * M + 1) * d
    out = np.zeros((D, D), dtype=complex)
    for n in range(-M, M + 1):
        for m in range(-M, M + 1):
            h = harmonics.get(n - m)
            if h is not None:
                out[(n + M) * d:(n + M + 1) * d, (m + M) * d:(m + M + 1) * d] = h
    return out


@dataclass
class PerturbationProblem:
    """H(t) = H0(t) + lam * V(t), both given by Fourier harmonics on the
    base frequency `omega` (use omega/2 as base for period-2T problems)."""

    h0: dict[int, np.ndarray]
    v: dict[int, np.ndarray]
    omega: float
    m_cutoff: int
    lam: float = 1.0

    def __post_init__(self):
        for name, h in (("h0", self.h0), ("v", self.v)):
            for m, mat in h.items():
                partner = h.get(-m)
                if partner is None or not np.allclose(
                        mat.conj().T, partner, atol=1e-12):
                    raise ValueError(f"{name}: harmonics {m}/{-m} not mutually adjoint")

    def _sambe_h0(self) -> np.ndarray:
        if self.m_cutoff == 0:
            if set(self.h0) - {0} or set(self.v) - {0}:
                raise ValueError("m_cutoff = 0 requires a static problem")
            return np.asarray(self.h0[0], dtype=complex)
        return assemble_sambe(DrivenBdG(self.h0, self.omega), self.m_cutoff).matrix

    @cached_property
    def _unperturbed(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self._sambe_h0())

    @property
    def eps0(self) -> np.ndarray:
        return self._unperturbed[0]

    @property
    def basis(self) -> np.ndarray:
        return self._unperturbed[1]

    @cached_property
    def v_matrix(self) -> np.ndarray:
        """The perturbation in the unperturbed Sambe eigenbasis (lam excluded)."""
        V = sambe_lift(self.v, self.m_cutoff)
        W = self.basis
        return W.conj().T @ V @ W

    def cluster_near(self, center: float, tol: float) -> np.ndarray:
        """Indices of unperturbed Sambe states within tol of `center`."""
        return np.nonzero(np.abs(self.eps0 - center) <= tol)[0]

    def exact_quasienergies(self) -> np.ndarray:
        """Eigenvalues of the full Sambe matrix H0 + lam*V (unfolded)."""
        H = self._sambe_h0() + self.lam * sambe_lift(self.v, self.m_cutoff)
        return np.linalg.eigvalsh(H)


@dataclass
class CorrectionResult:
    eps0: np.ndarray           # unperturbed quasienergies of the cluster
    delta: np.ndarray          # corrections through the requested order
    second: np.ndarray
    third: np.ndarray
    rotation: np.ndarray       # cluster pre-rotation (columns = new basis)


def quasienergy_corrections(
    problem: PerturbationProblem,
    cluster: np.ndarray,
    order: int = 2,
    degeneracy_tol: float = 1e-8,
    diag_tol: float = 1e-10,
) -> CorrectionResult:
    """Quasienergy corrections per the time-averaged perturbation series.

    delta_j = lam^2 sum_{i} |V_ji|^2 / (e_j - e_i)
            + lam^3 sum_{i,k} V_ji V_ik V_kj / ((e_j - e_i)(e_j - e_k)),
    sums excluding the near-degenerate cluster.  Requires the cluster to
    carry no first-order structure: <j|V|j'> must vanish within the cluster
    after the pre-rotation that diagonalizes the second-order block (the
    closed-form phase choices of the degenerate bases become this
    rotation numerically).
    """
    if order not in (2, 3):
        raise ValueError(f"order must be 2 or 3, got {order}")
    cluster = np.asarray(cluster, dtype=int)
    eps = problem.eps0
    V = problem.v_matrix
    center = float(eps[cluster].mean())
    outside = np.nonzero(np.abs(eps - center) > degeneracy_tol)[0]

    vblock = V[np.ix_(cluster, cluster)]
    scale = max(np.abs(V).max(), 1e-300)
    worst = np.abs(vblock).max()
    if worst > diag_tol * scale:
        a, b = np.unravel_index(np.abs(vblock).argmax(), vblock.shape)
        raise ValueError(
            "cluster carries first-order matrix elements: "
            f"|<{cluster[a]}|V|{cluster[b]}>| = {worst:.3e}"
        )

    # second-order block at the cluster center, then rotate it diagonal
    vout = V[np.ix_(cluster, outside)]
    denom = center - eps[outside]
    m2 = (vout * (1.0 / denom)) @ vout.conj().T
    m2 = (m2 + m2.conj().T) / 2
    evals2, rot = np.linalg.eigh(m2)

    # verify the rotated second-order off-diagonals vanish
    m2r = rot.conj().T @ m2 @ rot
    off = np.abs(m2r - np.diag(np.diag(m2r))).max()
    if off > 1e-10 * max(np.abs(evals2).max(), 1e-300):
        raise ValueError(f"second-order block not diagonalizable to 1e-10: {off:.3e}")

    second = problem.lam**2 * evals2
    third = np.zeros_like(second)
    if order == 3:
        vrot = rot.conj().T @ vout            # cluster(rotated) x outside
        mid = V[np.ix_(outside, outside)]
        for j in range(cluster.size):
            w = vrot[j] / (eps[cluster][j] - eps[outside])
            third[j] = problem.lam**3 * float(np.real(np.dot(w, mid @ np.conj(w))))
    return CorrectionResult(
        eps0=eps[cluster].copy(),
        delta=second + third,
        second=second,
        third=third,
        rotation=rot,
    )


def effective_hamiltonian(
    problem: PerturbationProblem,
    cluster: np.ndarray,
    order: int = 2,
    degeneracy_tol: float = 1e-8,
) -> np.ndarray:
    """Hermitian quasi-degenerate effective block on the cluster (Van Vleck).

    H_eff = P(E0 + lam V)P + lam^2 PVRVP
            + lam^3 [ (PVRVRVP + h.c.)/2 - {PVRRVP, PVP}/2 ],
    with R = Q/(E0 - H0) and E0 the cluster center.  Exact cluster
    degeneracy is assumed; first-order internal elements are allowed.
    Its eigenvalues reproduce the quasienergies through `order`.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    cluster = np.asarray(cluster, dtype=int)
    eps = problem.eps0
    V = problem.v_matrix
    center = float(eps[cluster].mean())
    if np.abs(eps[cluster] - center).max() > degeneracy_tol:
        raise ValueError("cluster is not degenerate within degeneracy_tol")
    outside = np.nonzero(np.abs(eps - center) > degeneracy_tol)[0]
    lam = problem.lam

    pvp = V[np.ix_(cluster, cluster)]
    heff = np.diag(eps[cluster]).astype(complex) + lam * pvp
    if order >= 2:
        vout = V[np.ix_(cluster, outside)]
        r1 = 1.0 / (center - eps[outside])
        heff = heff + lam**2 * (vout * r1) @ vout.conj().T
    if order >= 3:
        mid = V[np.ix_(outside, outside)]
        a = (vout * r1) @ mid @ (vout * r1).conj().T
        a = (a + a.conj().T) / 2
        b = (vout * r1**2) @ vout.conj().T
        heff = heff + lam**3 * (a - (pvp @ b + b @ pvp) / 2)
    return (heff + heff.conj().T) / 2


# --------------------------------------------------------------------------
# lead-Majorana effective couplings (two leads)
# --------------------------------------------------------------------------

@dataclass
class TwoLeadParams:
    """Couplings of two single-level leads to the Majorana modes they face.

    coupling_i / coupling_j map (species, n) -> lambda-bar Fourier
    component, species in {"0", "pi"}, n an omega/2 harmonic index.
    Lead energies are E = n_lead * omega / 2 with n_lead in {-1, 0, 1}.
    `direct` is the lead-lead amplitude; its flux is
    Phi(t) = flux0 + flux1 sin(omega t).
    """

    eps_plus: float
    eps_minus: float
    n_i: int
    n_j: int
    coupling_i: dict[tuple[str, int], complex]
    coupling_j: dict[tuple[str, int], complex]
    direct: complex = 0.0
    flux0: float = 0.0
    flux1: float = 0.0
    omega: float = TWO_PI

    def __post_init__(self):
        if self.eps_plus == 0 or self.eps_minus == 0:
            raise ValueError("Coulomb-blockade gaps eps_+- must be nonzero")
        if self.n_i not in (-1, 0, 1) or self.n_j not in (-1, 0, 1):
            raise ValueError(
                "lead energy indices outside {-1, 0, 1} are unsupported "
                "(higher harmonics of the coupling are subdominant)"
            )
        lam_max = max(
            [abs(v) for v in self.coupling_i.values()]
            + [abs(v) for v in self.coupling_j.values()]
            + [abs(self.direct), 0.0]
        )
        gap = min(abs(self.eps_plus), abs(self.eps_minus))
        if lam_max > 0.1 * gap:
            warnings.warn(
                f"couplings ({lam_max:.3g}) exceed 10% of the blockade gap "
                f"({gap:.3g}); perturbative treatment degrades",
                stacklevel=2,
            )

    @property
    def inv_eps(self) -> float:
        return 1.0 / self.eps_plus + 1.0 / self.eps_minus


def species_pair(n_i: int, n_j: int) -> str:
    """'00' for even/even lead energies, 'pipi' for odd/odd, '0pi' mixed."""
    even_i, even_j = n_i % 2 == 0, n_j % 2 == 0
    if even_i and even_j:
        return "00"
    if not even_i and not even_j:
        return "pipi"
    return "0pi"


def lead_effective_coupling(params: TwoLeadParams) -> tuple[str, dict[int, complex]]:
    """Co-tunneling amplitude T_{i,j}(t) as omega/2-grid Fourier components.

        T^(00)   = (1/e+ + 1/e-) i lam0i0^* lam0j0            (static)
        T^(pipi) = (1/e+ + 1/e-) i lampi,-1^* lampj,-1 e^{-i w t}
        T^(0pi)  = (1/e+ + 1/e-) i lam0i0^* lampj,-1 e^{-i w t / 2}

    For the mixed case the even-energy lead must be lead i (swap before
    calling otherwise).
    """
    pair = species_pair(params.n_i, params.n_j)
    c = params.inv_eps
    li, lj = params.coupling_i, params.coupling_j
    if pair == "00":
        amp = 1j * c * np.conj(li.get(("0", 0), 0.0)) * lj.get(("0", 0), 0.0)
        return pair, {0: complex(amp)}
    if pair == "pipi":
        amp = 1j * c * np.conj(li.get(("pi", -1), 0.0)) * lj.get(("pi", -1), 0.0)
        return pair, {-2: complex(amp)}
    if params.n_i % 2 != 0:
        raise ValueError("mixed species pair needs the even-energy lead as lead i")
    amp = 1j * c * np.conj(li.get(("0", 0), 0.0)) * lj.get(("pi", -1), 0.0)
    return pair, {-1: complex(amp)}


# --------------------------------------------------------------------------
# toy Fock models (oracles)
# --------------------------------------------------------------------------

REGISTER_DIM = 3      # particle numbers N-1, N, N+1


def _register_ops(eps_plus: float, eps_minus: float) -> tuple[np.ndarray, np.ndarray]:
    """(charging Hamiltonian, lowering operator e^{-i phi}) on (N-1, N, N+1)."""
    h_charge = np.diag([-eps_minus, 0.0, -eps_plus]).astype(complex)
    lower = np.zeros((3, 3), dtype=complex)
    lower[0, 1] = 1.0
    lower[1, 2] = 1.0
    return h_charge, lower


@dataclass
class ToyModel:
    """Exact lead-Majorana Fock model: harmonics on the omega/2 grid plus
    the operators needed to classify its eigenstates."""

    harmonics: dict[int, np.ndarray]
    omega: float                       # the physical drive frequency
    charge_op: np.ndarray              # conserved n_leads + N_register
    parity_ops: dict[str, np.ndarray]  # named parity operators
    dim: int

    def is_static(self) -> bool:
        return set(self.harmonics) <= {0}

    def exact_levels(self, m_cutoff: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """(quasienergies, eigenvectors at t = 0).

        Static models are diagonalized directly.  Driven models go through
        the one-period propagator U(2T) (the couplings live on the omega/2
        grid, so the full period is 2T): quasienergies are its eigenphases,
        defined modulo omega/2 — each physical state appears exactly once,
        with no Sambe replica bookkeeping.  (m_cutoff is kept for API
        compatibility; the propagator route does not truncate harmonics.)
        """
        if self.is_static():
            return np.linalg.eigh(self.harmonics[0])
        from scipy.integrate import solve_ivp

        base = self.omega / 2
        period = TWO_PI / base
        d = self.dim
        hs = sorted(self.harmonics.items())

        def rhs(t, y):
            u = y.reshape(d, d)
            h = sum(mat * np.exp(1j * nu * base * t) for nu, mat in hs)
            return (-1j * (h @ u)).reshape(-1)

        sol = solve_ivp(rhs, (0.0, period), np.eye(d, dtype=complex).reshape(-1),
                        method="DOP853", rtol=1e-11, atol=1e-12)
        u = sol.y[:, -1].reshape(d, d)
        # Schur of a unitary matrix: orthonormal eigenbasis even at
        # degeneracies (np.linalg.eig would not guarantee that)
        from scipy.linalg import schur

        tmat, vecs = schur(u, output="complex")
        eps = -np.angle(np.diag(tmat)) / period
        order = np.argsort(eps)
        return eps[order], vecs[:, order]


def two_lead_toy(params: TwoLeadParams, scale: float = 1.0) -> ToyModel:
    """Exact Fock model of two leads + one MZM pair + one MPM pair + the
    3-state particle-number register.  `scale` multiplies every coupling
    (lambda-bars and the direct link) for scaling studies."""
    n_modes = 4                      # lead_i, lead_j, f_zero, f_pi
    dim_f = 2**n_modes
    cs = fock.jw_annihilators(n_modes)
    d_i, d_j = cs[0], cs[1]
    g0i, g0j = fock.majorana_pair(n_modes, 2)
    gpi, gpj = fock.majorana_pair(n_modes, 3)
    n_i = fock.number_op(n_modes, 0)
    n_j = fock.number_op(n_modes, 1)
    n_pi = fock.number_op(n_modes, 3)

    h_charge, lower = _register_ops(params.eps_plus, params.eps_minus)
    ident_r = np.eye(REGISTER_DIM)

    def kron(f, r):
        return np.kron(f, r)

    w = params.omega
    static = (
        kron(params.n_i * w / 2 * n_i + params.n_j * w / 2 * n_j
             + (w / 2) * n_pi, ident_r)
        + kron(np.eye(dim_f), h_charge)
    )
    harmonics: dict[int, np.ndarray] = {0: static}

    def add(nu: int, mat: np.ndarray):
        harmonics[nu] = harmonics.get(nu, 0) + mat
        harmonics[-nu] = harmonics.get(-nu, 0) + mat.conj().T

    gammas = {("0", "i"): g0i, ("0", "j"): g0j,
              ("pi", "i"): gpi, ("pi", "j"): gpj}
    leads = {"i": d_i, "j": d_j}
    for lead, coupling in (("i", params.coupling_i), ("j", params.coupling_j)):
        for (species, n), lam in coupling.items():
            op = kron(leads[lead].conj().T @ gammas[(species, lead)], lower)
            add(n, scale * lam * op)

    if params.direct != 0:
        if params.flux1 != 0:
            raise ValueError("toy oracle supports static flux only")
        lam = scale * params.direct * np.exp(1j * params.flux0)
        add(0, lam * kron(d_j.conj().T @ d_i, ident_r))

    harmonics = {k: np.asarray(v) for k, v in harmonics.items()
                 if np.abs(np.asarray(v)).max() > 0 or k == 0}
    charge = kron(n_i + n_j, ident_r) + kron(np.eye(dim_f),
                                             np.diag([0.0, 1.0, 2.0]))
    parity0 = kron(1j * g0i @ g0j, ident_r)
    paritypi = kron(1j * gpi @ gpj, ident_r)
    return ToyModel(
        harmonics=harmonics,
        omega=w,
        charge_op=charge,
        parity_ops={"zero": parity0, "pi": paritypi},
        dim=dim_f * REGISTER_DIM,
    )


def _cluster_states(
    toy: ToyModel,
    charge_value: float,
    window: float,
    mediator: str,
    spectator: str | None,
    spectator_parity: float = -1.0,
    m_cutoff: int = 8,
) -> list[tuple[float, float]]:
    """(quasienergy, mediator-parity expectation) of exact eigenstates near
    0 in the given conserved-charge sector.

    Near-degenerate groups are rotated to diagonalize the mediator parity,
    so the classification stays sharp even at vanishing coupling."""
    evals, evecs = toy.exact_levels(m_cutoff=m_cutoff)
    picked = []
    for k in range(evals.size):
        e = float(evals[k]) if toy.is_static() else float(
            fold(evals[k], toy.omega / 2))
        if abs(e) > window:
            continue
        v = evecs[:, k]
        nrm = np.linalg.norm(v)
        if nrm < 1e-6:
            continue
        v = v / nrm
        q = float(np.vdot(v, toy.charge_op @ v).real)
        if abs(q - charge_value) > 1e-6:
            continue
        picked.append((e, v))
    # within (near-)degenerate groups, rotate to the simultaneous eigenbasis
    # of the (commuting) spectator and mediator parities, then filter
    picked.sort(key=lambda ev: ev[0])
    pmed = toy.parity_ops[mediator]
    combo = pmed if spectator is None else 2 * toy.parity_ops[spectator] + pmed
    pspec = None if spectator is None else toy.parity_ops[spectator]
    out = []
    i = 0
    while i < len(picked):
        j = i
        while j + 1 < len(picked) and picked[j + 1][0] - picked[i][0] < 1e-9:
            j += 1
        group = picked[i:j + 1]
        basis = np.array([v for _, v in group]).T
        block = basis.conj().T @ combo @ basis
        _, rot = np.linalg.eigh((block + block.conj().T) / 2)
        vecs = basis @ rot
        for c in range(len(group)):
            v = vecs[:, c]
            if pspec is not None:
                ps = float(np.vdot(v, pspec @ v).real)
                if abs(ps - spectator_parity) > 1e-2:
                    continue
            out.append((group[0][0], float(np.vdot(v, pmed @ v).real)))
        i = j + 1
    return out


def effective_two_lead_block(params: TwoLeadParams, parity: int,
                             scale: float = 1.0) -> np.ndarray:
    """The predicted 2x2 effective Hamiltonian on (lead i occupied, lead j
    occupied) at fixed mediating-pair parity.

    For the 00 pair both the static co-tunneling amplitude and the direct
    link interfere: offdiag = T^(00) * parity + direct * e^{i flux0}.  For
    the pipi pair the two lead states sit omega apart and the e^{-i w t}
    co-tunneling harmonic bridges them resonantly, so the block carries
    T^(pipi) * parity alone (a static link is off-resonant there).
    """
    pair, T = lead_effective_coupling(params)
    if pair == "00":
        amp = scale**2 * T.get(0, 0.0) * parity \
            + scale * params.direct * np.exp(1j * params.flux0)
    else:
        amp = scale**2 * T.get(-2, 0.0) * parity
    return np.array([[0.0, np.conj(amp)], [amp, 0.0]], dtype=complex)


def verify_effective_model(
    params: TwoLeadParams,
    scale: float = 1.0,
    m_cutoff: int = 8,
) -> float:
    """Max relative deviation between exact toy-model cluster splittings and
    the effective-model prediction, per parity sector.

    The exact one-lead-particle cluster (4 states: 2 lead positions x 2
    parities of the mediating pair) is centered per parity sector to
    remove the common second-order self-energy; the prediction is
    +-|T * p + direct|.  Valid for configurations without a differential
    second-order detuning (symmetric couplings or eps_+ = eps_-).  The
    mediating species follows the lead energies (zero pair for 00, pi
    pair for pipi); the mixed 0pi case has no two-state-per-parity cluster
    and is not supported by this oracle.
    """
    pair, _ = lead_effective_coupling(params)
    if pair != "00":
        # the pi-carrying amplitudes rest on the paper's dressed lead-parity
        # bases; a lab-frame toy with static Majorana operators does not
        # reduce to them, so the oracle is scoped to the 00 pair
        raise NotImplementedError("toy oracle covers the 00 species pair")
    mediator, spectator = "zero", "pi"
    toy = two_lead_toy(params, scale=scale)
    gap = min(abs(params.eps_plus), abs(params.eps_minus))
    states = _cluster_states(toy, charge_value=2.0, window=0.45 * gap,
                             mediator=mediator, spectator=spectator,
                             m_cutoff=m_cutoff)
    if len(states) != 4:
        raise RuntimeError(f"expected 4 cluster states, found {len(states)}")
    worst = 0.0
    for parity in (+1, -1):
        exact = sorted(e for e, pm in states if pm * parity > 0.5)
        if len(exact) != 2:
            raise RuntimeError("could not classify cluster states by parity")
        exact = np.array(exact) - np.mean(exact)
        pred = np.sort(np.linalg.eigvalsh(
            effective_two_lead_block(params, parity, scale=scale)))
        spread = max(np.abs(pred).max(), 1e-300)
        worst = max(worst, float(np.abs(np.sort(exact) - pred).max() / spread))
    return worst


def signed_splitting(params: TwoLeadParams, parity: int,
                     scale: float = 1.0, m_cutoff: int = 8) -> float:
    """Exact toy-model splitting with a sign fixed by the lead eigenvector:
    positive when the (|i> + e^{i arg T}|j>)/sqrt(2) lead combination is the
    raised state of its parity sector.  Flipping the mediating parity flips
    this sign exactly."""
    toy = two_lead_toy(params, scale=scale)
    evals, evecs = toy.exact_levels(m_cutoff=m_cutoff)
    gap = min(abs(params.eps_plus), abs(params.eps_minus))
    _, T = lead_effective_coupling(params)
    t0 = T.get(0, 0.0)
    phase = np.exp(1j * np.angle(t0)) if t0 != 0 else 1.0
    di, dj = fock.jw_annihilators(4)[0], fock.jw_annihilators(4)[1]
    hop = np.kron(dj.conj().T @ di, np.eye(REGISTER_DIM))
    sector = []
    for k in range(evals.size):
        e = float(evals[k]) if toy.is_static() else float(fold(evals[k], toy.omega / 2))
        if abs(e) > 0.45 * gap:
            continue
        v = evecs[:, k]
        q = float(np.vdot(v, toy.charge_op @ v).real)
        p0 = float(np.vdot(v, toy.parity_ops["zero"] @ v).real)
        ppi = float(np.vdot(v, toy.parity_ops["pi"] @ v).real)
        if abs(q - 2) > 1e-6 or abs(ppi + 1) > 1e-3 or p0 * parity < 0.5:
            continue
        sym_weight = float(np.real(np.conj(phase) * np.vdot(v, hop @ v)))
        sector.append((e, sym_weight))
    if len(sector) != 2:
        raise RuntimeError(f"expected a 2-state sector, found {len(sector)}")
    center = (sector[0][0] + sector[1][0]) / 2
    raised = max(sector, key=lambda ew: ew[1])
    return float(raised[0] - center)


# --------------------------------------------------------------------------
# four-lead third-order amplitude and toy
# --------------------------------------------------------------------------

@dataclass
class FourLeadParams:
    """Four leads l_{1..4,a} at zero energy coupled to the four zero-mode
    corner Majoranas, with weak direct links (1,2) and (3,4)."""

    eps_plus: float
    eps_minus: float
    couplings: dict[int, complex]       # corner -> lambda-bar_{0, l_s, 0}
    link12: complex = 0.0
    link34: complex = 0.0
    flux12: float = 0.0
    flux43: float = 0.0
    omega: float = TWO_PI

    def __post_init__(self):
        if set(self.couplings) != {1, 2, 3, 4}:
            raise ValueError("need couplings for corners 1..4")

    @property
    def inv_eps(self) -> float:
        return 1.0 / self.eps_plus + 1.0 / self.eps_minus

    def tilde12(self) -> complex:
        return self.link12 * np.exp(1j * self.flux12)

    def tilde43(self) -> complex:
        return self.link34 * np.exp(1j * self.flux43)


@dataclass
class FourLeadAmplitude:
    """h_1234 = c14 g01 g04 + c24 g02 g04 + c13 g01 g03 (operator-valued
    amplitude of the l1 -> l4 transfer, through third order)."""

    c14: complex
    c24: complex
    c13: complex

    def coefficients(self) -> dict[str, complex]:
        return {"g01 g04": self.c14, "g02 g04": self.c24, "g01 g03": self.c13}


def four_lead_effective(params: FourLeadParams) -> FourLeadAmplitude:
    """Second- plus third-order l1 -> l4 amplitude:

    h1234 = -lam4 lam1^* (1/e+ + 1/e-) g01 g04
            - (1/e-^2) [ tilde12^* lam4 lam2^* g02 g04
                         + tilde43^* lam3 lam1^* g01 g03 ].
    """
    lam = params.couplings
    c14 = -lam[4] * np.conj(lam[1]) * params.inv_eps
    c24 = -(1.0 / params.eps_minus**2) * np.conj(params.tilde12()) \
        * lam[4] * np.conj(lam[2])
    c13 = -(1.0 / params.eps_minus**2) * np.conj(params.tilde43()) \
        * lam[3] * np.conj(lam[1])
    return FourLeadAmplitude(c14=complex(c14), c24=complex(c24), c13=complex(c13))


def four_lead_toy(params: FourLeadParams, scale: float = 1.0) -> ToyModel:
    """Exact Fock model: 4 leads + 4 zero-mode Majoranas (modes (g01,g02)
    and (g03,g04)) + the particle-number register.  Static."""
    n_modes = 6        # leads 1..4, f_12, f_34
    dim_f = 2**n_modes
    cs = fock.jw_annihilators(n_modes)
    g01, g02 = fock.majorana_pair(n_modes, 4)
    g03, g04 = fock.majorana_pair(n_modes, 5)
    gam = {1: g01, 2: g02, 3: g03, 4: g04}
    h_charge, lower = _register_ops(params.eps_plus, params.eps_minus)
    ident_r = np.eye(REGISTER_DIM)

    H = np.kron(np.zeros((dim_f, dim_f), dtype=complex), ident_r)
    H += np.kron(np.eye(dim_f), h_charge)
    for s in range(1, 5):
        term = scale * params.couplings[s] * (cs[s - 1].conj().T @ gam[s])
        coupling = np.kron(term, lower)
        H += coupling + coupling.conj().T
    for (a, b, tilde) in ((1, 2, scale * params.tilde12()),
                          (3, 4, scale * params.tilde43())):
        link = np.conj(tilde) * (cs[b - 1].conj().T @ cs[a - 1])
        link = np.kron(link, ident_r)
        H += link + link.conj().T

    n_leads = sum(fock.number_op(n_modes, k) for k in range(4))
    charge = np.kron(n_leads, ident_r) + np.kron(np.eye(dim_f),
                                                 np.diag([0.0, 1.0, 2.0]))
    parity12 = np.kron(1j * g01 @ g02, ident_r)
    parity34 = np.kron(1j * g03 @ g04, ident_r)
    return ToyModel(
        harmonics={0: H},
        omega=params.omega,
        charge_op=charge,
        parity_ops={"p12": parity12, "p34": parity34},
        dim=dim_f * REGISTER_DIM,
    )


# --------------------------------------------------------------------------
# nested-commutator Majorana mode expansion
# --------------------------------------------------------------------------

def quadratic_from_bdg(h: np.ndarray) -> np.ndarray:
    """Real antisymmetric A with H = (i/4) sum_ab A_ab gamma_a gamma_b for
    the BdG block h (Nambu-innermost), using gamma_{2x} = c_x + c_x^dag,
    gamma_{2x+1} = i(c_x^dag - c_x)."""
    n = h.shape[0] // 2
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    for x in range(n):
        # particle row: c_x = (g_A + i g_B)/2 ; hole row: c_x^dag
        s[2 * x, 2 * x] = 0.5
        s[2 * x, 2 * x + 1] = 0.5j
        s[2 * x + 1, 2 * x] = 0.5
        s[2 * x + 1, 2 * x + 1] = -0.5j
    b = s.conj().T @ h @ s
    a = -1j * (b - b.T)
    if np.abs(a.imag).max() > 1e-10 * max(np.abs(a).max(), 1e-300):
        raise ValueError("BdG block did not map to a real antisymmetric form")
    return a.real


def zero_mode_seeds(a0: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Orthonormal near-kernel vectors of A0 (columns); the seeds of the
    zero-mode expansion.  Raises if none exist, reporting the kernel size."""
    w, v = np.linalg.eigh(1j * a0)
    keep = np.abs(w) <= tol * max(np.abs(w).max(), 1.0)
    if not keep.any():
        raise ValueError(
            f"h0 has no (near-)kernel at tolerance {tol}: kernel dimension 0"
        )
    # realify: the +e/-e near-zero pairs combine to real vectors
    cols = v[:, keep]
    q, _ = np.linalg.qr(np.hstack([cols.real, cols.imag]))
    ranks = [c for c in range(q.shape[1])
             if np.linalg.norm(a0 @ q[:, c]) <= 10 * tol * max(np.abs(w).max(), 1.0)]
    out = q[:, ranks[:keep.sum()]]
    if out.shape[1] == 0:
        raise ValueError("failed to realify the kernel basis")
    return out


def pi_mode_seeds(a0: np.ndarray, a1: np.ndarray, omega: float,
                  tol: float = 1e-6) -> list[np.ndarray]:
    """Complex seed vectors v with i A0 v + i A1 conj(v)/2 = (omega/2) v,
    solved as the real block eigenproblem
        [[0, -A0 + A1/2], [A0 + A1/2, 0]] (x; y) = (omega/2) (x; y)
    for v = x + i y.  Raises when no eigenvalue sits near omega/2."""
    n = a0.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, n:] = -a0 + a1 / 2
    block[n:, :n] = a0 + a1 / 2
    w, v = np.linalg.eig(block)
    sel = np.nonzero((np.abs(w.imag) < 1e-8)
                     & (np.abs(w.real - omega / 2) <= tol * omega))[0]
    if sel.size == 0:
        raise ValueError(
            f"no pi-mode seed: no block eigenvalue within {tol * omega:.2e} "
            f"of omega/2 (kernel dimension 0)"
        )
    sel = sel[np.argsort(np.abs(w[sel].real - omega / 2))]
    seeds = []
    for idx in sel:
        x = v[:n, idx].real
        y = v[n:, idx].real
        vec = x + 1j * y
        nrm = np.linalg.norm(vec)
        if nrm > 1e-12:
            seeds.append(vec / nrm)
    return seeds


@dataclass
class ModeExpansion:
    """Fourier components of a candidate Majorana operator.

    components[m] is the coefficient vector of exp(i nu_m omega t) with
    nu_m = m for species 'zero' and nu_m = m - 1/2 for species 'pi'
    (period 2T).  residual_history[k] is the Sambe-Frobenius norm of
    [H - i d/dt, gamma] after k correction orders.
    """

    species: str
    omega: float
    components: dict[int, np.ndarray]
    residual_history: list[float]

    def frequency(self, m: int) -> float:
        return (m - 0.5) * self.omega if self.species == "pi" else m * self.omega

    def at_time(self, t: float) -> np.ndarray:
        out = 0
        for m, v in self.components.items():
            out = out + v * np.exp(1j * self.frequency(m) * t)
        return out

    def hermiticity_defect(self, times: np.ndarray) -> float:
        """Max norm of Im(coefficient vector) over the sampled times; zero
        for an operator that is Hermitian at every instant."""
        worst = 0.0
        for t in times:
            vec = self.at_time(t)
            worst = max(worst, float(np.abs(vec.imag).max()))
        return worst


def _expansion_residual(
    comp: dict[int, np.ndarray], a0: np.ndarray, a1: np.ndarray,
    omega: float, species: str,
) -> dict[int, np.ndarray]:
    """Components of [H - i d/dt, gamma] on the expansion's frequency grid."""
    nu = (lambda m: m - 0.5) if species == "pi" else (lambda m: float(m))
    ms = sorted(comp)
    lo, hi = ms[0] - 1, ms[-1] + 1
    res = {}
    for m in range(lo, hi + 1):
        v = comp.get(m)
        vm = comp.get(m - 1)
        vp = comp.get(m + 1)
        acc = np.zeros(a0.shape[0], dtype=complex)
        if v is not None:
            acc = acc + 1j * (a0 @ v) + nu(m) * omega * v
        if vm is not None:
            acc = acc + 0.5j * (a1 @ vm)
        if vp is not None:
            acc = acc + 0.5j * (a1 @ vp)
        res[m] = acc
    return res


def _residual_norm(res: dict[int, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.vdot(v, v).real) for v in res.values())))


def majorana_mode_expansion(
    a0: np.ndarray,
    a1: np.ndarray,
    seed: np.ndarray,
    species: str,
    order: int,
    omega: float = TWO_PI,
    seed_tol: float = 1e-6,
    first_order_pi_coeffs: tuple[float, float] | None = None,
    resonant_cutoff: float = 0.1,
) -> ModeExpansion:
    """Order-by-order construction of a zero or pi Majorana operator.

    Operators are linear in the Majorana basis: gamma(v) = sum_a v_a
    gamma_a, with [H, gamma(v)] = gamma(i A v) for H = (i/4) A_ab g_a g_b.
    Each correction order cancels the off-resonant residual components
    with delta_v = -R_m / (nu_m omega); resonant components (frequency 0
    for zero modes, -+omega/2 for pi modes) are reduced with a pseudo-
    inverse of (iA0 + nu omega), leaving the irreducible part.

    For pi modes the first correction order can be forced to use explicit
    coefficients (a, b): delta at e^{-3 i w t/2} = a [h1, seed]/(2w) and at
    e^{+3 i w t/2} = b [h1, seed^dag]/(2w).  The residual-cancelling values
    are a = 2/3 and b = -2/3 (the generic sweep); passing other values
    reproduces published variants for comparison.
    """
    if species not in ("zero", "pi"):
        raise ValueError(f"species must be 'zero' or 'pi', got {species!r}")
    n = a0.shape[0]
    if species == "zero":
        kick = np.linalg.norm(a0 @ seed)
        if kick > seed_tol * max(np.linalg.norm(a0, 2), 1.0):
            kdim = zero_mode_seeds(a0, tol=seed_tol).shape[1] if kick else 0
            raise ValueError(
                f"seed does not commute with h0 (|A0 v| = {kick:.3e}); "
                f"near-kernel dimension is {kdim}"
            )
        comp = {0: np.array(seed, dtype=complex)}
        resonant = {0: 0.0}
    else:
        lhs = 1j * (a0 @ seed) + 0.5j * (a1 @ seed.conj()) - (omega / 2) * seed
        if np.linalg.norm(lhs) > seed_tol * omega:
            raise ValueError(
                f"pi seed violates the omega/2 eigencondition by "
                f"{np.linalg.norm(lhs):.3e}"
            )
        comp = {0: np.array(seed, dtype=complex),
                1: np.array(seed.conj(), dtype=complex)}
        resonant = {0: -omega / 2, 1: omega / 2}

    nu = (lambda m: m - 0.5) if species == "pi" else (lambda m: float(m))
    spec_a0 = np.linalg.eigvalsh(1j * a0)
    res = _expansion_residual(comp, a0, a1, omega, species)
    history = [_residual_norm(res)]

    for k in range(1, order + 1):
        if species == "pi" and k == 1 and first_order_pi_coeffs is not None:
            a_c, b_c = first_order_pi_coeffs
            x = 1j * (a1 @ comp[0])        # [h1, gamma(seed)]
            y = 1j * (a1 @ comp[1])        # [h1, gamma(seed^dag)]
            comp[-1] = comp.get(-1, 0) + a_c * x / (2 * omega)
            comp[2] = comp.get(2, 0) + b_c * y / (2 * omega)
        else:
            for m, r in res.items():
                if np.linalg.norm(r) == 0:
                    continue
                # Cancel through (iA0 + nu w) delta = -R.  The bare
                # recursion keeps only the nu*w denominator; resumming iA0
                # tightens the per-order ratio to ~||h1||/w wherever the
                # operator is safely invertible.  In frequency sectors the
                # h0 spectrum reaches (nu = -+1/2 for pi modes, nu = 0 for
                # zero modes at gapless points) the solve is trimmed:
                # singular directions below resonant_cutoff * omega are
                # dropped, leaving the irreducible part of the residual.
                op = 1j * a0 + nu(m) * omega * np.eye(n)
                dists = np.abs(spec_a0 + nu(m) * omega)
                # at nu = 0 only the (near-)kernel needs protecting; at
                # band-resonant nu != 0 trim at the resonant_cutoff scale
                sigma_min = 1e-6 * omega if nu(m) == 0 else resonant_cutoff * omega
                if dists.min() >= 2 * sigma_min:
                    delta = np.linalg.solve(op, -r)
                else:
                    u, s, vt = np.linalg.svd(op)
                    keep = s >= sigma_min
                    delta = vt.conj().T[:, keep] @ (
                        (u.conj().T[keep] @ (-r)) / s[keep])
                comp[m] = comp.get(m, np.zeros(n, dtype=complex)) + delta
        res = _expansion_residual(comp, a0, a1, omega, species)
        history.append(_residual_norm(res))

    return ModeExpansion(species=species, omega=omega,
                         components={m: v for m, v in comp.items()},
                         residual_history=history)


def pi_first_order_residual(
    a0: np.ndarray, a1: np.ndarray, seed: np.ndarray,
    coeffs: tuple[float, float], omega: float = TWO_PI,
    seed_tol: float = 0.2,
) -> float:
    """Residual norm after the first pi-mode correction built with the
    explicit (a, b) coefficients; used to probe the coefficient choice."""
    exp = majorana_mode_expansion(
        a0, a1, seed, "pi", order=1, omega=omega, seed_tol=seed_tol,
        first_order_pi_coeffs=coeffs,
    )
    return exp.residual_history[-1]
