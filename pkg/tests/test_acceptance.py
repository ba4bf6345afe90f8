"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 5's coefficient-minimality clause is implemented exactly as
stated and is expected to fail: the first-order residual is not minimized
at (A, B) = (2/3, -2/5) (see the repository notes for the analysis and
the measured landscape).  Run with `pytest -v -rA` to see every line.
"""

import dataclasses
import json
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest
from scipy.special import jv

from cornerlab import floquet, lattice, majorana, perturbation, protocols, readout
from cornerlab.lattice import fig_s1_params, kitaev_chain_bdg
from cornerlab.majorana import g, string

W = 2 * np.pi
TOL_MODE = 1e-3 * W


def report(criterion, ok, detail):
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    return ok


@pytest.fixture(scope="module")
def benchmark_16(request):
    """Benchmark parameters on the 16x16 acceptance lattice, Sambe M = 6."""
    t0 = time.time()
    params = fig_s1_params(Nx=8, Ny=8)
    bdg = lattice.build_realspace_bdg(params)
    sambe = floquet.assemble_sambe(bdg, 6)
    spec = floquet.quasienergy_spectrum(sambe, tol_zero=TOL_MODE, tol_pi=TOL_MODE)
    return params, spec, time.time() - t0


def test_criterion_1_benchmark_spectrum(benchmark_16):
    params, spec, elapsed = benchmark_16
    counts = spec.counts()
    ok = counts == {"zero": 4, "pi": 4}
    gap_ok = spec.gaps[0] > 10 * TOL_MODE and spec.gaps[1] > 10 * TOL_MODE
    corner_ok = True
    corners = {"zero": [], "pi": []}
    for species in ("zero", "pi"):
        rotated = floquet.corner_basis_rotation(spec.modes_of(species),
                                                params.shape)
        for mode in rotated:
            wts = floquet.corner_localization(mode, 0.25, params.shape)
            corner_ok &= wts.max() >= 0.8
            corners[species].append(int(wts.argmax()))
    distinct_ok = all(sorted(v) == [0, 1, 2, 3] for v in corners.values())
    runtime_ok = elapsed < 600
    assert report(
        1, ok and gap_ok and corner_ok and distinct_ok and runtime_ok,
        f"counts {counts}, gaps/tol ({spec.gaps[0] / TOL_MODE:.0f}x, "
        f"{spec.gaps[1] / TOL_MODE:.0f}x), corner weights >= 0.8 on distinct "
        f"corners: {corner_ok and distinct_ok}, solve {elapsed:.0f}s",
    )


def test_criterion_2_symmetry_suite():
    rng = np.random.default_rng(17)
    worst_ph = 0.0
    for _ in range(20):
        vals = {k: float(rng.normal()) for k in
                ("Jx", "Jy", "dJ", "Dx", "Dy", "dDy",
                 "mu0", "dmu0", "mu1", "dmu1")}
        p = lattice.LatticeParams(Nx=2, Ny=2, **vals)
        worst_ph = max(worst_ph, lattice.check_symmetry(
            p, lattice.symmetry_op("particle-hole")))
    fine = lattice.LatticeParams(Nx=2, Ny=2, Jx=1.3, Jy=0.0, dJ=0.0, Dx=0.9,
                                 Dy=0.55, dDy=0.45, mu0=1.7, dmu0=0.0,
                                 mu1=2.0, dmu1=0.0)
    worst_fine = max(lattice.check_symmetry(fine, lattice.symmetry_op(kind))
                     for kind in ("chiral", "time-reversal", "inversion"))
    broken = lattice.check_symmetry(fig_s1_params(Nx=2, Ny=2),
                                    lattice.symmetry_op("chiral"))
    ok = worst_ph < 1e-10 and worst_fine < 1e-10 and broken > 1e-3
    assert report(2, ok, f"PH residual {worst_ph:.1e}, emergent residual "
                         f"{worst_fine:.1e}, broken chiral {broken:.2e}")


def test_criterion_3_protocol_exactness():
    rng = np.random.default_rng(23)
    worst = 1.0
    details = []
    for pid in protocols.PROTOCOL_IDS:
        ancilla = "magic" if pid.startswith("tgate") else "z+"
        inputs = protocols.random_logical_inputs(10, rng, ancilla=ancilla)
        rep = protocols.enumerate_branches(pid, inputs)
        worst = min(worst, rep.min_fidelity)
        details.append(f"{pid} {1 - rep.min_fidelity:.1e}")
        assert rep.covered
    # composition checks
    comps = {}
    state = protocols.random_logical_inputs(1, rng)[0]

    def run_seq(pids, st):
        for pid in pids:
            st = protocols.run_protocol(pid, st, rng=rng).state
        return st

    def overlap(a, b):
        da = majorana.decode_logical(a)
        db = majorana.decode_logical(b)
        ba = 0 if majorana.expectation(a, majorana.pauli("z", 3)) > 0 else 1
        bb = 0 if majorana.expectation(b, majorana.pauli("z", 3)) > 0 else 1
        va, vb = da.reshape(4, 2)[:, ba], db.reshape(4, 2)[:, bb]
        return abs(np.vdot(va, vb)) / (np.linalg.norm(va) * np.linalg.norm(vb))

    comps["H^2"] = 1 - overlap(run_seq(["hadamard1"] * 2, state), state)
    comps["P^4"] = 1 - overlap(run_seq(["phase1"] * 4, state), state)
    comps["CNOT^2"] = 1 - overlap(run_seq(["cnot"] * 2, state), state)
    # T^2 = P on qubit 1 (two magic ancillas consumed, then compare to one
    # phase-gate application)
    magic = protocols.magic_state()
    qs = [np.array([0.6, 0.8]), np.array([1.0, 0.0])]
    st_t = majorana.encode_logical(qs[0], qs[1], magic)
    st_t = protocols.run_protocol("tgate1", st_t, rng=rng).state
    # re-arm the ancilla with a fresh magic state
    dec = majorana.decode_logical(st_t)
    banc = 0 if majorana.expectation(st_t, majorana.pauli("z", 3)) > 0 else 1
    logical = dec.reshape(4, 2)[:, banc].reshape(2, 2)
    st_t = majorana.FockState(sum(
        logical[b1, b2] * majorana.encode_logical(
            [1 - b1, b1], [1 - b2, b2], magic).amplitudes
        for b1 in (0, 1) for b2 in (0, 1)))
    st_t = protocols.run_protocol("tgate1", st_t, rng=rng).state
    st_p = majorana.encode_logical(qs[0], qs[1], [1, 0])
    st_p = protocols.run_protocol("phase1", st_p, rng=rng).state
    comps["T^2=P"] = 1 - overlap(st_t, st_p)

    comp_ok = all(v < 1e-9 for v in comps.values())
    ok = worst >= 1 - 1e-10 and comp_ok
    assert report(3, ok,
                  f"min branch fidelity {worst:.15f}; compositions " +
                  ", ".join(f"{k} {v:.1e}" for k, v in comps.items()))


def test_criterion_4_perturbation_scaling():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = perturbation.TwoLeadParams(
            eps_plus=1.0, eps_minus=1.0, n_i=0, n_j=0,
            coupling_i={("0", 0): 1.0}, coupling_j={("0", 0): 1.0},
            direct=0.5)
    lams = np.geomspace(0.01, 0.1, 6)
    errs = []
    for lam in lams:
        rel = perturbation.verify_effective_model(params, scale=lam)
        pred = np.abs(np.linalg.eigvalsh(
            perturbation.effective_two_lead_block(params, 1, scale=lam))).max()
        errs.append(rel * pred)
    slope2 = float(np.polyfit(np.log(lams), np.log(errs), 1)[0])

    p4 = perturbation.FourLeadParams(
        eps_plus=1.0, eps_minus=1.0,
        couplings={1: 1.0, 2: 0.8, 3: 0.9, 4: 1.1},
        link12=0.6, link34=0.5, flux12=0.4, flux43=1.1)
    h0 = perturbation.four_lead_toy(p4, scale=0.0).harmonics[0]
    v = perturbation.four_lead_toy(p4, scale=1.0).harmonics[0] - h0
    errs3 = []
    lams3 = np.geomspace(0.005, 0.05, 6)
    for lam in lams3:
        prob = perturbation.PerturbationProblem(
            h0={0: h0}, v={0: v}, omega=W, m_cutoff=0, lam=lam)
        cl = prob.cluster_near(0.0, 1e-9)
        pred = np.sort(np.linalg.eigvalsh(
            perturbation.effective_hamiltonian(prob, cl, order=3)))
        exact_all = prob.exact_quasienergies()
        exact = np.sort(exact_all[np.argsort(np.abs(exact_all))[:cl.size]])
        errs3.append(np.abs(exact - pred).max())
    slope3 = float(np.polyfit(np.log(lams3), np.log(errs3), 1)[0])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sym = perturbation.TwoLeadParams(
            eps_plus=1.0, eps_minus=1.0, n_i=0, n_j=0,
            coupling_i={("0", 0): 0.1}, coupling_j={("0", 0): 0.1})
    s_plus = perturbation.signed_splitting(sym, +1)
    s_minus = perturbation.signed_splitting(sym, -1)
    flip_exact = abs(s_plus + s_minus) < 1e-13 and abs(s_plus) > 0

    ok = abs(slope2 - 3.0) <= 0.2 and abs(slope3 - 4.0) <= 0.3 and flip_exact
    assert report(4, ok, f"second-order slope {slope2:.2f} (3.0+-0.2), "
                         f"third-order slope {slope3:.2f} (4.0+-0.3), parity "
                         f"flip {s_plus:+.3e} <-> {s_minus:+.3e}")


def _pi_chain():
    bdg = kitaev_chain_bdg(60, J=1.2, Delta=1.2, mu0=1.0, mu1=0.5, omega=W)
    a0 = perturbation.quadratic_from_bdg(np.asarray(bdg.component(0)))
    a1 = perturbation.quadratic_from_bdg(2 * np.asarray(bdg.component(1)))
    return a0, a1


def test_criterion_5a_expansion_residual_decrease():
    bdg = kitaev_chain_bdg(40, J=0.3, Delta=0.3, mu0=0.05, mu1=0.4, omega=W)
    a0 = perturbation.quadratic_from_bdg(np.asarray(bdg.component(0)))
    a1 = perturbation.quadratic_from_bdg(2 * np.asarray(bdg.component(1)))
    assert np.linalg.norm(a1, 2) <= W / 4         # hbar w >= 4 ||h1||
    seeds = perturbation.zero_mode_seeds(a0, tol=1e-6)
    r0 = perturbation.majorana_mode_expansion(
        a0, a1, seeds[:, 0], "zero", order=3, omega=W).residual_history

    a0p, a1p = _pi_chain()
    assert np.linalg.norm(a1p, 2) <= W / 4
    seed = perturbation.pi_mode_seeds(a0p, a1p, W, tol=0.05)[0]
    rp = perturbation.majorana_mode_expansion(
        a0p, a1p, seed, "pi", order=3, omega=W, seed_tol=0.2).residual_history

    ok = all(r0[i + 1] < r0[i] for i in range(3)) \
        and all(rp[i + 1] < rp[i] for i in range(3))
    assert report("5a", ok,
                  "residuals zero-chain " + "->".join(f"{r:.1e}" for r in r0)
                  + ", pi-chain " + "->".join(f"{r:.1e}" for r in rp))


def test_criterion_5b_published_coefficients_minimize_residual():
    """Faithful rendition of the stated criterion: perturbing
    (A, B) = (2/3, -2/5) must increase the first-order pi-mode residual.

    This fails: the residual-minimizing pair within the ansatz is
    (2/3, -2/3) (the value the combining condition actually yields), so
    perturbing B towards -2/3 lowers the residual.  Kept red deliberately;
    see the repository notes.
    """
    a0, a1 = _pi_chain()
    seed = perturbation.pi_mode_seeds(a0, a1, W, tol=0.05)[0]
    base = perturbation.pi_first_order_residual(a0, a1, seed, (2 / 3, -2 / 5))
    increased = {}
    for da, db in ((1.1, 1.0), (0.9, 1.0), (1.0, 1.1), (1.0, 0.9)):
        r = perturbation.pi_first_order_residual(
            a0, a1, seed, (2 / 3 * da, -2 / 5 * db))
        increased[(da, db)] = r > base
    ok = all(increased.values())
    report("5b", ok,
           f"residual at (2/3,-2/5) = {base:.4e}; perturbations increase it: "
           + ", ".join(f"{k}:{v}" for k, v in increased.items()))
    assert ok, (
        "published (A,B) = (2/3,-2/5) is not the residual minimizer; "
        "the combining condition gives (2/3,-2/3) (see notes)"
    )


def test_criterion_6_readout_separation():
    z12 = string(1j, [g("0", 1), g("0", 2)])
    worst_sine = 0.0
    for flux0 in (0.3, 1.1, 2.7):
        cfg = readout.config_for_parity(z12, direct=0.02, flux0=flux0)
        a = readout.two_lead_conductance(cfg, +1)
        b = readout.two_lead_conductance(cfg, -1)
        lhs = a.value - b.value
        rhs = 2 * a.details["g1"] * np.sin(flux0 - a.details["phi00"])
        worst_sine = max(worst_sine, abs(lhs - rhs))

    four = string(1, [g("0", c) for c in range(1, 5)])
    cfg4 = readout.config_for_parity(
        four, couplings={1: 0.05, 2: 0.04, 3: 0.06, 4: 0.05},
        direct=0.02, flux0=0.3)
    phi12, phi43 = readout.tune_fluxes(cfg4)
    tuned = dataclasses.replace(cfg4.four_lead, flux12=phi12, flux43=phi43)
    cfg_t = readout.LeadConfig(cfg4.leads, four, four_lead=tuned)
    res = {p: readout.joint_conductance(cfg_t, p)
           for p in [(1, 1), (1, -1), (-1, 1), (-1, -1)]}
    n_distinct = len({round(r.value, 13) for r in res.values()})
    a3 = abs(res[(1, 1)].decomposition["a3_term"])
    resid12 = abs(res[(1, 1)].decomposition["a1_term"]) \
        + abs(res[(1, 1)].decomposition["a2_term"])

    pp = string(1j, [g("pi", 1), g("pi", 2)])
    xs = np.linspace(0.0, 5.0, 21)
    contrast = []
    for x in xs:
        c = readout.config_for_parity(pp, direct=0.02, flux0=0.9, flux1=float(x))
        contrast.append((readout.two_lead_conductance(c, 1).value
                         - readout.two_lead_conductance(c, -1).value) / 2)
    contrast = np.array(contrast)
    basis = jv(1.0, xs)
    coef = float(basis @ contrast) / float(basis @ basis)
    bessel_rel = float(np.abs(contrast - coef * basis).max()
                       / np.abs(contrast).max())

    ok = worst_sine < 1e-10 and n_distinct == 2 \
        and resid12 < 1e-10 * a3 and bessel_rel < 1e-6
    assert report(6, ok, f"sine identity dev {worst_sine:.1e}, tuned outcomes "
                         f"{n_distinct}, a1+a2 vs a3 {resid12 / a3:.1e}, "
                         f"Bessel fit rel {bessel_rel:.1e}")


def test_criterion_7_decoupling_subset():
    p = lattice.LatticeParams(
        Nx=4, Ny=2, Jx=np.pi / 2 + 0.3, Jy=0.1, dJ=0.1,
        Dx=np.pi / 2 + 0.3, Dy=0.5, dDy=0.5,
        mu0=np.pi / 2 + 0.12, dmu0=0.0, mu1=1.0, dmu1=0.0)
    chain = lattice.reduce_to_1d(p)
    spec1 = floquet.quasienergy_spectrum(floquet.assemble_sambe(chain, 4))
    spec2 = floquet.quasienergy_spectrum(
        floquet.assemble_sambe(lattice.build_realspace_bdg(p), 4))
    worst = max(
        float(floquet.circular_distance(spec2.quasienergies, e, W).min())
        for e in spec1.quasienergies)
    ok = worst < 1e-9
    assert report(7, ok, f"max chain-vs-2D quasienergy deviation {worst:.2e}")


def test_criterion_8_reproducibility(tmp_path):
    cfg = {"protocol": {"id": "cnot", "mode": "sample", "seed": 123,
                        "n_inputs": 2, "samples": 4}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    blobs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        r = subprocess.run(
            [sys.executable, "-m", "cornerlab.cli", "protocol",
             "--config", str(path), "--out", str(out)],
            capture_output=True, text=True)
        assert r.returncode == 0
        blobs.append((out / "protocol_log.json").read_bytes()
                     + (out / "protocol_report.json").read_bytes())
    ok = blobs[0] == blobs[1]
    assert report(8, ok, f"byte-identical outputs: {ok}")
