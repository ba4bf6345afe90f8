import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerlab import lattice
from cornerlab.lattice import (
    LatticeParams,
    build_momentum_bdg,
    build_realspace_bdg,
    check_symmetry,
    fig_s1_params,
    kitaev_chain_bdg,
    momentum_grid,
    reduce_to_1d,
    row_block,
    sigma_eta,
    symmetry_op,
)


def small_params(**over):
    base = dict(Nx=1, Ny=1, Jx=0.7, Jy=0.2, dJ=0.05, Dx=0.6, Dy=0.3,
                dDy=0.1, mu0=0.4, dmu0=0.02, mu1=1.1, dmu1=0.3)
    base.update(over)
    return LatticeParams(**base)


def random_params(rng, **over):
    vals = {k: float(rng.normal()) for k in
            ("Jx", "Jy", "dJ", "Dx", "Dy", "dDy", "mu0", "dmu0", "mu1", "dmu1")}
    vals.update(Nx=2, Ny=2)
    vals.update(over)
    return LatticeParams(**vals)


def test_param_validation():
    with pytest.raises(ValueError):
        small_params(Nx=0)
    with pytest.raises(ValueError):
        small_params(mu0=np.nan)
    with pytest.raises(ValueError):
        LatticeParams(**{**small_params().__dict__, "boundary": "twisted"})


def test_realspace_dimensions_and_drive_weights():
    p = small_params()
    bdg = build_realspace_bdg(p)
    assert bdg.dim == 8
    h1 = np.asarray(bdg.component(1))
    # drive sits on the site diagonal in the Nambu-z channel with weight
    # (mu1 +- dmu1)/2: odd rows (j=1) carry the minus sign
    offdiag = h1 - np.diag(np.diag(h1))
    assert np.abs(offdiag).max() == 0
    diag = np.diag(h1).reshape(-1, 2)
    for site, (part, hole) in enumerate(diag):
        y = site // 2
        expect = (p.mu1 - p.dmu1) / 2 if y == 0 else (p.mu1 + p.dmu1) / 2
        assert part == pytest.approx(expect, abs=1e-15)
        assert hole == pytest.approx(-expect, abs=1e-15)


def test_no_drive_means_no_harmonics():
    bdg = build_realspace_bdg(small_params(mu1=0.0, dmu1=0.0))
    assert np.abs(np.asarray(bdg.component(1))).max() == 0
    assert np.abs(np.asarray(bdg.component(-1))).max() == 0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_instantaneous_hermiticity(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    bdg = build_realspace_bdg(p)
    for t in rng.uniform(0, 1, size=10):
        h = bdg.at_time(t)
        assert np.abs(h - h.conj().T).max() < 1e-12


def test_momentum_block_basics(rng):
    p = random_params(rng)
    mb = build_momentum_bdg(p, 0.3, -1.2)
    assert mb.dim == 4
    h0 = np.asarray(mb.component(0))
    assert np.abs(h0 - h0.conj().T).max() < 1e-12


def test_momentum_sigma_x_coefficient_at_ky_pi():
    # with Jy = dJ the intra-cell hopping J_{y,-} vanishes and the
    # sigma_x eta_z coefficient at ky = pi is -(0 + J_{y,+} cos pi) = J_{y,+}
    p = small_params(Jy=0.2, dJ=0.2)
    h0 = np.asarray(build_momentum_bdg(p, 0.17, np.pi).component(0))
    coeff = np.trace(h0 @ sigma_eta("x", "z")).real / 4
    assert coeff == pytest.approx(p.Jy + p.dJ, abs=1e-12)


def test_realspace_momentum_consistency():
    # periodic 8x8 lattice: the static spectrum equals the union over the
    # Bloch grid, and likewise for the drive harmonic
    p = fig_s1_params(Nx=2, Ny=2, boundary="open")
    p = LatticeParams(**{**p.__dict__, "boundary": "periodic-both"})
    bdg = build_realspace_bdg(p)
    for m in (0, 1):
        real = np.sort(np.linalg.eigvalsh(np.asarray(bdg.component(m))))
        kvals = []
        for kx, ky in momentum_grid(p):
            km = build_momentum_bdg(p, kx, ky)
            kvals.extend(np.linalg.eigvalsh(np.asarray(km.component(m))))
        assert np.abs(real - np.sort(kvals)).max() < 1e-9


def test_particle_hole_symmetry_random():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        p = random_params(rng)
        worst = max(worst, check_symmetry(p, symmetry_op("particle-hole")))
    assert worst < 1e-10


def test_emergent_symmetries_fine_tuned():
    fine = small_params(Jy=0.0, dJ=0.0, dmu0=0.0, dmu1=0.0)
    for kind in ("chiral", "time-reversal", "inversion"):
        assert check_symmetry(fine, symmetry_op(kind)) < 1e-10


def test_symmetries_broken_at_benchmark_point():
    p = fig_s1_params(Nx=2, Ny=2)
    assert check_symmetry(p, symmetry_op("chiral")) > 1e-3
    assert check_symmetry(p, symmetry_op("particle-hole")) < 1e-10


def test_reduce_to_1d_requires_decoupling():
    with pytest.raises(ValueError, match="decoupling"):
        reduce_to_1d(small_params(Jy=0.2, dJ=0.1))


def test_reduce_to_1d_matches_row_block():
    p = small_params(Nx=3, Ny=2, Jy=0.1, dJ=0.1, Dy=0.5, dDy=0.5)
    chain = reduce_to_1d(p)
    full = build_realspace_bdg(p)
    row = row_block(full, p, 1)
    for m in (-1, 0, 1):
        assert np.abs(np.asarray(chain.component(m))
                      - np.asarray(row.component(m))).max() < 1e-14


def test_decoupled_rows_have_no_external_elements():
    p = small_params(Nx=2, Ny=3, Jy=0.13, dJ=0.13, Dy=0.4, dDy=0.4)
    bdg = build_realspace_bdg(p)
    Lx, Ly = p.shape
    for j in (1, Ly):
        sites = [(j - 1) * Lx + x for x in range(Lx)]
        sel = np.array([2 * s + n for s in sites for n in (0, 1)])
        rest = np.array([i for i in range(bdg.dim) if i not in set(sel)])
        for m in (-1, 0, 1):
            h = np.asarray(bdg.component(m))
            assert np.abs(h[np.ix_(sel, rest)]).max() == 0


def test_kitaev_chain_static_limit():
    bdg = kitaev_chain_bdg(4, J=1.0, Delta=1.0, mu0=0.0, mu1=0.0)
    ev = np.linalg.eigvalsh(np.asarray(bdg.component(0)))
    # J = Delta, mu = 0: exact zero modes and a gapped bulk at +-2J
    assert np.abs(ev[np.abs(ev) < 1e-9]).size == 2


def test_boundary_flags():
    p_open = small_params(Nx=2, Ny=2, boundary="open")
    p_px = LatticeParams(**{**p_open.__dict__, "boundary": "periodic-x"})
    h_open = np.asarray(build_realspace_bdg(p_open).component(0))
    h_px = np.asarray(build_realspace_bdg(p_px).component(0))
    # wrap bonds appear only with the periodic flag
    assert np.abs(h_px - h_open).max() > 0
    Lx = 4
    a, b = 0, Lx - 1     # sites on opposite x-edges, same row
    blk = h_px[2 * a:2 * a + 2, 2 * b:2 * b + 2]
    assert np.abs(blk).max() > 0
    blk_open = h_open[2 * a:2 * a + 2, 2 * b:2 * b + 2]
    assert np.abs(blk_open).max() == 0


def test_harmonics_export_round_trip(tmp_path):
    bdg = build_realspace_bdg(small_params())
    path = tmp_path / "bdg.npz"
    bdg.save_npz(path)
    back = lattice.DrivenBdG.load_npz(path)
    assert back.omega == bdg.omega
    for m in (-1, 0, 1):
        assert np.abs(np.asarray(back.component(m))
                      - np.asarray(bdg.component(m))).max() == 0
