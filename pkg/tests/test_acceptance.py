"""Acceptance suite: one test per release criterion, tolerances pinned.

Each test prints one `[acceptance] <name>: PASS` line when it holds (run
pytest with -s to see them); a failed assertion is the FAIL line.
"""

import json

import numpy as np
import pytest
from scipy.optimize import brentq

from spt import cli, dicke, fields, green, quadratic
from spt.model import LorentzModel, ModeParams

GRID = np.linspace(0.5, 2.0, 20)
LAM_GRID = np.linspace(0.0, 2.0, 20)
QUAD_ON = quadratic.TermFlags(include_quadratic_term=True)
QUAD_OFF = quadratic.TermFlags(include_quadratic_term=False)


def report(name):
    print(f"\n[acceptance] {name}: PASS")


@pytest.fixture(scope="module")
def gauge_grid_spectra():
    """Coulomb and dipole spectra over the 20x20x20 acceptance grid."""
    out = []
    for wa in GRID:
        for wc in GRID:
            for lam in LAM_GRID:
                params = ModeParams(float(wa), float(wc), float(lam))
                fc = quadratic.build_quadratic(params, quadratic.GaugeChoice.COULOMB,
                                               QUAD_ON)
                fd = quadratic.build_quadratic(params, quadratic.GaugeChoice.DIPOLE,
                                               QUAD_ON)
                out.append((float(wa), float(wc), float(lam),
                            quadratic.symplectic_spectrum(fc),
                            quadratic.symplectic_spectrum(fd)))
    return out


def test_gauge_invariance_on_grid(gauge_grid_spectra):
    worst = 0.0
    for _, _, _, sc, sd in gauge_grid_spectra:
        rel = np.abs(sc - sd) / np.abs(sc)
        worst = max(worst, float(rel.max()))
    assert worst < 1e-9
    report(f"gauge invariance on 20^3 grid (max rel discrepancy {worst:.2e})")


def test_no_go_fingerprint_on_grid(gauge_grid_spectra):
    worst = 0.0
    for wa, wc, lam, sc, _ in gauge_grid_spectra:
        product = float((sc[0] ** 2 * sc[1] ** 2).real)
        worst = max(worst, abs(product - (wa * wc) ** 2) / (wa * wc) ** 2)
        form = quadratic.build_quadratic(ModeParams(wa, wc, lam),
                                         quadratic.GaugeChoice.COULOMB, QUAD_ON)
        status = quadratic.classify_stability(form).status
        assert status is quadratic.Stability.STABLE
    assert worst < 1e-9
    report(f"no-go fingerprint w+^2 w-^2 = wa^2 wc^2 (max rel dev {worst:.2e})")


def test_instability_onset_without_quadratic_terms():
    for wa, wc in ((1.0, 1.0), (1.0, 4.0), (2.0, 0.5), (0.7, 1.3)):
        lc_coulomb = quadratic.critical_coupling(
            wa, wc, quadratic.GaugeChoice.COULOMB, QUAD_OFF)
        lc_dipole = quadratic.critical_coupling(
            wa, wc, quadratic.GaugeChoice.DIPOLE, QUAD_OFF)
        assert lc_coulomb == pytest.approx(0.5 * np.sqrt(wc / wa), abs=1e-6)
        assert lc_dipole == pytest.approx(0.5 * np.sqrt(wa / wc), abs=1e-6)
    assert quadratic.critical_coupling(
        1.0, 1.0, quadratic.GaugeChoice.COULOMB, QUAD_OFF) == pytest.approx(0.5, abs=1e-6)
    assert quadratic.critical_coupling(
        1.0, 1.0, quadratic.GaugeChoice.DIPOLE, QUAD_OFF) == pytest.approx(0.5, abs=1e-6)
    report("critical couplings match 0.5 sqrt(wc/wa) and 0.5 sqrt(wa/wc)")


def fock_longitudinal_frequency(wa, wc, lam, n_max):
    n = np.arange(n_max + 1)
    a = np.diag(np.sqrt(n[1:]), 1)
    x = a + a.T
    h = wa * np.diag(n.astype(float)) + wc * lam ** 2 * (x @ x)
    ev = np.linalg.eigvalsh(h)
    return float(ev[1] - ev[0])


def test_longitudinal_mode_stable_and_matches_oracles():
    lam_grid = np.linspace(0.0, 10.0, 26)
    for lam in lam_grid:
        params = ModeParams(1.0, 1.0, float(lam))
        form = quadratic.build_quadratic(params, quadratic.GaugeChoice.LONGITUDINAL,
                                         QUAD_ON)
        assert quadratic.classify_stability(form).status is quadratic.Stability.STABLE
        freq = quadratic.symplectic_spectrum(form)[0].real
        closed = np.sqrt(1.0 + 4.0 * lam ** 2)
        assert freq == pytest.approx(closed, rel=1e-9)
    # truncated-Fock oracle; n_max = 200 is itself converged to 1e-9 only up
    # to lam ~ 6, beyond that the oracle needs n_max = 400 (see decisions
    # ledger), the tolerance stays 1e-9 throughout
    for lam in (0.0, 1.0, 3.0, 6.0):
        freq = quadratic.symplectic_spectrum(quadratic.build_quadratic(
            ModeParams(1.0, 1.0, lam), quadratic.GaugeChoice.LONGITUDINAL,
            QUAD_ON))[0].real
        assert freq == pytest.approx(fock_longitudinal_frequency(1.0, 1.0, lam, 200),
                                     rel=1e-9)
    for lam in (8.0, 10.0):
        freq = quadratic.symplectic_spectrum(quadratic.build_quadratic(
            ModeParams(1.0, 1.0, lam), quadratic.GaugeChoice.LONGITUDINAL,
            QUAD_ON))[0].real
        assert freq == pytest.approx(fock_longitudinal_frequency(1.0, 1.0, lam, 400),
                                     rel=1e-9)
    report("longitudinal mode stable on [0, 10], frequency matches "
           "sqrt(wa^2 + 4 wa wc lam^2) and the Fock oracle to 1e-9")


def test_dicke_parity_commutator():
    worst = 0.0
    for form in dicke.CouplingForm:
        for quad in dicke.QuadTerm:
            cfg = dicke.DickeConfig(n_atoms=5, fock_cutoff=8, g=0.9,
                                    coupling_form=form, quad_term=quad)
            h = dicke.build_dicke(cfg)
            pv = dicke.parity_diagonal(cfg)
            worst = max(worst, float(np.abs(h * pv[None, :]
                                            - pv[:, None] * h).max()))
    assert worst < 1e-12
    report(f"parity commutator max-abs {worst:.1e} < 1e-12")


def test_dicke_a2_suppression_pointwise():
    g_grid = np.linspace(0.0, 3.0, 7)
    for n_atoms in (4, 8, 12):
        rows = {}
        for quad in (dicke.QuadTerm.NONE, dicke.QuadTerm.A2):
            cfg = dicke.DickeConfig(n_atoms=n_atoms,
                                    coupling_form=dicke.CouplingForm.Y_COUPLING,
                                    quad_term=quad)
            rows[quad] = dicke.sweep_order_parameter(cfg, g_grid,
                                                     check_convergence=False)
        for none_row, a2_row in zip(rows[dicke.QuadTerm.NONE],
                                    rows[dicke.QuadTerm.A2]):
            assert a2_row.fock_cutoff == none_row.fock_cutoff
            assert a2_row.photon_density <= none_row.photon_density + 1e-12
    report("A^2 term suppresses photon density pointwise for N in {4, 8, 12}")


def test_dicke_gap_minimum_converges_to_half():
    # gap location measured on the first excitation above the emerging
    # parity doublet (E2 - E0); E1 - E0 collapses to the doublet splitting
    # beyond the transition and carries no minimum (see decisions ledger)
    g_grid = np.arange(0.30, 1.2001, 0.01)
    locations = {}
    for n_atoms in (4, 8, 16):
        cfg = dicke.DickeConfig(n_atoms=n_atoms,
                                coupling_form=dicke.CouplingForm.Y_COUPLING)
        rows = dicke.sweep_order_parameter(cfg, g_grid, check_convergence=False)
        gaps = np.array([row.gap_above_doublet for row in rows])
        locations[n_atoms] = float(g_grid[int(np.argmin(gaps))])
    d4 = abs(locations[4] - 0.5)
    d8 = abs(locations[8] - 0.5)
    d16 = abs(locations[16] - 0.5)
    assert d16 < d8 < d4
    report(f"gap minimum location {locations} converges toward 0.5 "
           "monotonically in N")


def test_bosonization_commutator_deviation():
    for n_atoms in range(1, 13):
        for n_exc in range(n_atoms + 1):
            dev = dicke.commutator_deviation(n_atoms, n_exc)
            assert dev == pytest.approx(2.0 * n_exc / n_atoms, abs=1e-12)
    report("commutator deviation equals 2n/N to 1e-12 for all N <= 12")


def test_projection_identities():
    for size in (16, 32):
        spacing = 1.0 / size
        worst = 0.0
        for seed in range(100):
            rng = np.random.default_rng([42, size, seed])
            field = fields.VectorField3D(
                values=rng.standard_normal((size, size, size, 3)),
                spacing=spacing)
            trans, long_ = fields.helmholtz_decompose(field)
            comp = float(np.abs(trans.values + long_.values
                                - field.values).max())
            i_full, i_t, i_l = fields.energy_integrals(field)
            cross = spacing ** 3 * float(np.sum(trans.values * long_.values))
            worst = max(worst, comp, abs(cross) / i_full,
                        abs(i_full - i_t - i_l) / i_full)
        assert worst < 1e-10

    # disjoint-lattice energy balance and the one-flip nonlocality statement
    size, spacing = 32, 1.0 / 32
    positions = [(0.25, 0.25, 0.25), (0.75, 0.25, 0.25), (0.25, 0.75, 0.25),
                 (0.25, 0.25, 0.75), (0.75, 0.75, 0.75)]

    def lattice(orientations):
        return fields.DipoleLattice(sites=tuple(
            fields.DipoleSite(position=p, orientation=o, amplitude=1.0,
                              radius=0.15)
            for p, o in zip(positions, orientations)))

    base = lattice([(0, 0, 1)] * 5)
    flipped = lattice([(0, 0, 1)] * 4 + [(0, 0, -1)])
    f_base = fields.rasterize(base, size, spacing, require_disjoint=True)
    f_flip = fields.rasterize(flipped, size, spacing, require_disjoint=True)
    self_base = np.diag(fields.overlap_matrix(base, size, spacing))
    self_flip = np.diag(fields.overlap_matrix(flipped, size, spacing))
    i_full, i_t, i_l = fields.energy_integrals(f_base)
    assert abs(i_full - self_base.sum()) / i_full < 1e-10
    assert abs(i_l - (self_base.sum() - i_t)) / i_full < 1e-10
    _, i_t2, _ = fields.energy_integrals(f_flip)
    assert np.abs(self_base - self_flip).max() < 1e-12
    assert abs(i_t2 - i_t) > 1e-6
    report("projection identities < 1e-10 at L in {16, 32}; disjoint-lattice "
           "energy balance and one-flip nonlocality hold")


def test_green_function_causality_and_instability():
    # passive mirrored Lorentz cavity: no UHP zeros over the documented window
    lor = LorentzModel(strength=1.0, omega0=1.0, gamma=1e-3)
    stack = green.LayerStack(
        layers=(green.Layer(np.pi, green.LorentzMedium(lor)),),
        boundary=green.Boundary.PERFECT_MIRRORS)
    d = green.DispersionFunction.from_stack(stack)
    region = green.Rectangle(0.01, 10.0, 1e-6, 5.0)
    assert green.winding_count(d, region) == 0

    # overcritical bulk: one UHP pole matching the 1D kappa oracle
    over = LorentzModel(strength=-2.0, omega0=1.0, gamma=0.0)
    d_bulk = green.DispersionFunction.bulk_medium(over, 0.2)
    kappa = brentq(lambda k: k * k * (1.0 - 2.0 / (1.0 + k * k)) + 0.04,
                   0.5, 1.0, xtol=1e-14)
    census = green.locate_poles(d_bulk, green.Rectangle(-0.3, 0.3, 0.5, 1.2))
    assert census.winding == 1
    assert len(census.poles) == 1
    assert abs(census.poles[0] - 1j * kappa) < 1e-8

    # Kramers-Kronig residual at the documented grid, halving under doubling
    model = LorentzModel(strength=1.0, omega0=1.0, gamma=0.1)
    r1 = green.kk_residual(model, np.linspace(0.0, 50.0, 10_000))
    r2 = green.kk_residual(model, np.linspace(0.0, 50.0, 20_000))
    assert r1 < 1e-2
    assert r2 < 0.55 * r1
    report(f"causality: passive winding 0, overcritical pole at i*{kappa:.6f} "
           f"to 1e-8, KK residual {r1:.2e} halving to {r2:.2e}")


def test_cli_determinism(tmp_path):
    cfg = {"command": "projection-check",
           "parameters": {"grid_size": 16, "n_fields": 8}, "seed": 42}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert cli.main(["projection-check", "--config", str(cfg_path),
                     "--output", str(out1), "--threads", "2"]) == 0
    assert cli.main(["projection-check", "--config", str(cfg_path),
                     "--output", str(out2), "--threads", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    cfg2 = {"command": "gauge-check",
            "parameters": {"lambda_max": 2.0, "steps": 50}, "seed": 42}
    cfg_path.write_text(json.dumps(cfg2))
    assert cli.main(["gauge-check", "--config", str(cfg_path),
                     "--output", str(out1)]) == 0
    assert cli.main(["gauge-check", "--config", str(cfg_path),
                     "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    report("repeated CLI runs with identical config+seed are byte-identical")
