import json
import math

import numpy as np
import pytest

import ounls


def nondiv(n_x=512, n_alpha=24, p=4):
    return ounls.Discretization(
        ounls.ModelSpec(ounls.Model.NonDiv, p=p),
        ounls.DiscretizationSpec(n_x=n_x, n_alpha=n_alpha),
    )


def test_gaussian_mass_matches_closed_form():
    disc = nondiv()
    u = disc.gaussian()
    assert u.shape == (512, 24)
    # ∫e^{-x²}dx · ∫e^{-α²/2}e^{-α²/2}dα = √π · √π
    assert disc.mass(u) == pytest.approx(math.pi, rel=1e-8)


def test_linear_flow_is_unitary_and_reversible():
    disc = nondiv()
    u = disc.random(seed=3, band=3)
    v = disc.linear_flow(u, 0.7)
    assert disc.mass(v) == pytest.approx(disc.mass(u), rel=1e-12)
    back = disc.linear_flow(v, -0.7)
    # Nodal values grow like e^{α²/4} at the outer Hermite nodes, so compare in
    # the native norm rather than pointwise.
    assert disc.mass(back - u) < 1e-22 * disc.mass(u)


def test_integrate_conserves_mass():
    disc = nondiv()
    u = disc.gaussian(amplitude=0.5)
    out = disc.integrate(u, horizon=0.2, samples=4, dt=1e-3)
    masses = [r["mass"] for r in out["records"]]
    assert len(masses) == 5
    assert max(abs(m - masses[0]) for m in masses) < 1e-9 * masses[0]
    assert not out["blowup"]
    assert out["field"].shape == u.shape


def test_div_virial_defined_and_nondiv_nan():
    div = ounls.Discretization(
        ounls.ModelSpec(ounls.Model.Div, p=2),
        ounls.DiscretizationSpec(n_x=128, div_nodes=65, div_half_width=8.0),
    )
    u = div.gaussian()
    assert div.virial(u) > 0.0
    rec = nondiv().diagnose(nondiv().gaussian())
    assert math.isnan(rec["virial"])


def test_rejects_odd_power():
    with pytest.raises(ValueError, match="positive even integer"):
        ounls.ModelSpec(ounls.Model.NonDiv, p=3)


def test_admissibility():
    ounls.check_admissible(1, 8.0, 4.0)
    with pytest.raises(ValueError):
        ounls.check_admissible(2, 2.0, math.inf)
    with pytest.raises(ValueError):
        ounls.check_admissible(1, 4.0, 4.0)


def test_hermite_basis_weights_sum():
    b = ounls.HermiteBasis.build(20)
    assert sum(b.weights) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-13)
    assert ounls.ou_eigen_error(b, 16) < 1e-10


def test_config_roundtrip_and_errors():
    cfg = json.loads(ounls.resolved_config("", ["model.p=2", "run.scenario=identity"]))
    assert cfg["model"]["p"] == 2
    with pytest.raises(ValueError):
        ounls.resolved_config("[model]\nbogus = 1\n")


def test_run_identity_scenario():
    rep = ounls.run_scenario("", ["run.scenario=identity", "grid.div_nodes=129", "grid.div_half_width=10"])
    assert rep["scenario"] == "identity"
    assert rep["checks"]
    assert all(c["pass"] for c in rep["checks"])


def test_git_blob_hash_matches_git():
    assert ounls.git_blob_hash(b"") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"
    assert ounls.git_blob_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"
