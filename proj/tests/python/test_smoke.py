import json
import math

import cylwalk as cw


def test_exponent_functions():
    assert math.isclose(cw.alpha_star(3), 2.0 / 9.0, rel_tol=1e-12)
    assert math.isclose(cw.phi(0.5, 3), 0.125, rel_tol=1e-12)
    assert math.isclose(cw.zeta(0.5, 3), 1.125, rel_tol=1e-12)
    assert math.isclose(cw.ldp_rate(0.2, 0.5, 3), 1.7, rel_tol=1e-12)
    assert cw.exponent_identity_residual(3) <= 1e-12


def test_lattice_and_walk():
    nbrs = cw.neighbors([0, 0, 0], 0, 3, 5)
    assert len(nbrs) == 8
    assert ([1, 0, 0], 0) in [(list(u), z) for u, z in nbrs]

    assert math.isclose(cw.drift_from_alpha(10, 3, 1.0), 1e-3, rel_tol=1e-12)

    w, up, down = cw.path_weight([([0], 0), ([0], 1), ([0], 2)], 0.3, 1, 3)
    assert (up, down) == (2, 0)
    assert math.isclose(w, 1.3**2, rel_tol=1e-12)


def test_disconnection():
    slice_sites = [([u], 0) for u in range(4)]
    assert cw.disconnects_cylinder(slice_sites, 1, 4)
    assert not cw.disconnects_cylinder(slice_sites[:-1], 1, 4)

    path = [([0], 0), ([0], -1), ([0], 0), ([0], 1), ([0], 0), ([1], 0)]
    assert cw.disconnection_time_of_path(path, 1, 2) == 5

    out = cw.simulate_disconnection_time(1, 2, 2.0, 10_000, seed=7)
    again = cw.simulate_disconnection_time(1, 2, 2.0, 10_000, seed=7)
    assert out == again  # replica streams are reproducible
    assert not out["censored"]
    assert out["time"] <= 50


def test_spectra_and_green():
    spec = cw.torus_spectrum(3, 1)
    assert math.isclose(spec[0], 1.0, abs_tol=1e-12)
    assert math.isclose(spec[1], -0.5, abs_tol=1e-12)
    assert math.isclose(cw.eigentime_u(3, 1), 4.0 / 3.0, rel_tol=1e-12)
    assert cw.cover_tail_bound(4.0 / 3.0, 9, 5) == 9.0

    g00 = cw.green_slab(1, 5, 4, ([0], 0), ([0], 0))
    assert g00 >= 1.0


def test_experiment_driver():
    kv = "\n".join(
        [
            "kind=cover",
            "d=1",
            "n=4",
            "alpha=2",
            "beta=1",
            "replicas=80",
            "budget-steps=10000",
            "seed=5",
            "gamma=0.5",
            "gamma-prime=0.75",
            "slab-a=8",
            "xi=0",
            "fit-coords=auto",
            "out=unused",
            "format=csv",
            "svg=0",
        ]
    )
    summary = json.loads(cw.run_experiment_kv(kv))
    assert summary["kind"] == "cover"
    assert summary["per_N"][0]["N"] == 4
    assert summary["per_N"][0]["u"] > 0
