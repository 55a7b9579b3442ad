import math

import numpy as np
import pytest

import cvshadow


def test_states_and_projection():
    rho = cvshadow.state("coherent", alpha_re=0.5)
    assert rho.shape[0] == rho.shape[1]
    assert abs(np.trace(rho) - 1) < 1e-10
    p = cvshadow.project(rho, 3)
    assert p.shape == (3, 3)
    assert np.array_equal(cvshadow.project(p, 3), p)


def test_norm_chain():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = x + x.conj().T
    inf = cvshadow.infinity_norm(x)
    one = cvshadow.trace_norm(x)
    assert inf <= one + 1e-12
    assert one <= 4 * inf + 1e-12
    assert inf == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(x))))


def test_vacuum_wigner_peak():
    q, p, w = cvshadow.wigner(cvshadow.state("vacuum"), extent=2.0, points=41)
    assert w[20, 20] == pytest.approx(1 / math.pi)


def test_homodyne_round_trip():
    rho = cvshadow.state("vacuum", min_cutoff=4)
    samples = cvshadow.simulate_homodyne(rho, 20000, seed=3)
    assert samples.shape == (20000, 2)
    again = cvshadow.simulate_homodyne(rho, 20000, seed=3)
    assert np.array_equal(samples, again)
    est = cvshadow.homodyne_estimate(samples, 3)
    assert cvshadow.infinity_norm(est - cvshadow.project(rho, 3)) < 0.1


def test_pnr_estimate_counts_discards():
    rho = cvshadow.state("vacuum", min_cutoff=3)
    n, alpha = cvshadow.simulate_pnr(rho, 2000, r=0.0, alpha_max=2.0, seed=1)
    assert len(n) == len(alpha) == 2000
    est = cvshadow.pnr_estimate(n, alpha, 2, r=0.0, alpha_max=2.0)
    assert np.allclose(est, est.conj().T)


def test_bounds():
    assert cvshadow.homodyne_T(0.1, 0.1, 2) == pytest.approx(6400 * math.log(40), rel=1e-12)
    assert cvshadow.lemma1_T(0.1, 0.1, 1, 1.0, 0.0) == pytest.approx(200 * math.log(20), rel=1e-12)
    with pytest.raises(ValueError):
        cvshadow.homodyne_T(-0.1, 0.1, 2)


def test_reconstruct_file(tmp_path):
    rho = cvshadow.state("vacuum", min_cutoff=4)
    samples = cvshadow.simulate_homodyne(rho, 5000, seed=2)
    path = tmp_path / "vac.csv"
    with open(path, "w") as f:
        f.write("# test\ntheta,x\n")
        for t, x in samples:
            f.write(f"{float(t)!r},{float(x)!r}\n")
    est, report = cvshadow.reconstruct(path, 3)
    assert report["schema_version"] == 1
    assert report["shots"] == 5000
    assert np.allclose(est, cvshadow.homodyne_estimate(samples, 3))

    bad = tmp_path / "bad.csv"
    bad.write_text("theta,x\n0.1,oops\n")
    with pytest.raises(ValueError, match="bad.csv:2"):
        cvshadow.reconstruct(bad, 3)


def test_scaling_report():
    report = cvshadow.run_scaling(
        {"N_list": [1, 2, 3], "epsilon": 0.3, "trials_per_T": 20, "root_seed": 4, "threads": 1}
    )
    assert report["schema_version"] == 1
    assert [r["N"] for r in report["results"]] == [1, 2, 3]
    assert report["fit"] is not None
