import json
import math

import numpy as np
import pytest

import pilotwave as pw


def fn3():
    return pw.WaveFunctionSpec.published("fn3", 1.0)


def test_module_basics():
    assert pw.PERIOD == pytest.approx(2 * math.pi)
    assert pw.canonical_points()[2] == (-1.5, 1.5)
    assert len(pw.square_cohort((1.5, 1.5))) == 13
    assert "fn7" in pw.phase_set_names()
    assert "fn3-eps1" in pw.scenario_names()


def test_spec_round_trip():
    spec = fn3()
    assert pw.WaveFunctionSpec.parse(spec.serialize()) == spec
    assert spec.modes()[0] == (0, 0)
    inhom = pw.WaveFunctionSpec.published("fn4", {"01": 0.2, "10": 0.15, "11": 0.1})
    assert sorted(inhom.amplitudes()) == [0.1, 0.15, 0.2, 1.0]
    with pytest.raises(ValueError):
        pw.WaveFunctionSpec.published("fn3", 2.0)


def test_field_values():
    spec = fn3()
    value = pw.psi(spec, 0.3, -0.2, 0.9)
    assert value.real == pytest.approx(0.409680613271, abs=1e-10)
    assert pw.born_density(spec, 0.3, -0.2, 0.9) == pytest.approx(abs(value) ** 2)
    v1, v2 = pw.velocity(spec, -1.5, 1.5, 0.0)
    assert v1 == pytest.approx(-0.214500287704, abs=1e-10)
    assert v2 == pytest.approx(0.238750978952, abs=1e-10)


def test_trajectory():
    traj = pw.integrate(fn3(), (-0.5, 0.0), 30)
    assert traj.complete
    samples = traj.samples
    assert samples.shape == (3001, 3)
    assert np.allclose(samples[0], [0.0, -0.5, 0.0])
    label, growth, widths, heights = pw.classify(traj, [5, 10, 20, 30])
    assert label in ("Confined", "Unconfined")
    assert all(b >= a for a, b in zip(widths, widths[1:]))
    assert 0.0 < pw.coverage(traj, fn3()) <= 1.0


def test_stationary_and_errors():
    still = pw.WaveFunctionSpec.published("fn3", 0.0)
    traj = pw.integrate(still, (1.5, 1.5), 10)
    assert np.all(traj.samples[:, 1:] == [1.5, 1.5])
    with pytest.raises(ValueError):
        pw.integrate(fn3(), (9.0, 0.0), 1)


def test_ensemble_hbar():
    spec = fn3()
    disk = pw.sample_ensemble("uniform-disk:1", 2000, 3)
    assert disk == pw.sample_ensemble("uniform-disk:1", 2000, 3)
    born = pw.sample_ensemble("born", 20000, 3, spec)
    assert pw.hbar(born, spec) < pw.hbar(disk, spec)


def test_run_scenario(tmp_path):
    summary = pw.run_scenario("ground-eps0", tmp_path, periods=25, write_files=False)
    assert summary["expectations_met"] is True
    assert len(summary["starts"]) == 10
    on_disk = json.loads((tmp_path / "ground-eps0@25T" / "summary.json").read_text())
    assert on_disk == summary
