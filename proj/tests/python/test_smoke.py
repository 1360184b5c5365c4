import numpy as np
import pytest

import svint


def test_version():
    assert svint.__version__ == "0.1.0"


def test_geometry_roundtrip():
    xi = np.array([0.1, -0.2, 0.3])
    r = svint.tau(svint.Retraction.Exponential, xi)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)
    assert np.allclose(svint.tau_inv(svint.Retraction.Exponential, r), xi, atol=1e-12)
    v = np.array([1.0, 2.0, 3.0])
    assert np.allclose(svint.vee(svint.hat(v)), v)


def test_catalog_and_simulation():
    names = {m["name"] for m in svint.list_models()}
    assert "oscillator" in names
    out = svint.simulate(
        "oscillator",
        "svi",
        np.array([1.0]),
        np.array([0.0]),
        h=0.1,
        steps=10,
        seed=7,
        params={"sigma": 0.0},
    )
    assert out["q"].shape == (11, 1)
    # energy oscillates near the shell with amplitude of order h, no decay
    energy = 0.5 * out["p"][:, 0] ** 2 + 0.5 * out["q"][:, 0] ** 2
    assert np.all(np.abs(energy - 0.5) < 0.5 * 0.1)


def test_unknown_model_raises():
    with pytest.raises(svint.UnknownModel):
        svint.simulate("nope", "svi", np.zeros(1), np.zeros(1), h=0.1, steps=1)
