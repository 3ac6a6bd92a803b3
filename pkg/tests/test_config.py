import math

import numpy as np
import pytest

from biphoton_fwm.config import SimConfig, parse_envelope, parse_mask
from biphoton_fwm.errors import SpecSyntaxError
from biphoton_fwm.lattice import Lattice


def test_envelope_grammar():
    lat = Lattice(9)
    g = parse_envelope(" gaussian:4,1.5 ", lat)
    assert np.argmax(np.abs(g.f0)) == 4
    p = parse_envelope("point:3", lat)
    assert p.f0[3] == 1.0
    for bad in ("gaussian:4", "gauss:4,1", "point:-1", "point:x", ""):
        with pytest.raises(SpecSyntaxError) as exc:
            parse_envelope(bad, lat)
        assert exc.value.token == bad.strip()


def test_mask_grammar():
    assert parse_mask("full", 5).is_full
    assert parse_mask("window:1,3", 5).bounds() == (1, 3)
    with pytest.raises(SpecSyntaxError):
        parse_mask("window:1", 5)


def test_sim_config_defaults():
    cfg = SimConfig()
    assert cfg.M == 45 and cfg.steps == 45
    assert cfg.kappa * cfg.c * cfg.steps * cfg.dz == pytest.approx(math.pi)
    s = cfg.initial_state()
    assert s.norm == pytest.approx(1.0, abs=1e-12)
    e = cfg.with_(initial_sector="e").initial_state()
    np.testing.assert_array_equal(e.psi_e, s.psi_omega)
    assert "tolerances" not in SimConfig.field_names()
    with pytest.raises(SpecSyntaxError):
        SimConfig(input="other")
    with pytest.raises(SpecSyntaxError):
        SimConfig(initial_sector="x")
