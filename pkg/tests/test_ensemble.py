import json
from fractions import Fraction

import pytest

from wignercorr import EnsembleSpec
from wignercorr.errors import MissingMoment


def test_presets():
    assert [EnsembleSpec.rademacher().v(j) for j in (1, 2, 3)] == [1, 1, 1]
    g = EnsembleSpec.gaussian(2)
    assert [g.v(j) for j in (1, 2, 3)] == [2, 12, 120]
    assert g.standardized(2) == 3
    u = EnsembleSpec.uniform(3)
    assert u.v(1) == 3 and u.v(2) == Fraction(81, 5)
    assert EnsembleSpec.two_point(Fraction(1, 2)).v(2) == Fraction(1, 16)


def test_custom_moments_are_finite():
    c = EnsembleSpec.custom([1, 3])
    assert c.v(2) == 3
    with pytest.raises(MissingMoment):
        c.v(3)


@pytest.mark.parametrize("bad", [[0], [-1, 2], []])
def test_invalid_custom(bad):
    with pytest.raises(ValueError):
        EnsembleSpec.custom(bad)


def test_from_name_and_file(tmp_path):
    assert EnsembleSpec.from_name("gaussian:2").v(2) == 12
    assert EnsembleSpec.from_name("custom:1,3/2").v(2) == Fraction(3, 2)
    assert EnsembleSpec.from_name("rademacher", n=5).n == 5
    with pytest.raises(ValueError):
        EnsembleSpec.from_name("cauchy")
    f = tmp_path / "e.json"
    f.write_text(json.dumps({"moments": [1, 3, 15], "n": 9}))
    e = EnsembleSpec.from_file(f)
    assert e.n == 9 and e.v(3) == 15
    f.write_text(json.dumps({"preset": "uniform", "param": "1/2"}))
    assert EnsembleSpec.from_file(f).v(1) == Fraction(1, 12)


def test_with_n_and_label():
    e = EnsembleSpec.gaussian().with_n(7)
    assert e.n == 7
    assert e.label() == "gaussian:1"
    assert EnsembleSpec.custom([1, 2]).label() == "custom:1,2"
