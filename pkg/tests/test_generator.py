import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dimlab.generator import (GeneratorError, GeneratorSpec, UnsupportedOracleError,
                              exact_piecewise, generate, modulus_oracle, takagi_value)


def test_constant_zero():
    assert not generate(GeneratorSpec("constant", n=33)).values.any()


def test_takagi_one_term_is_tent():
    f = generate(GeneratorSpec.parse("takagi:terms=1", n=65))
    assert np.allclose(f.values, np.minimum(f.grid, 1 - f.grid))
    assert takagi_value(F(1, 3), 1) == F(1, 3)


def test_midpoint_displacement_deterministic():
    spec = GeneratorSpec.parse("midpoint_displacement:hurst=0.7", seed=9, n=257)
    assert generate(spec) == generate(spec)
    other = GeneratorSpec.parse("midpoint_displacement:hurst=0.7", seed=10, n=257)
    assert generate(other) != generate(spec)
    fs = GeneratorSpec.parse("faber_schauder:decay=0.5", seed=3, n=129)
    assert generate(fs) == generate(fs)


@pytest.mark.parametrize("text", ["weierstrass:a=1.5", "weierstrass:a=0.5,b=1",
                                  "midpoint_displacement:hurst=1", "nosuch", "takagi:terms=0",
                                  "linear:foo=1", "takagi:terms"])
def test_invalid_specs(text):
    with pytest.raises(GeneratorError):
        GeneratorSpec.parse(text, n=33)


def test_resolution_must_be_dyadic_plus_one():
    with pytest.raises(GeneratorError):
        GeneratorSpec("constant", n=100)


def test_modulus_examples():
    assert modulus_oracle(GeneratorSpec("constant", n=3))(F(1, 3)) == 0
    assert modulus_oracle(GeneratorSpec.parse("linear:slope=2", n=3))(F(1, 3)) == F(2, 3)
    with pytest.raises(UnsupportedOracleError):
        modulus_oracle(GeneratorSpec("midpoint_displacement", n=33))


def _oscillations(values, width):
    n = len(values)
    return max(values[i:i + width + 1].max() - values[i:i + width + 1].min()
               for i in range(n - width))


@pytest.mark.parametrize("text", ["constant:c=3", "linear:slope=-2,intercept=1", "takagi:terms=6",
                                  "takagi:terms=10", "weierstrass:a=0.5,b=3,terms=6",
                                  "weierstrass:a=0.7,b=2,terms=8"])
def test_modulus_soundness_battery(text):
    spec = GeneratorSpec.parse(text, n=1025)
    f = generate(spec)
    mod = modulus_oracle(spec)
    for width in (1, 2, 3, 5, 8, 16, 33, 100, 512, 1024):
        t = width / 1024
        assert _oscillations(f.values, width) <= float(mod(F(width, 1024))) + 1e-9, (text, t)


def test_takagi_modulus_exact_bound_on_grid():
    spec = GeneratorSpec.parse("takagi:terms=5", n=65)
    g = exact_piecewise(spec)
    mod = modulus_oracle(spec)
    xs = [F(i, 64) for i in range(65)]
    vals = [g(x) for x in xs]
    for w in range(1, 65):
        osc = max(max(vals[i:i + w + 1]) - min(vals[i:i + w + 1]) for i in range(65 - w))
        assert osc <= mod(F(w, 64))


def test_exact_piecewise_matches_samples():
    spec = GeneratorSpec.parse("takagi:terms=4", n=33)
    g = exact_piecewise(spec)
    f = generate(spec)
    assert all(float(g(F(float(x)))) == pytest.approx(y) for x, y in zip(f.grid, f.values))


def test_hurst_trend():
    """Grid-Hölder roughness drops as the Hurst index grows (trend only)."""
    def roughness(h):
        vals = []
        for seed in range(4):
            f = generate(GeneratorSpec.parse(f"midpoint_displacement:hurst={h}", seed=seed, n=1025))
            d1 = np.mean(np.abs(np.diff(f.values)))
            d16 = np.mean(np.abs(f.values[16:] - f.values[:-16]))
            vals.append(math.log(d16 / d1) / math.log(16))
        return float(np.median(vals))
    est = [roughness(h) for h in (0.2, 0.5, 0.8)]
    assert est[0] < est[1] < est[2]


@given(st.integers(min_value=0, max_value=2 ** 64 - 1))
def test_spec_round_trip(seed):
    spec = GeneratorSpec.parse("faber_schauder:decay=0.3,depth=4", seed=seed, n=33)
    again = GeneratorSpec.parse(spec.describe(), seed=spec.seed, n=spec.n)
    assert again == spec
    assert spec.to_json()["seed"] == seed
