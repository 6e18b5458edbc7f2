import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levyqft.lattice import (FieldSample, LatticeSpec, MomentumGrid, ShapeMismatchError,
                             dft_backward, dft_forward, load_ensemble, save_ensemble, translate)
from levyqft.montecarlo import Ensemble

shapes = st.lists(st.integers(2, 6), min_size=1, max_size=4).map(tuple)


def test_constant_field_gives_zero_mode_spike():
    lat = LatticeSpec((8,))
    spec = dft_forward(FieldSample(lat, np.ones(8)))
    assert spec[0] == pytest.approx(math.sqrt(8), rel=1e-14)
    np.testing.assert_allclose(spec[1:], 0.0, atol=1e-14)


@given(shapes, st.integers(0, 2**32 - 1))
def test_round_trip_and_parseval(shape, seed):
    lat = LatticeSpec(shape)
    f = np.random.default_rng(seed).normal(size=shape)
    spec = dft_forward(f)
    back = dft_backward(spec, lat)
    assert isinstance(back, FieldSample)
    np.testing.assert_allclose(back.values, f, rtol=0, atol=1e-12 * np.abs(f).max())
    assert np.sum(np.abs(spec) ** 2) == pytest.approx(np.sum(f**2), rel=1e-12)


@given(shapes, st.integers(0, 2**32 - 1), st.data())
def test_translation_multiplies_spectrum_by_phase(shape, seed, data):
    lat = LatticeSpec(shape)
    f = np.random.default_rng(seed).normal(size=shape)
    shift = [data.draw(st.integers(-n, n)) for n in shape]
    moved = dft_forward(translate(f, shift))
    k = MomentumGrid(lat).vectors()
    phase = np.exp(-1j * (k @ np.asarray(shift, dtype=float)))
    np.testing.assert_allclose(moved, dft_forward(f) * phase, atol=1e-10)


def test_non_hermitian_spectrum_rejected():
    spec = np.zeros(8, dtype=complex)
    spec[1] = 1.0
    with pytest.raises(ValueError, match="Hermitian"):
        dft_backward(spec)


def test_lattice_spec_validation():
    with pytest.raises(ValueError):
        LatticeSpec((1, 4))
    with pytest.raises(ValueError):
        LatticeSpec((4, 4), (1.0,))
    with pytest.raises(ValueError):
        LatticeSpec((4,), (0.0,))
    lat = LatticeSpec((4, 6), (0.5, 2.0))
    assert lat.cell_volume == 1.0 and lat.size == 24
    assert lat.wrap((-1, 7)) == (3, 1)


def test_field_sample_checks_size():
    with pytest.raises(ShapeMismatchError):
        FieldSample(LatticeSpec((4, 4)), np.zeros(15))


def test_ensemble_round_trip_is_bit_exact(tmp_path):
    lat = LatticeSpec((16, 16))
    samples = np.random.default_rng(1).normal(size=(3, 16, 16))
    path = tmp_path / "ens.bin"
    save_ensemble(Ensemble(lat, None, None, samples, seed=7), path)
    back = load_ensemble(path)
    assert back.samples.tobytes() == samples.tobytes()
    assert back.lattice == lat and back.seed == 7


def test_tampered_sidecar_raises(tmp_path):
    lat = LatticeSpec((16, 16))
    path = tmp_path / "ens.bin"
    save_ensemble(Ensemble(lat, None, None, np.zeros((3, 16, 16))), path)
    side = tmp_path / "ens.bin.json"
    meta = json.loads(side.read_text())
    meta["site_count"] = 255
    side.write_text(json.dumps(meta))
    with pytest.raises(ShapeMismatchError):
        load_ensemble(path)


def test_truncated_data_file_raises(tmp_path):
    lat = LatticeSpec((4, 4))
    path = tmp_path / "ens.bin"
    save_ensemble(Ensemble(lat, None, None, np.zeros((2, 4, 4))), path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ShapeMismatchError):
        load_ensemble(path)


def test_empty_ensemble_round_trip(tmp_path):
    lat = LatticeSpec((4, 4))
    path = tmp_path / "empty.bin"
    save_ensemble(Ensemble(lat, None, None, np.zeros((0, 4, 4))), path)
    back = load_ensemble(path)
    assert len(back) == 0 and back.samples.shape == (0, 4, 4)
