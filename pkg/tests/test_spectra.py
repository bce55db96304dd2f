import math

import numpy as np
import pytest

from hormspace import class_m as cm
from hormspace import spectra as sp


def test_r_gamma_examples():
    assert sp.r_gamma([0, 0], 0.0, 0.5) == 1.0
    assert sp.r_gamma([1, 0], 0.0, 0.5) == pytest.approx(math.sqrt(2))
    assert sp.r_gamma([0, 0], 4.0, 0.5) == pytest.approx(math.sqrt(5))
    with pytest.raises(ValueError):
        sp.r_gamma([0], 0.0, 0.0)


def test_hormander_weight_examples():
    assert sp.hormander_weight(sp.AnisotropicIndex(0.0, 0.7), [3.0, 1.0], 2.0) == 1.0
    assert sp.hormander_weight(sp.AnisotropicIndex(2.0, 0.5), [1.0, 0.0], 0.0) == pytest.approx(2.0)
    # eta chosen so r_gamma = e exactly
    idx = sp.AnisotropicIndex(1.0, 0.5, cm.log_power([1], cutoff=math.e))
    eta = math.e**2 - 1.0
    assert sp.hormander_weight(idx, [0.0, 0.0], eta) == pytest.approx(math.e, rel=1e-14)


def test_lattice_validation():
    with pytest.raises(ValueError):
        sp.Lattice(k=0, n_x=8, n_t=8, L_x=1.0, L_t=1.0)
    with pytest.raises(ValueError):
        sp.Lattice(k=1, n_x=12, n_t=8, L_x=1.0, L_t=1.0)
    with pytest.raises(ValueError):
        sp.Lattice(k=1, n_x=8, n_t=8, L_x=0.0, L_t=1.0)


def test_lattice_frequencies_and_time_axis(small_lattice):
    xi = small_lattice.xi_axis()
    m = np.rint(xi * small_lattice.L_x / (2 * math.pi)).astype(int)
    assert set(m) == set(range(-4, 4))
    t = small_lattice.t_axis()
    assert t[small_lattice.n_t // 2] == 0.0
    assert t[0] == -small_lattice.L_t / 2


def test_dft_delta_and_constant(small_lattice):
    n = small_lattice.size
    delta = np.zeros(small_lattice.shape, dtype=complex)
    delta[0, 0] = 1.0
    field = sp.dft(sp.GridFunction(small_lattice, delta))
    assert np.allclose(np.abs(field.coeffs), n**-0.5)
    const = sp.dft(sp.GridFunction(small_lattice, np.ones(small_lattice.shape)))
    nonzero = np.abs(const.coeffs) > 1e-12
    assert nonzero.sum() == 1 and nonzero[0, 0]


def test_dft_round_trip(medium_lattice):
    g = sp.random_grid(medium_lattice, 11)
    back = sp.idft(sp.dft(g))
    scale = np.max(np.abs(g.samples))
    assert np.max(np.abs(back.samples - g.samples)) <= 1e-12 * scale


def test_parseval_many_inputs(medium_lattice):
    idx = sp.AnisotropicIndex(0.0, 0.5)
    root_cell = math.sqrt(medium_lattice.cell_volume)
    for seed in range(100):
        g = sp.random_grid(medium_lattice, seed)
        l2 = float(np.linalg.norm(g.samples.ravel())) * root_cell
        assert sp.hnorm(g, idx) == pytest.approx(l2, rel=1e-12)


def test_hnorm_zero_and_single_mode(small_lattice):
    idx = sp.AnisotropicIndex(1.3, 0.5, cm.log_power([1]))
    zero = sp.GridFunction(small_lattice, np.zeros(small_lattice.shape))
    assert sp.hnorm(zero, idx) == 0.0
    coeffs = np.zeros(small_lattice.shape, dtype=complex)
    coeffs[3, 5] = 1.0
    g = sp.idft(sp.SpectralField(small_lattice, coeffs))
    xi = small_lattice.xi_axis()[3]
    eta = small_lattice.eta_axis()[5]
    expected = sp.hormander_weight(idx, [xi], eta) * math.sqrt(small_lattice.cell_volume)
    assert sp.hnorm(g, idx) == pytest.approx(expected, rel=1e-13)


def test_weight_monotone_in_s(medium_lattice):
    idx1 = sp.AnisotropicIndex(1.0, 0.5)
    idx2 = sp.AnisotropicIndex(2.0, 0.5)
    w1 = sp.weight_array(medium_lattice, idx1)
    w2 = sp.weight_array(medium_lattice, idx2)
    assert np.all(w2 >= w1)


def test_embedding_constants_sobolev(medium_lattice):
    mk = lambda s: sp.AnisotropicIndex(s, 0.5)
    c_low, c_high = sp.embedding_constants(mk(1), mk(2), mk(3), medium_lattice)
    assert c_low <= 1.0 and c_high <= 1.0
    assert c_low == pytest.approx(1.0)  # attained at the origin
    assert sp.embedding_constants(mk(2), mk(2), mk(2), medium_lattice) == (1.0, 1.0)
    with pytest.raises(ValueError):
        sp.embedding_constants(mk(3), mk(2), mk(1), medium_lattice)


def test_embedding_constants_log_weight(medium_lattice):
    phi = cm.log_power([-1])
    mk = lambda s: sp.AnisotropicIndex(s, 0.5, phi)
    c_low, c_high = sp.embedding_constants(mk(1), mk(2), mk(3), medium_lattice)
    # brute-force scan oracle
    w = lambda idx: sp.weight_array(medium_lattice, idx)
    assert c_low == pytest.approx(float(np.max(w(mk(1)) / w(mk(2)))))
    assert c_high == pytest.approx(float(np.max(w(mk(2)) / w(mk(3)))))
    assert math.isfinite(c_low) and math.isfinite(c_high)


def test_norm_chain_certified(medium_lattice):
    phi = cm.log_power([1])
    idx0 = sp.AnisotropicIndex(0.5, 0.5, phi)
    idx = sp.AnisotropicIndex(1.5, 0.5)
    idx1 = sp.AnisotropicIndex(2.5, 0.5, phi)
    c_low, c_high = sp.embedding_constants(idx0, idx, idx1, medium_lattice)
    for seed in (0, 1, 2):
        g = sp.random_grid(medium_lattice, seed)
        assert sp.hnorm(g, idx0) <= c_low * sp.hnorm(g, idx) * (1 + 1e-12)
        assert sp.hnorm(g, idx) <= c_high * sp.hnorm(g, idx1) * (1 + 1e-12)


def test_grid_shape_validation(small_lattice):
    with pytest.raises(ValueError):
        sp.GridFunction(small_lattice, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        sp.SpectralField(small_lattice, np.zeros((8, 9)))
