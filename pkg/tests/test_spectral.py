"""Spacing ratios, reference densities, component statistics, KL divergences."""

import numpy as np
import pytest
from scipy.integrate import quad

from mblq import (
    BinnedDistribution,
    ReferenceEnsemble,
    discrete_kld,
    eigenstate_component_stats,
    eigenstate_component_values,
    histogram_kld,
    level_statistics,
    porter_thomas_bin_masses,
    porter_thomas_reference,
    reference_r_density,
    sample_coe,
    sample_goe,
    sample_haar_unitary,
    sample_poisson_levels,
    spacing_ratios,
)
from mblq.spectral import PT_EDGES, R_EDGES

# Exact surmise means of r on [0, 1]: integral of r * density.
POI_MEAN = 2.0 * np.log(2.0) - 1.0          # 0.3862943611198906
GOE_MEAN = 4.0 - 2.0 * np.sqrt(3.0)         # 0.5358983848622456
CUE_MEAN = 0.602657790843584                # numeric quadrature, no closed form

# Finite-size anchors for dim-256 sampled ensembles; pooled means sit a bit
# below the surmise values (GOE/COE near 0.5307, CUE near 0.5996).
DIM256_BETA1_MEAN = 0.5307
DIM256_CUE_MEAN = 0.5996


def test_ratio_examples():
    np.testing.assert_array_equal(spacing_ratios([0.0, 1.0, 2.0]), [1.0])
    np.testing.assert_array_equal(spacing_ratios([0.0, 1.0, 3.0]), [0.5])
    # four levels give two ratios, each min/max of adjacent gaps
    r = spacing_ratios([0.0, 1.0, 3.0, 4.0])
    np.testing.assert_allclose(r, [0.5, 0.5], rtol=0, atol=1e-15)


def test_ratio_input_validation():
    with pytest.raises(ValueError):
        spacing_ratios([0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        spacing_ratios([0.0, 1.0])
    with pytest.raises(ValueError):
        spacing_ratios(np.zeros((2, 3)))


def test_ratio_degenerate_gaps():
    # two zero gaps give r = 1, a zero gap next to a finite one gives r = 0
    np.testing.assert_array_equal(spacing_ratios([0.0, 0.0, 0.0]), [1.0])
    np.testing.assert_array_equal(spacing_ratios([0.0, 0.0, 1.0]), [0.0])
    np.testing.assert_array_equal(spacing_ratios([0.0, 1.0, 1.0]), [0.0])
    np.testing.assert_array_equal(spacing_ratios([0.0, 0.0, 0.0, 1.0]), [1.0, 0.0])


@pytest.mark.parametrize("ensemble", [
    ReferenceEnsemble.POI,
    ReferenceEnsemble.GOE,
    ReferenceEnsemble.COE,
    ReferenceEnsemble.CUE,
])
def test_reference_densities_normalized(ensemble):
    total, err = quad(lambda r: reference_r_density(ensemble, r), 0.0, 1.0)
    assert err < 1e-10
    assert total == pytest.approx(1.0, abs=1e-8)


def test_reference_density_endpoints():
    assert reference_r_density(ReferenceEnsemble.POI, 0.0) == pytest.approx(2.0, abs=0)
    assert reference_r_density(ReferenceEnsemble.POI, 1.0) == pytest.approx(0.5, abs=0)
    # level repulsion: beta > 0 densities vanish at r = 0
    assert reference_r_density(ReferenceEnsemble.GOE, 0.0) == 0.0
    assert reference_r_density(ReferenceEnsemble.CUE, 0.0) == 0.0
    # GOE and COE share the beta = 1 surmise
    r = np.linspace(0.0, 1.0, 7)
    np.testing.assert_array_equal(
        reference_r_density(ReferenceEnsemble.GOE, r),
        reference_r_density(ReferenceEnsemble.COE, r),
    )


def test_reference_density_rejects_bad_input():
    with pytest.raises(ValueError):
        reference_r_density(ReferenceEnsemble.PORTER_THOMAS, 0.5)
    with pytest.raises(ValueError):
        reference_r_density(ReferenceEnsemble.POI, 1.5)
    with pytest.raises(ValueError):
        reference_r_density(ReferenceEnsemble.POI, -0.1)


@pytest.mark.parametrize("ensemble,expected", [
    (ReferenceEnsemble.POI, POI_MEAN),
    (ReferenceEnsemble.GOE, GOE_MEAN),
    (ReferenceEnsemble.COE, GOE_MEAN),
    (ReferenceEnsemble.CUE, CUE_MEAN),
])
def test_surmise_means(ensemble, expected):
    mean, err = quad(lambda r: r * reference_r_density(ensemble, r), 0.0, 1.0)
    assert err < 1e-10
    assert mean == pytest.approx(expected, abs=1e-12)


def _pooled_mean_ratio(sample_spectrum, count, seed):
    rng = np.random.default_rng(seed)
    ratios = [spacing_ratios(sample_spectrum(rng)) for _ in range(count)]
    return float(np.concatenate(ratios).mean())


def test_goe_sampling_mean_ratio():
    mean = _pooled_mean_ratio(
        lambda rng: np.linalg.eigvalsh(sample_goe(256, rng)), 200, 314159)
    assert abs(mean - DIM256_BETA1_MEAN) < 0.005


def test_coe_sampling_mean_ratio():
    mean = _pooled_mean_ratio(
        lambda rng: np.sort(np.angle(np.linalg.eigvals(sample_coe(256, rng)))),
        60, 271828)
    assert abs(mean - DIM256_BETA1_MEAN) < 0.005


def test_cue_sampling_mean_ratio():
    mean = _pooled_mean_ratio(
        lambda rng: np.sort(np.angle(np.linalg.eigvals(sample_haar_unitary(256, rng)))),
        60, 161803)
    assert abs(mean - DIM256_CUE_MEAN) < 0.005


def test_poisson_sampling_mean_ratio():
    mean = _pooled_mean_ratio(
        lambda rng: sample_poisson_levels(256, rng), 200, 141421)
    assert abs(mean - POI_MEAN) < 0.005


def test_haar_sampler_is_unitary():
    rng = np.random.default_rng(5)
    U = sample_haar_unitary(64, rng)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(64), rtol=0, atol=1e-12)
    V = sample_haar_unitary(64, rng)
    assert np.max(np.abs(U - V)) > 0.01


def test_coe_sampler_symmetric_unitary():
    U = sample_coe(32, np.random.default_rng(6))
    np.testing.assert_allclose(U, U.T, rtol=0, atol=1e-13)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(32), rtol=0, atol=1e-12)


def test_poisson_sampler_sorted_unit_interval():
    levels = sample_poisson_levels(100, np.random.default_rng(7))
    assert np.all(np.diff(levels) >= 0)
    assert levels.min() >= 0.0 and levels.max() <= 1.0
    again = sample_poisson_levels(100, np.random.default_rng(7))
    np.testing.assert_array_equal(levels, again)


def test_level_statistics_consistency():
    spectrum = np.linalg.eigvalsh(sample_goe(64, np.random.default_rng(8)))
    stats = level_statistics(spectrum)
    assert stats.mean_ratio == pytest.approx(stats.ratios.mean(), abs=0)
    rebuilt = BinnedDistribution.from_samples(stats.ratios, R_EDGES)
    np.testing.assert_array_equal(stats.histogram.masses, rebuilt.masses)


def test_component_values_require_unitary():
    with pytest.raises(ValueError):
        eigenstate_component_values(0.5 * np.eye(8))
    with pytest.raises(ValueError):
        eigenstate_component_values(np.ones((3, 4)))


def test_identity_components_drop_out_of_range():
    # eigenvectors of the identity are basis states: each column has a
    # single component N = 16 (outside [0, 12], dropped) and 15 zeros
    hist = eigenstate_component_stats(np.eye(16, dtype=complex))
    assert hist.masses[0] == 1.0
    assert hist.masses[1:].sum() == 0.0


def test_haar_components_follow_exponential():
    U = sample_haar_unitary(512, np.random.default_rng(999))
    kld = histogram_kld(eigenstate_component_stats(U), porter_thomas_reference())
    assert 0.0 <= kld < 0.05


def test_porter_thomas_reference_masses():
    masses = porter_thomas_bin_masses()
    assert masses.shape == (60,)
    assert masses.sum() == pytest.approx(1.0, abs=1e-15)
    # each mass is the exponential integral over its bin, renormalized
    expected = (np.exp(-PT_EDGES[:-1]) - np.exp(-PT_EDGES[1:])) / (1.0 - np.exp(-12.0))
    np.testing.assert_allclose(masses, expected, rtol=1e-14, atol=0)


def test_histogram_kld_examples():
    edges = np.array([0.0, 0.5, 1.0])
    point = BinnedDistribution(edges=edges, masses=np.array([1.0, 0.0]))
    flat = BinnedDistribution(edges=edges, masses=np.array([0.5, 0.5]))
    assert histogram_kld(point, point) == 0.0
    assert histogram_kld(point, flat) == pytest.approx(np.log(2.0), abs=1e-9)
    with pytest.raises(ValueError):
        histogram_kld(porter_thomas_reference(), point)


def test_discrete_kld_properties():
    p = np.array([0.7, 0.2, 0.1])
    q = np.array([0.2, 0.3, 0.5])
    assert discrete_kld(p, p) == 0.0
    assert discrete_kld(p, q) != discrete_kld(q, p)
    # zero bins stay finite through the epsilon regularization
    assert np.isfinite(discrete_kld(np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    with pytest.raises(ValueError):
        discrete_kld(np.array([1.0]), np.array([0.5, 0.5]))


def test_binned_distribution_validation():
    edges = np.array([0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        BinnedDistribution(edges=edges, masses=np.array([0.6, 0.3]))
    with pytest.raises(ValueError):
        BinnedDistribution(edges=edges, masses=np.array([1.2, -0.2]))
    with pytest.raises(ValueError):
        BinnedDistribution(edges=np.array([0.0, 1.0, 0.5]), masses=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        BinnedDistribution(edges=edges, masses=np.array([1.0]))
    d = BinnedDistribution(edges=edges, masses=np.array([0.25, 0.75]))
    np.testing.assert_array_equal(d.centers, [0.25, 0.75])
    np.testing.assert_array_equal(d.densities, [0.5, 1.5])


def test_from_samples_drops_and_renormalizes():
    d = BinnedDistribution.from_samples(np.array([0.11, 0.11, 0.99, 5.0]), R_EDGES)
    assert d.masses.sum() == pytest.approx(1.0, abs=1e-15)
    assert d.masses[5] == pytest.approx(2.0 / 3.0, abs=1e-15)
    with pytest.raises(ValueError):
        BinnedDistribution.from_samples(np.array([15.0, 20.0]), PT_EDGES)


def test_from_counts():
    d = BinnedDistribution.from_counts(np.array([3, 1]), np.array([0.0, 0.5, 1.0]))
    np.testing.assert_array_equal(d.masses, [0.75, 0.25])
    with pytest.raises(ValueError):
        BinnedDistribution.from_counts(np.array([0, 0]), np.array([0.0, 0.5, 1.0]))
