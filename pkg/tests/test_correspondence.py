import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import chi2_row_distances, chi_square
from frontmap.correspondence import correspondence_analysis, project_2d
from frontmap.errors import NumericalError


def random_table(seed, rows, cols, low=1, high=30):
    return np.random.default_rng(seed).integers(low, high, size=(rows, cols))


def test_diagonal_example():
    m = correspondence_analysis([[10, 0], [0, 10]])
    assert m.dims == 1
    assert m.singular_values[0] == pytest.approx(1.0, abs=1e-10)
    assert m.row_principal[:, 0] == pytest.approx([1.0, -1.0], abs=1e-10)
    assert m.total_inertia == pytest.approx(1.0, abs=1e-12)
    assert m.total_inertia == pytest.approx(chi_square([[10, 0], [0, 10]]) / 20)
    proj = project_2d(m)
    assert np.abs(proj.rows - [[1.0, 0.0], [-1.0, 0.0]]).max() <= 1e-10
    assert proj.explained == (pytest.approx(1.0), 0.0)


def test_independence_has_no_dimensions():
    m = correspondence_analysis([[4, 6], [6, 9]])
    assert m.dims == 0 and m.total_inertia == pytest.approx(0.0, abs=1e-24)
    with pytest.raises(NumericalError):
        project_2d(m)


@pytest.mark.parametrize("bad, what", [
    ([[1, 0], [0, 0]], "row 1"),
    ([[1, 0], [2, 0]], "column 1"),
    ([[0, 0], [0, 0]], "zero"),
    ([[1, -1], [1, 1]], "nonnegative"),
    ([], "non-empty"),
])
def test_degenerate_inputs(bad, what):
    with pytest.raises(NumericalError, match=what):
        correspondence_analysis(bad)


@pytest.mark.parametrize("seed", range(10))
def test_inertia_is_chi_square_over_n(seed):
    x = random_table(seed, 10, 20, low=0)
    m = correspondence_analysis(x)
    assert abs(m.total_inertia - chi_square(x) / x.sum()) <= 1e-9


@pytest.mark.parametrize("shape", [(3, 4), (10, 20), (20, 50), (20, 7)])
def test_distance_reconstruction(shape):
    x = random_table(sum(shape), *shape)
    m = correspondence_analysis(x)
    f = m.row_principal
    d = ((f[:, None, :] - f[None, :, :]) ** 2).sum(axis=2)
    assert np.abs(d - chi2_row_distances(x)).max() <= 1e-9


def test_model_invariants():
    x = random_table(1, 8, 12)
    m = correspondence_analysis(x)
    assert m.row_masses.sum() == pytest.approx(1) and m.col_masses.sum() == pytest.approx(1)
    assert np.all(np.diff(m.singular_values) <= 0)
    assert m.dims <= min(x.shape) - 1
    assert m.total_inertia == pytest.approx(float((m.singular_values ** 2).sum()))
    assert np.abs(m.row_masses @ m.row_principal).max() < 1e-12
    assert np.abs(m.col_masses @ m.col_principal).max() < 1e-12
    assert m.explained.sum() == pytest.approx(1.0)
    assert m.row_inertia_share().sum() == pytest.approx(1.0)
    assert m.col_inertia_share().sum() == pytest.approx(1.0)
    # standard coordinates have unit weighted variance per axis
    assert (m.row_masses @ m.row_standard ** 2) == pytest.approx(np.ones(m.dims))


def test_scale_invariance():
    x = random_table(3, 6, 9)
    a, b = correspondence_analysis(x), correspondence_analysis(7 * x)
    assert np.abs(a.singular_values - b.singular_values).max() <= 1e-10
    assert np.abs(a.row_principal - b.row_principal).max() <= 1e-10
    assert np.abs(a.col_principal - b.col_principal).max() <= 1e-10
    assert abs(a.total_inertia - b.total_inertia) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32), st.permutations(range(6)))
def test_row_permutation_equivariance(seed, perm):
    x = random_table(seed, 6, 8)
    a = correspondence_analysis(x)
    b = correspondence_analysis(x[list(perm)])
    assert np.abs(a.singular_values - b.singular_values).max() <= 1e-10
    # coordinates agree up to a per-axis sign, which the convention may flip
    for k in range(a.dims):
        col_a, col_b = a.row_principal[list(perm), k], b.row_principal[:, k]
        assert min(np.abs(col_a - col_b).max(), np.abs(col_a + col_b).max()) <= 1e-9


def test_sign_convention_and_determinism():
    x = random_table(4, 7, 11)
    runs = [correspondence_analysis(x) for _ in range(3)]
    for m in runs[1:]:
        assert np.array_equal(m.row_principal, runs[0].row_principal)
        assert np.array_equal(m.col_principal, runs[0].col_principal)
    m = runs[0]
    u = m.row_standard * np.sqrt(m.row_masses)[:, None]   # left singular vectors
    for k in range(m.dims):
        assert u[np.argmax(np.abs(u[:, k])), k] > 0


def test_singular_values_agree_with_eigen_decomposition():
    x = random_table(512, 512, 512)
    m = correspondence_analysis(x)
    p = x / x.sum()
    r, c = p.sum(axis=1), p.sum(axis=0)
    s = (p - np.outer(r, c)) / np.sqrt(np.outer(r, c))
    eig = np.sort(np.linalg.eigvalsh(s @ s.T))[::-1][: m.dims]
    assert np.abs(np.sqrt(np.clip(eig, 0, None)) - m.singular_values).max() <= 1e-10
    assert abs(m.total_inertia - chi_square(x) / x.sum()) <= 1e-10


def test_standard_projection_flag():
    m = correspondence_analysis(random_table(6, 4, 5))
    std = project_2d(m, standard=True)
    assert std.rows[:, 0] == pytest.approx(m.row_standard[:, 0])
    assert sum(project_2d(m).explained) <= 1.0 + 1e-12
