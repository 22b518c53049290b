"""Both assignment kernel backends against brute-force oracles."""

import itertools

import numpy as np
import pytest

from playtree import kernels
from playtree.kernels import _fallback

BACKENDS = [_fallback]
try:
    from playtree.kernels import _assignment as _compiled
    BACKENDS.append(_compiled)
except ImportError:
    _compiled = None

backend = pytest.fixture(params=BACKENDS,
                         ids=["python", "compiled"][: len(BACKENDS)])(
    lambda request: request.param)


def brute_force(cost):
    m = cost.shape[0]
    best, best_perm = None, None
    for perm in itertools.permutations(range(m)):
        total = sum(cost[i, perm[i]] for i in range(m))
        if best is None or total < best:
            best, best_perm = total, perm
    return best_perm, best


def test_matches_brute_force(backend):
    rng = np.random.default_rng(1)
    for _ in range(300):
        m = int(rng.integers(1, 7))
        cost = rng.uniform(0, 50, size=(m, m))
        mapping, total, _ = backend.hungarian(cost)
        _, oracle_total = brute_force(cost)
        assert total == pytest.approx(oracle_total, abs=1e-9)
        assert sorted(mapping) == list(range(m))
        assert sum(cost[i, mapping[i]] for i in range(m)) == pytest.approx(total)


def test_unique_optimum_not_flagged(backend):
    rng = np.random.default_rng(2)
    flagged = 0
    for _ in range(500):
        cost = rng.uniform(0, 100, size=(5, 5))
        _, _, ambiguous = backend.hungarian(cost)
        flagged += bool(ambiguous)
    # random continuous costs essentially never tie
    assert flagged == 0


def test_tied_optimum_flagged(backend):
    # two identical rows: swapping their assignments gives a second optimum
    cost = np.array([[1.0, 2.0, 3.0],
                     [1.0, 2.0, 3.0],
                     [5.0, 4.0, 9.0]])
    _, _, ambiguous = backend.hungarian(cost)
    assert ambiguous


def test_identity_matrix(backend):
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    mapping, total, _ = backend.hungarian(cost)
    assert list(mapping) == [0, 1]
    assert total == 0.0


def test_rejects_bad_input(backend):
    with pytest.raises(ValueError):
        backend.hungarian(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        backend.hungarian(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_batch_align_matches_loop(backend):
    rng = np.random.default_rng(3)
    template = rng.uniform(0, 94, size=(5, 20, 2))
    plays = rng.uniform(0, 94, size=(40, 5, 20, 2))
    perms, costs, flags = backend.batch_align(template, plays, True)
    for i in range(40):
        diff = template[:, None] - plays[i][None]
        cost = np.einsum("mnfc,mnfc->mn", diff, diff)
        mapping, total, amb = backend.hungarian(cost)
        assert np.array_equal(perms[i], mapping)
        assert costs[i] == pytest.approx(total, rel=1e-9)
        assert bool(flags[i]) == bool(amb)


@pytest.mark.skipif(_compiled is None, reason="compiled backend unavailable")
def test_backends_agree():
    rng = np.random.default_rng(4)
    for _ in range(200):
        m = int(rng.integers(2, 8))
        cost = rng.uniform(0, 50, size=(m, m))
        mc, tc, fc = _compiled.hungarian(cost)
        mp, tp, fp = _fallback.hungarian(cost)
        assert np.array_equal(mc, mp)
        assert tc == pytest.approx(tp, rel=1e-12)
        assert bool(fc) == bool(fp)
    template = rng.uniform(0, 94, size=(5, 30, 2))
    plays = rng.uniform(0, 94, size=(30, 5, 30, 2))
    for squared in (True, False):
        pc, cc, fc = _compiled.batch_align(template, plays, squared)
        pp, cp, fp = _fallback.batch_align(template, plays, squared)
        assert np.array_equal(pc, pp)
        assert np.allclose(cc, cp, rtol=1e-9)
        assert np.array_equal(fc, fp)


def test_backend_selection_reports():
    assert kernels.BACKEND in ("compiled", "python")
    assert callable(kernels.hungarian)
    assert callable(kernels.batch_align)
