import pytest

from treespark.lib.trial_pool import TrialPool


ARGS = [(17, 5), (100, 7), (9, 3), (1, 2)]
EXPECTED = [divmod(*args) for args in ARGS]


@pytest.mark.asyncio
async def test_inline():
    pool = TrialPool(jobs=1)
    assert await pool.map(divmod, ARGS) == EXPECTED
    assert pool._executor is None


@pytest.mark.asyncio
@pytest.mark.parametrize('kind', TrialPool.KINDS)
async def test_workers_keep_order(kind):
    pool = TrialPool(jobs=2, kind=kind)
    try:
        assert await pool.map(divmod, ARGS) == EXPECTED
        assert await pool.map(pow, [(2, e) for e in range(20)]) == [2 ** e for e in range(20)]
    finally:
        pool.shutdown()
    assert pool._executor is None


@pytest.mark.asyncio
async def test_single_trial_runs_inline():
    pool = TrialPool(jobs=4, kind='thread')
    assert await pool.map(divmod, ARGS[:1]) == EXPECTED[:1]
    assert await pool.map(divmod, []) == []
    assert pool._executor is None


@pytest.mark.asyncio
async def test_worker_exception():
    pool = TrialPool(jobs=2, kind='thread')
    try:
        with pytest.raises(ZeroDivisionError):
            await pool.map(divmod, [(1, 0), (4, 2)])
    finally:
        pool.shutdown()


def test_bad_kind():
    with pytest.raises(ValueError):
        TrialPool(jobs=2, kind='fibre')


def test_jobs_floor():
    assert TrialPool(jobs=0).jobs >= 1
    assert TrialPool(jobs=3).jobs == 3
    TrialPool(jobs=2).shutdown()
