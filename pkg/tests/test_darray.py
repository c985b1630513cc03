import numpy as np
import pytest

from pargrid.distribution import DistDim, DistMap, agg, dscatter, dzeros, local_part, put_local, transpose_grid
from pargrid.exceptions import DistributionError, ShapeMismatchError, WorkerFailedError
from pargrid.transport import launch
from pargrid.transport.codec import ElemKind
from pargrid.transport.context import WorkerCtx


def solo_ctx() -> WorkerCtx:
    # A one-rank context never touches its endpoint.
    return WorkerCtx(0, 1, endpoint=None)


def random_matrix(rng, shape, kind):
    values = rng.standard_normal(shape)
    if kind == "complex-f64":
        values = values + 1j * rng.standard_normal(shape)
    return values


# SPMD programs


def local_shapes(ctx, shape):
    return local_part(dzeros(ctx, shape, "f64")).shape


def stitch_fixed_blocks(ctx):
    array = dzeros(ctx, (2, 4), "f64")
    blocks = {0: [[1, 2], [5, 6]], 1: [[3, 4], [7, 8]]}
    put_local(array, blocks[ctx.rank])
    return agg(ctx, array)


def scatter_and_agg(ctx, matrix, kind, dist_dim):
    dist_map = DistMap.for_world(ctx.world_size, dist_dim)
    array = dscatter(ctx, matrix.shape, kind, dist_map, matrix if ctx.rank == 0 else None)
    return agg(ctx, array)


def transpose_cases(ctx, cases):
    """For every (matrix, kind): agg before, agg after one flip, agg after two flips."""

    results = []
    for matrix, kind in cases:
        array = dscatter(ctx, matrix.shape, kind, DistMap.for_world(ctx.world_size), matrix if ctx.rank == 0 else None)
        flipped = transpose_grid(ctx, array)
        restored = transpose_grid(ctx, flipped)
        assert flipped.dist_dim is DistDim.ROWS and restored.dist_dim is DistDim.COLS
        results.append((agg(ctx, array), agg(ctx, flipped), agg(ctx, restored)))
    return results


def agg_twice(ctx, matrix, dist_dim):
    dist_map = DistMap.for_world(ctx.world_size, dist_dim)
    array = dscatter(ctx, matrix.shape, "f64", dist_map, matrix if ctx.rank == 0 else None)
    return agg(ctx, array), agg(ctx, array)


def interleaved_arrays(ctx, real, complex_):
    """Two arrays redistributed and aggregated in alternation, with user traffic in flight."""

    first = dscatter(ctx, real.shape, "f64", None, real if ctx.rank == 0 else None)
    second = dscatter(ctx, complex_.shape, "complex-f64", None, complex_ if ctx.rank == 0 else None)
    ctx.send((ctx.rank + 1) % ctx.world_size, 7, [float(ctx.rank)])

    first_flipped = transpose_grid(ctx, first)
    second_flipped = transpose_grid(ctx, second)
    results = (agg(ctx, second), agg(ctx, first_flipped), agg(ctx, second_flipped), agg(ctx, first))
    note = ctx.recv((ctx.rank - 1) % ctx.world_size, 7)[0, 0]
    return results, note


def rows_after_transpose(ctx, matrix):
    array = dscatter(ctx, matrix.shape, "f64", None, matrix if ctx.rank == 0 else None)
    before = local_part(array)
    after = transpose_grid(ctx, array)
    return before, local_part(after), after.local_range


def mixed_directions(ctx):
    dist_dim = DistDim.COLS if ctx.rank == 0 else DistDim.ROWS
    array = dzeros(ctx, (4, 4), "f64", DistMap.for_world(ctx.world_size, dist_dim))
    transpose_grid(ctx, array)


def map_missing_a_rank(ctx):
    dzeros(ctx, (4, 4), "f64", DistMap.for_world(ctx.world_size - 1))


class TestDzeros:
    def test_even_split(self):
        array = dzeros(solo_ctx(), (4, 4))
        assert array.local_shape == (4, 4)
        assert not local_part(array).any()

    @pytest.mark.parametrize(
        "shape, workers, widths",
        [((4, 4), 2, [2, 2]), ((4, 100), 4, [25, 25, 25, 25]), ((4, 3), 5, [1, 1, 1, 0, 0])],
    )
    def test_local_widths(self, settings, shape, workers, widths):
        shapes = launch(workers, local_shapes, shape, settings=settings)
        assert shapes == [(shape[0], width) for width in widths]

    def test_complex_kind(self):
        array = dzeros(solo_ctx(), (2, 3), "complex-f64")
        assert array.elem_kind is ElemKind.C128
        assert local_part(array).dtype == np.complex128

    def test_unknown_kind(self):
        with pytest.raises(DistributionError):
            dzeros(solo_ctx(), (2, 2), "f32")

    def test_negative_extent(self):
        with pytest.raises(DistributionError):
            dzeros(solo_ctx(), (2, -1))

    def test_map_must_cover_the_launch(self, settings):
        with pytest.raises(WorkerFailedError, match="do not cover"):
            launch(3, map_missing_a_rank, settings=settings)

    def test_map_ranks_outside_the_launch(self):
        dist_map = DistMap(grid=(1, 2), dist_dim=DistDim.COLS, ranks=(0, 3))
        with pytest.raises(DistributionError, match="outside"):
            dzeros(solo_ctx(), (2, 2), "f64", dist_map)

    def test_ids_advance_per_array(self):
        ctx = solo_ctx()
        first, second = dzeros(ctx, (1, 1)), dzeros(ctx, (1, 1))
        assert second.array_id == first.array_id + 1
        assert second.tag(0) != first.tag(0)


class TestLocalBlocks:
    def test_put_then_read_round_trip(self, rng):
        array = dzeros(solo_ctx(), (3, 5))
        block = rng.standard_normal((3, 5))

        assert put_local(array, block) is array
        np.testing.assert_array_equal(local_part(array), block)

    def test_local_part_is_a_copy(self):
        array = dzeros(solo_ctx(), (2, 2))
        local_part(array)[0, 0] = 9.0
        assert local_part(array)[0, 0] == 0.0

    def test_wrong_width(self):
        with pytest.raises(ShapeMismatchError):
            put_local(dzeros(solo_ctx(), (3, 5)), np.zeros((3, 4)))

    def test_complex_into_real_array(self):
        with pytest.raises(ShapeMismatchError):
            put_local(dzeros(solo_ctx(), (1, 2)), np.array([[1j, 2.0]]))

    def test_real_into_complex_array(self):
        with pytest.raises(ShapeMismatchError, match="complex"):
            put_local(dzeros(solo_ctx(), (1, 2), "complex-f64"), np.array([[1.0, 2.0]]))

    def test_integer_block_into_real_array(self):
        array = put_local(dzeros(solo_ctx(), (1, 2)), np.array([[1, 2]]))
        assert local_part(array).dtype == np.float64

    def test_single_rank_identity_chain(self, rng):
        ctx = solo_ctx()
        matrix = rng.standard_normal((6, 4))
        array = put_local(dzeros(ctx, matrix.shape), matrix)

        np.testing.assert_array_equal(agg(ctx, array), matrix)
        np.testing.assert_array_equal(local_part(transpose_grid(ctx, array)), matrix)


class TestAgg:
    def test_definitional_stitch(self, settings):
        result = launch(2, stitch_fixed_blocks, settings=settings)

        np.testing.assert_array_equal(result[0], [[1, 2, 3, 4], [5, 6, 7, 8]])
        assert result[1] is None

    @pytest.mark.parametrize("workers", [1, 2, 3, 4, 8])
    @pytest.mark.parametrize("dist_dim", [DistDim.COLS, DistDim.ROWS])
    def test_scatter_agg_round_trip(self, settings, rng, workers, dist_dim):
        matrix = rng.standard_normal((17, 23))
        result = launch(workers, scatter_and_agg, matrix, "f64", dist_dim, settings=settings)[0]

        assert np.array_equal(result, matrix)

    def test_complex_round_trip(self, settings, rng):
        matrix = random_matrix(rng, (5, 9), "complex-f64")
        result = launch(3, scatter_and_agg, matrix, "complex-f64", DistDim.COLS, settings=settings)[0]

        assert result.dtype == np.complex128
        assert np.array_equal(result, matrix)

    @pytest.mark.parametrize("dist_dim", [DistDim.COLS, DistDim.ROWS])
    def test_repeated_agg_is_bit_identical(self, settings, rng, dist_dim):
        matrix = rng.standard_normal((7, 10))
        first, second = launch(3, agg_twice, matrix, dist_dim, settings=settings)[0]

        assert first.tobytes() == second.tobytes()
        assert np.array_equal(first, matrix)


class TestTransposeGrid:
    def test_four_by_four_over_two_ranks(self, settings):
        matrix = np.arange(16, dtype=np.float64).reshape(4, 4)
        results = launch(2, rows_after_transpose, matrix, settings=settings)

        for rank, (before, after, rows) in enumerate(results):
            np.testing.assert_array_equal(before, matrix[:, 2 * rank:2 * rank + 2])
            np.testing.assert_array_equal(after, matrix[2 * rank:2 * rank + 2, :])
            assert (rows.start, rows.len) == (2 * rank, 2)

    def test_complex_round_trip_is_bit_identical(self, settings, rng):
        matrix = random_matrix(rng, (13, 7), "complex-f64")
        before, flipped, restored = launch(4, transpose_cases, [(matrix, "complex-f64")], settings=settings)[0][0]

        assert np.array_equal(before, matrix)
        assert np.array_equal(flipped, matrix)
        assert np.array_equal(restored, matrix)

    def test_conservation_on_random_cases(self, settings, rng):
        by_workers = {workers: [] for workers in range(1, 9)}
        for _ in range(200):
            shape = (int(rng.integers(1, 65)), int(rng.integers(1, 65)))
            kind = "f64" if rng.random() < 0.5 else "complex-f64"
            by_workers[int(rng.integers(1, 9))].append((random_matrix(rng, shape, kind), kind))

        for workers, cases in by_workers.items():
            if not cases:
                continue
            results = launch(workers, transpose_cases, cases, settings=settings)[0]
            for (matrix, _), (before, flipped, restored) in zip(cases, results):
                assert np.array_equal(before, matrix)
                assert np.array_equal(flipped, before)
                assert np.array_equal(restored, before)

    def test_independent_arrays_do_not_interfere(self, settings, rng):
        real = rng.standard_normal((6, 9))
        complex_ = random_matrix(rng, (8, 5), "complex-f64")
        outcomes = launch(3, interleaved_arrays, real, complex_, settings=settings)

        (second, first_flipped, second_flipped, first), _ = outcomes[0]
        assert np.array_equal(first, real) and np.array_equal(first_flipped, real)
        assert np.array_equal(second, complex_) and np.array_equal(second_flipped, complex_)
        assert [note for _, note in outcomes] == [2.0, 0.0, 1.0]

    def test_mixed_directions_fail(self, settings):
        with pytest.raises(WorkerFailedError, match="redistributes"):
            launch(2, mixed_directions, settings=settings)

    @pytest.mark.socket
    def test_socket_backend_matches_inproc(self, settings, rng):
        cases = [(random_matrix(rng, (9, 6), "complex-f64"), "complex-f64"), (rng.standard_normal((5, 11)), "f64")]
        inproc = launch(2, transpose_cases, cases, backend="inproc", settings=settings)[0]
        loopback = launch(2, transpose_cases, cases, backend="socket", settings=settings)[0]

        for left, right in zip(inproc, loopback):
            for a, b in zip(left, right):
                assert np.array_equal(a, b)
