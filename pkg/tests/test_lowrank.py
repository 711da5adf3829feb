import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrimg import linalg
from lrimg.errors import (
    InvalidInputError,
    InvalidRankError,
    LrifCorruptError,
    LrifFormatError,
    LrifVersionError,
)
from lrimg.image import ImageTensor, load_image, tensor_from_array
from lrimg.linalg import SvdFactors, frobenius_norm, residual_from_sigma, svd
from lrimg.lowrank import (
    DEFAULT_GRID,
    HEADER_SIZE,
    LowRankImage,
    ToleranceSpec,
    compress,
    compress_at_rank,
    decode_lrif,
    decompress,
    encode_lrif,
    factor_storage_bytes,
    reconstruct_planes,
    select_rank,
)
from lrimg.metrics import error_map, edge_error_ratio, relative_frobenius_error

from conftest import random_image_matrix


def select_rank_scan_oracle(sigma, tolerance):
    """Brute-force linear scan over every rank."""
    sigma = np.asarray(sigma, dtype=float)
    total = np.sqrt(np.sum(sigma**2))
    for k in range(1, len(sigma) + 1):
        if residual_from_sigma(sigma, k) <= tolerance * total:
            return k
    return len(sigma)


def random_lowrank(rng):
    h = int(rng.integers(2, 24))
    w = int(rng.integers(2, 24))
    channels = int(rng.choice([1, 3, 4]))
    factors = []
    for _ in range(channels):
        k = int(rng.integers(1, min(h, w) + 1))
        u = rng.normal(size=(h, k)).astype(np.float32).astype(np.float64)
        sigma = np.sort(rng.uniform(0, 1000, size=k))[::-1]
        sigma = sigma.astype(np.float32).astype(np.float64)
        vt = rng.normal(size=(k, w)).astype(np.float32).astype(np.float64)
        factors.append(SvdFactors(u=u, sigma=sigma, vt=vt))
    return LowRankImage(height=h, width=w, factors=tuple(factors))


class TestToleranceSpec:
    def test_default_grid(self):
        ts = ToleranceSpec()
        assert ts.grid[0] == pytest.approx(0.05)
        assert ts.grid[-1] == pytest.approx(0.95)
        assert len(ts.grid) == 19

    def test_rejects_unsorted(self):
        with pytest.raises(InvalidInputError):
            ToleranceSpec(grid=(0.5, 0.2))

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError):
            ToleranceSpec(grid=(0.0, 0.5))
        with pytest.raises(InvalidInputError):
            ToleranceSpec(grid=(0.5, 1.5))


class TestSelectRank:
    def test_two_value_loose(self):
        assert select_rank([4.0, 3.0], 0.7) == 1

    def test_two_value_tight(self):
        assert select_rank([4.0, 3.0], 0.5) == 2

    def test_all_zero_sigma(self):
        assert select_rank([0.0, 0.0], 0.3) == 1

    def test_tolerance_out_of_range(self):
        with pytest.raises(InvalidInputError):
            select_rank([1.0], 0.0)
        with pytest.raises(InvalidInputError):
            select_rank([1.0], 1.2)

    def test_matches_scan_oracle_on_image_like_matrix(self, rng):
        sigma = svd(random_image_matrix(rng, 50, 50)).sigma
        for tolerance in (0.05, 0.17, 0.5, 1.0):
            assert select_rank(sigma, tolerance) == select_rank_scan_oracle(
                sigma, tolerance
            )

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(min_value=0, max_value=1e4), min_size=1, max_size=12),
        st.floats(min_value=1e-3, max_value=1.0),
    )
    def test_minimality_property(self, values, tolerance):
        sigma = np.sort(np.array(values))[::-1]
        k = select_rank(sigma, tolerance)
        assert k == select_rank_scan_oracle(sigma, tolerance)
        total = np.sqrt(np.sum(sigma**2))
        if k > 1:
            assert residual_from_sigma(sigma, k - 1) > tolerance * total

    def test_monotone_in_tolerance(self, rng):
        sigma = svd(random_image_matrix(rng, 30, 40)).sigma
        ranks = [select_rank(sigma, t) for t in DEFAULT_GRID]
        assert all(a >= b for a, b in zip(ranks, ranks[1:]))


class TestCompress:
    def test_constant_image_rank_one_exact(self):
        t = tensor_from_array(np.full((10, 12, 3), 128.0))
        low = compress(t, 0.5)
        assert low.ranks == (1, 1, 1)
        out = decompress(low)
        for p in out.planes:
            assert np.array_equal(p, np.full((10, 12), 128.0))

    def test_tolerance_one_gives_rank_one(self, rng):
        t = tensor_from_array(np.clip(rng.uniform(0, 255, size=(8, 8, 3)), 0, 255))
        assert compress(t, 1.0).ranks == (1, 1, 1)

    def test_global_float_error_within_tolerance(self, corpus_paths):
        photo = load_image([p for p in corpus_paths if p.name == "rgb-meadow.png"][0])
        tolerance = 0.10
        low = compress(photo, tolerance)
        planes = reconstruct_planes(low)
        diff_sq = sum(
            float(np.sum((o - r) ** 2)) for o, r in zip(photo.planes, planes)
        )
        ref_sq = sum(float(np.sum(o * o)) for o in photo.planes)
        assert np.sqrt(diff_sq / ref_sq) <= tolerance

    def test_zero_channel_stored_at_rank_one(self):
        planes = (
            np.full((6, 6), 50.0),
            np.full((6, 6), 60.0),
            np.full((6, 6), 70.0),
            np.zeros((6, 6)),
        )
        low = compress(ImageTensor(planes=planes), 0.2)
        assert low.ranks[3] == 1
        assert low.factors[3].sigma[0] == 0.0
        assert np.array_equal(decompress(low).planes[3], np.zeros((6, 6)))

    def test_per_channel_implies_global_all_tolerances(self, rng):
        arr = np.dstack([random_image_matrix(rng, 20, 25) for _ in range(3)])
        t = tensor_from_array(arr)
        for tolerance in (0.05, 0.3, 0.8):
            low = compress(t, tolerance)
            planes = reconstruct_planes(low)
            diff = np.sqrt(
                sum(float(np.sum((o - r) ** 2)) for o, r in zip(t.planes, planes))
            )
            ref = np.sqrt(sum(float(np.sum(o * o)) for o in t.planes))
            assert diff <= tolerance * ref


class TestCompressAtRank:
    def test_full_rank_within_quantization_floor(self, corpus_paths):
        t = load_image(corpus_paths[0])
        low = compress_at_rank(t, min(t.height, t.width))
        out = decompress(low)
        for a, b in zip(t.planes, out.planes):
            assert np.abs(a - b).max() <= 1.0

    def test_rank_one_constant_exact(self):
        t = tensor_from_array(np.full((5, 7), 42.0))
        assert np.array_equal(decompress(compress_at_rank(t, 1)).planes[0], t.planes[0])

    def test_rank_out_of_range(self):
        t = tensor_from_array(np.zeros((4, 9)))
        with pytest.raises(InvalidRankError):
            compress_at_rank(t, 0)
        with pytest.raises(InvalidRankError):
            compress_at_rank(t, 5)

    def test_edge_concentration_on_dog_fixture(self, corpus_dir):
        t = load_image(corpus_dir / "dog.pgm")
        low = compress_at_rank(t, 5)
        em = error_map(t, decompress(low))
        assert edge_error_ratio(t.planes[0], em) >= 2.0


class TestDecompress:
    def test_roundtrip_within_rounding(self, corpus_paths):
        t = load_image(corpus_paths[1])
        low = compress_at_rank(t, min(t.height, t.width))
        out = decompress(low)
        for a, b in zip(t.planes, out.planes):
            assert np.abs(a - b).max() <= 1.0

    def test_decode_encode_same_reconstruction(self, rng):
        low = random_lowrank(rng)
        back = decode_lrif(encode_lrif(low))
        a = decompress(low)
        b = decompress(back)
        for pa, pb in zip(a.planes, b.planes):
            assert np.array_equal(pa, pb)


class TestLrif:
    def test_payload_arithmetic(self, rng):
        sigma = np.sort(rng.uniform(1, 100, 10))[::-1]
        low = LowRankImage(
            height=100,
            width=100,
            factors=(
                SvdFactors(
                    u=rng.normal(size=(100, 10)), sigma=sigma, vt=rng.normal(size=(10, 100))
                ),
            ),
        )
        data = encode_lrif(low)
        assert len(data) == 16 + 4 + 10 * (100 + 100 + 1) * 4
        assert factor_storage_bytes(low) == len(data)

    def test_distinct_ranks_distinct_lengths(self, corpus_paths):
        t = load_image(corpus_paths[0])
        sizes = {k: len(encode_lrif(compress_at_rank(t, k))) for k in (1, 3, 7)}
        assert len(set(sizes.values())) == 3

    def test_rank_doubling_doubles_payload(self, corpus_paths):
        t = load_image(corpus_paths[0])
        s1 = len(encode_lrif(compress_at_rank(t, 4))) - HEADER_SIZE - 4 * t.channels
        s2 = len(encode_lrif(compress_at_rank(t, 8))) - HEADER_SIZE - 4 * t.channels
        assert s2 == 2 * s1

    def test_roundtrip_field_for_field(self, rng):
        for _ in range(10):
            low = random_lowrank(rng)
            back = decode_lrif(encode_lrif(low))
            assert back.height == low.height and back.width == low.width
            assert back.ranks == low.ranks
            for fa, fb in zip(low.factors, back.factors):
                assert np.array_equal(fa.u, fb.u)
                assert np.array_equal(fa.sigma, fb.sigma)
                assert np.array_equal(fa.vt, fb.vt)

    def test_encode_decode_encode_identical(self, rng):
        low = random_lowrank(rng)
        data = encode_lrif(low)
        assert encode_lrif(decode_lrif(data)) == data

    def test_empty_bytes(self):
        with pytest.raises(LrifFormatError):
            decode_lrif(b"")

    def test_bad_magic(self):
        with pytest.raises(LrifFormatError):
            decode_lrif(b"NOPE" + b"\x00" * 20)

    def test_truncated_file_reports_offset(self, rng):
        data = encode_lrif(random_lowrank(rng))
        with pytest.raises(LrifCorruptError) as exc:
            decode_lrif(data[:-1])
        assert exc.value.offset is not None

    def test_surplus_bytes_rejected(self, rng):
        data = encode_lrif(random_lowrank(rng))
        with pytest.raises(LrifCorruptError):
            decode_lrif(data + b"\x00")

    def test_version_mismatch(self, rng):
        data = bytearray(encode_lrif(random_lowrank(rng)))
        data[4] = 9
        with pytest.raises(LrifVersionError):
            decode_lrif(bytes(data))

    def test_fixture_roundtrip(self, corpus_paths):
        for p in corpus_paths:
            low = compress(load_image(p), 0.3)
            data = encode_lrif(low)
            assert encode_lrif(decode_lrif(data)) == data
            assert factor_storage_bytes(low) == len(data)
