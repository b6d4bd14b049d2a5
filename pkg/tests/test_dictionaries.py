import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdcs import (
    ArrayConfig,
    Atom,
    BlockPartition,
    ConfigurationError,
    Dictionary,
    block_metrics,
    build_angular_dictionary,
    build_polar_dictionary,
    coherence,
    export_metadata_csv,
    steering,
)
from helpers import random_dictionary


def brute_force_coherence(matrix):
    g = matrix.shape[1]
    best = 0.0
    for i in range(g):
        for j in range(g):
            if i != j:
                best = max(best, abs(np.vdot(matrix[:, i], matrix[:, j])))
    return best


def brute_force_block_metrics(matrix, block_length):
    g = matrix.shape[1]
    blocks = [matrix[:, s : s + block_length] for s in range(0, g, block_length)]
    mu_b = 0.0
    for b, mb in enumerate(blocks):
        for c, mc in enumerate(blocks):
            if b == c:
                continue
            product = mb.conj().T @ mc
            top = np.sqrt(max(np.linalg.eigvalsh(product.conj().T @ product).max(), 0.0))
            mu_b = max(mu_b, top / block_length)
    nu = 0.0
    for mb in blocks:
        for i in range(block_length):
            for j in range(block_length):
                if i != j:
                    nu = max(nu, abs(np.vdot(mb[:, i], mb[:, j])))
    return mu_b, nu


class TestAngularDictionary:
    def test_orthogonal_grid(self):
        arr = ArrayConfig(8, 30e9)
        d = build_angular_dictionary(arr, 1, 1)
        assert d.num_atoms == 8
        gram = d.atoms.conj().T @ d.atoms
        assert np.allclose(gram, np.eye(8), atol=1e-10)

    def test_oversampled_grid(self):
        arr = ArrayConfig(4, 30e9)
        d = build_angular_dictionary(arr, 2, 1)
        assert d.num_atoms == 8
        gram = np.abs(d.atoms.conj().T @ d.atoms)
        np.fill_diagonal(gram, 0)
        assert gram.max() > 0.1
        # brute-force Gram agrees with the matrix product
        assert abs(coherence(d) - brute_force_coherence(d.atoms)) < 1e-12

    def test_partition_arithmetic(self):
        arr = ArrayConfig(256, 30e9)
        d = build_angular_dictionary(arr, 1, 4)
        assert d.partition.num_blocks == 64
        assert d.partition.size == 256
        assert d.partition.uniform_length == 4

    def test_non_divisible_block_length(self):
        with pytest.raises(ConfigurationError):
            build_angular_dictionary(ArrayConfig(8, 30e9), 1, 3)

    def test_metadata_angles_cover_grid(self):
        d = build_angular_dictionary(ArrayConfig(16, 30e9), 1, 1)
        angles = [a.spatial_angle for a in d.metadata]
        assert angles[0] == pytest.approx(-15 / 16)
        assert angles[-1] == pytest.approx(15 / 16)
        assert all(np.isinf(a.distance) for a in d.metadata)


class TestPolarDictionary:
    def test_reference_size_window(self):
        d = build_polar_dictionary(ArrayConfig(256, 30e9), block_length=4)
        assert 1870 <= d.num_atoms <= 2530
        assert d.num_atoms > 4 * 256

    def test_large_beta_degenerates_to_far_field(self):
        arr = ArrayConfig(16, 30e9)
        with pytest.warns(UserWarning):
            d = build_polar_dictionary(arr, beta=1e6, r_min=1.0)
        assert d.num_atoms == 16
        assert all(np.isinf(a.distance) for a in d.metadata)

    def test_size_monotone_in_beta_and_r_min(self):
        arr = ArrayConfig(64, 30e9)
        sizes_beta = [
            build_polar_dictionary(arr, beta=b, r_min=1.0).num_atoms for b in (0.8, 1.0, 1.3, 2.0)
        ]
        assert all(a >= b for a, b in zip(sizes_beta, sizes_beta[1:]))
        sizes_rmin = [
            build_polar_dictionary(arr, r_min=r).num_atoms for r in (0.25, 0.5, 1.0, 2.0)
        ]
        assert all(a >= b for a, b in zip(sizes_rmin, sizes_rmin[1:]))

    def test_metadata_round_trip(self):
        arr = ArrayConfig(32, 30e9)
        d = build_polar_dictionary(arr, r_min=0.5)
        for atom in d.metadata[:: max(1, d.num_atoms // 40)]:
            regenerated = steering(arr, atom.distance, atom.spatial_angle)
            assert np.array_equal(regenerated, d.atoms[:, atom.column_index])

    def test_blocks_never_straddle_angles(self):
        arr = ArrayConfig(32, 30e9)
        d = build_polar_dictionary(arr, r_min=0.5, block_length=4)
        for b in range(d.partition.num_blocks):
            sl = d.partition.block_slice(b)
            block_angles = {d.metadata[i].spatial_angle for i in range(sl.start, sl.stop)}
            assert len(block_angles) == 1

    def test_rings_are_contiguous_and_descending(self):
        arr = ArrayConfig(32, 30e9)
        d = build_polar_dictionary(arr, r_min=0.5)
        per_angle = {}
        for atom in d.metadata:
            per_angle.setdefault(atom.spatial_angle, []).append(atom.distance)
        for distances in per_angle.values():
            assert np.isinf(distances[0])
            finite = distances[1:]
            assert all(a > b for a, b in zip(finite, finite[1:]))

    def test_invalid_parameters(self):
        arr = ArrayConfig(8, 30e9)
        with pytest.raises(ValueError):
            build_polar_dictionary(arr, beta=0.0)
        with pytest.raises(ValueError):
            build_polar_dictionary(arr, r_min=-1.0)


class TestCoherence:
    def test_orthonormal_zero(self):
        d = build_angular_dictionary(ArrayConfig(8, 30e9), 1, 1)
        assert coherence(d) < 1e-10

    def test_duplicate_columns_one(self):
        rng = np.random.default_rng(0)
        col = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        col /= np.linalg.norm(col)
        m = np.column_stack([col, col, rng.standard_normal(6) / 10 + col])
        m /= np.linalg.norm(m, axis=0)
        assert coherence(m) == pytest.approx(1.0, abs=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))
        m /= np.linalg.norm(m, axis=0)
        assert abs(coherence(m) - brute_force_coherence(m)) < 1e-12

    def test_needs_two_columns(self):
        with pytest.raises(ValueError):
            coherence(np.ones((4, 1)))


class TestBlockMetrics:
    def test_single_column_blocks_reduce_to_coherence(self):
        rng = np.random.default_rng(5)
        d = random_dictionary(rng, 8, 16, 1)
        metrics = block_metrics(d)
        assert metrics.block_coherence == coherence(d)
        assert metrics.sub_coherence == 0.0

    def test_identical_subspace_blocks_maximal(self):
        rng = np.random.default_rng(6)
        col = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        col /= np.linalg.norm(col)
        m = np.column_stack([col, col, col, col])  # two blocks spanning the same line
        metrics = block_metrics(m, BlockPartition.uniform(4, 2))
        mu_b, nu = brute_force_block_metrics(m, 2)
        assert metrics.block_coherence == pytest.approx(1.0, abs=1e-12)
        assert metrics.block_coherence == pytest.approx(mu_b, abs=1e-12)
        assert metrics.sub_coherence == pytest.approx(nu, abs=1e-12)

    def test_block_diagonal_orthogonal_zero(self):
        m = np.eye(8, dtype=complex)
        metrics = block_metrics(m, BlockPartition.uniform(8, 2))
        assert metrics.block_coherence == 0.0

    @pytest.mark.parametrize("block_length", [1, 2, 4])
    def test_matches_brute_force(self, block_length):
        rng = np.random.default_rng(40 + block_length)
        for _ in range(5):
            d = random_dictionary(rng, 16, 40, block_length)
            metrics = block_metrics(d)
            assert abs(metrics.coherence - brute_force_coherence(d.atoms)) < 1e-12
            mu_b, nu = brute_force_block_metrics(d.atoms, block_length)
            assert abs(metrics.block_coherence - mu_b) < 1e-12
            assert abs(metrics.sub_coherence - nu) < 1e-12

    def test_non_uniform_partition_rejected(self):
        rng = np.random.default_rng(9)
        m = rng.standard_normal((4, 5)) + 0j
        m /= np.linalg.norm(m, axis=0)
        partition = BlockPartition(((0, 2), (2, 3)))
        with pytest.raises(ConfigurationError):
            block_metrics(m, partition)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_unit_blocks_equal_coherence_property(self, seed):
        rng = np.random.default_rng(seed)
        d = random_dictionary(rng, 6, 12, 1)
        assert block_metrics(d).block_coherence == coherence(d)


class TestBlockPartition:
    def test_cover_validation(self):
        with pytest.raises(ConfigurationError):
            BlockPartition(((0, 2), (3, 2)))  # gap
        with pytest.raises(ConfigurationError):
            BlockPartition(((1, 2),))  # does not start at zero

    def test_uniform_requires_divisibility(self):
        with pytest.raises(ConfigurationError):
            BlockPartition.uniform(10, 3)

    def test_from_lengths(self):
        p = BlockPartition.from_lengths([3, 2, 4])
        assert p.blocks == ((0, 3), (3, 2), (5, 4))
        assert p.uniform_length is None
        assert p.size == 9


class TestDictionaryValidation:
    def test_rejects_non_unit_columns(self):
        m = np.ones((4, 2), dtype=complex)
        meta = (Atom("angular", 0.0, np.inf, 0), Atom("angular", 0.1, np.inf, 1))
        with pytest.raises(ValueError):
            Dictionary(m, meta, BlockPartition.uniform(2, 1))

    def test_metadata_length_checked(self):
        m = np.eye(2, dtype=complex)
        with pytest.raises(ValueError):
            Dictionary(m, (Atom("angular", 0.0, np.inf, 0),), BlockPartition.uniform(2, 1))


def test_export_metadata_csv(tmp_path):
    d = build_polar_dictionary(ArrayConfig(16, 30e9), r_min=0.05, block_length=2)
    path = tmp_path / "atoms.csv"
    export_metadata_csv(d, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["column_index", "domain", "angle", "distance"]
    assert len(rows) == d.num_atoms + 1
    assert rows[1][1] == "polar" and rows[1][3] == "inf"
