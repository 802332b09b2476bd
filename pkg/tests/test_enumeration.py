import math
from collections import Counter
from fractions import Fraction

import pytest

import oracles
from figures import FIG5_M33, FIG6_M34, FIG7_M43
from settlement.enumeration import (
    conjecture1_report,
    count_preimages,
    enumerate_maximal,
    xs_distribution_exact,
    xu_distribution,
)
from settlement.errors import ContractViolation, ResourceError
from settlement.grid import Config, Dims, is_maximal, mirror_ew


def law_from_labels(figure, cells):
    """Exact occupancy law read off a figure's (grid, preimage count) labels."""
    by_k = Counter()
    for art, count in figure:
        by_k[art.count("#")] += count
    return {k: Fraction(v, math.factorial(cells)) for k, v in by_k.items()}


class TestEnumerateMaximal:
    @pytest.mark.parametrize(
        "dims, size, spectrum",
        [
            (Dims(3, 3), 10, {7: 9, 8: 1}),
            (Dims(3, 4), 19, {8: 4, 9: 8, 10: 7}),
            (Dims(4, 3), 25, {9: 18, 10: 7}),
            (Dims(1, 4), 1, {4: 1}),
        ],
    )
    @pytest.mark.parametrize("method", ["subset", "backtrack"])
    def test_known_sizes(self, dims, size, spectrum, method):
        result = enumerate_maximal(dims, method)
        assert len(result) == size
        assert result.occupancy_spectrum == spectrum
        assert sum(result.occupancy_spectrum.values()) == len(result.configs)
        assert len(set(result.configs)) == len(result.configs)

    @pytest.mark.parametrize("dims, figure", [(Dims(3, 3), FIG5_M33), (Dims(3, 4), FIG6_M34), (Dims(4, 3), FIG7_M43)])
    def test_matches_figures(self, dims, figure):
        assert set(enumerate_maximal(dims).configs) == {Config.from_ascii(a) for a, _ in figure}

    def test_2x3_against_brute_force(self):
        expected = oracles.maximal_sets(2, 3)
        got = enumerate_maximal(Dims(2, 3))
        assert {frozenset(map(tuple, c.lots())) for c in got.configs} == expected
        assert got.occupancy_spectrum == {5: 4}

    @pytest.mark.parametrize("m, n", [(m, n) for m in range(1, 5) for n in range(1, 5) if m * n <= 12])
    def test_brute_force_oracle(self, m, n):
        got = {frozenset(map(tuple, c.lots())) for c in enumerate_maximal(Dims(m, n)).configs}
        assert got == oracles.maximal_sets(m, n)

    @pytest.mark.parametrize("m, n", [(m, n) for m in range(1, 17) for n in range(1, 17) if m * n <= 16])
    def test_subset_and_backtrack_agree(self, m, n):
        dims = Dims(m, n)
        a = enumerate_maximal(dims, "subset")
        b = enumerate_maximal(dims, "backtrack")
        assert a.configs == b.configs
        assert all(is_maximal(c) for c in a.configs)

    def test_canonical_order(self):
        configs = enumerate_maximal(Dims(3, 4)).configs
        counts = [c.count for c in configs]
        assert counts == sorted(counts, reverse=True)
        keys = [c.key() for c in configs if c.count == 9]
        assert keys == sorted(keys)

    def test_mirror_closure(self):
        for dims in [Dims(3, 3), Dims(3, 4), Dims(4, 3), Dims(4, 4)]:
            configs = set(enumerate_maximal(dims).configs)
            assert {mirror_ew(c) for c in configs} == configs

    def test_budget(self, monkeypatch):
        with pytest.raises(ResourceError) as info:
            enumerate_maximal(Dims(6, 6), "subset")
        assert info.value.budget == "subset_cells"
        monkeypatch.setenv("SETTLEMENT_BACKTRACK_MAX_CELLS", "8")
        with pytest.raises(ResourceError):
            enumerate_maximal(Dims(3, 3), "backtrack")

    def test_unknown_method(self):
        with pytest.raises(ContractViolation):
            enumerate_maximal(Dims(2, 2), "greedy")


class TestXu:
    def test_3x3(self):
        assert xu_distribution(Dims(3, 3)).pmf == {7: Fraction(9, 10), 8: Fraction(1, 10)}

    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_single_row(self, n):
        assert xu_distribution(Dims(1, n)).pmf == {n: 1}

    def test_3x4_from_figure(self):
        spectrum = Counter(a.count("#") for a, _ in FIG6_M34)
        expected = {k: Fraction(v, 19) for k, v in spectrum.items()}
        assert expected == {10: Fraction(7, 19), 9: Fraction(8, 19), 8: Fraction(4, 19)}
        assert xu_distribution(Dims(3, 4)).pmf == expected

    def test_sums_to_one(self):
        for dims in [Dims(3, 3), Dims(4, 4), Dims(2, 5)]:
            assert sum(xu_distribution(dims).pmf.values()) == 1


class TestCensus:
    def test_3x3_matches_figure(self):
        census = count_preimages(Dims(3, 3))
        assert census.counts == {Config.from_ascii(a): v for a, v in FIG5_M33}
        assert census.total == math.factorial(9)

    def test_1x2(self):
        census = count_preimages(Dims(1, 2))
        assert census.counts == {Config.full(Dims(1, 2)): 2}

    @pytest.mark.parametrize("m, n", [(2, 3), (3, 2), (1, 5), (2, 2), (2, 4)])
    def test_brute_force_oracle(self, m, n):
        expected = oracles.brute_census(m, n)
        got = {frozenset(map(tuple, c.lots())): v for c, v in count_preimages(Dims(m, n)).counts.items()}
        assert got == dict(expected)

    @pytest.mark.parametrize("m, n", [(m, n) for m in range(1, 10) for n in range(1, 10) if m * n <= 9])
    def test_total_is_factorial(self, m, n):
        census = count_preimages(Dims(m, n))
        assert census.total == math.factorial(m * n)
        assert all(is_maximal(c) for c in census.counts)

    @pytest.mark.parametrize("shards, workers", [(2, 1), (7, 3), (100, 4), (362880, 1)])
    def test_shard_independence(self, shards, workers):
        base = count_preimages(Dims(3, 3))
        assert count_preimages(Dims(3, 3), shards=shards, workers=workers).counts == base.counts

    def test_sharded_non_square(self):
        dims = Dims(2, 4)
        assert count_preimages(dims, shards=13, workers=2).counts == count_preimages(dims).counts

    def test_mirror_invariance(self):
        for dims in [Dims(3, 3), Dims(2, 4), Dims(3, 2)]:
            counts = count_preimages(dims).counts
            assert all(counts[mirror_ew(c)] == v for c, v in counts.items())

    def test_surjective(self):
        for dims in [Dims(3, 3), Dims(2, 4)]:
            assert set(count_preimages(dims).counts) == set(enumerate_maximal(dims).configs)

    def test_budget(self):
        with pytest.raises(ResourceError) as info:
            count_preimages(Dims(4, 4))
        assert info.value.budget == "census_cells"

    def test_bad_shards(self):
        with pytest.raises(ContractViolation):
            count_preimages(Dims(2, 2), shards=0)


class TestXs:
    def test_3x3(self):
        assert xs_distribution_exact(Dims(3, 3)).pmf == {7: Fraction(9, 14), 8: Fraction(5, 14)}

    def test_3x3_from_figure_labels(self):
        assert xs_distribution_exact(Dims(3, 3)).pmf == law_from_labels(FIG5_M33, 9)

    def test_single_row(self):
        assert xs_distribution_exact(Dims(1, 3)).pmf == {3: 1}

    def test_3x3_mean(self):
        assert xs_distribution_exact(Dims(3, 3)).mean_density() == Fraction(103, 126)

    def test_4x3_from_figure_labels(self, census_cache):
        dist = xs_distribution_exact(Dims(4, 3), census_cache(4, 3))
        assert dist.pmf == law_from_labels(FIG7_M43, 12)
        assert dist.pmf == {9: Fraction(207, 560), 10: Fraction(353, 560)}
        assert dist.support() == [9, 10]

    def test_3x4_from_figure_labels(self, census_cache):
        dist = xs_distribution_exact(Dims(3, 4), census_cache(3, 4))
        assert dist.pmf == law_from_labels(FIG6_M34, 12)

    def test_models_differ(self, census_cache):
        for m, n in [(3, 3), (3, 4), (4, 3)]:
            dims = Dims(m, n)
            census = count_preimages(dims) if m * n < 12 else census_cache(m, n)
            assert xu_distribution(dims).pmf != xs_distribution_exact(dims, census).pmf
        assert xu_distribution(Dims(3, 4)).pmf != xu_distribution(Dims(4, 3)).pmf
        assert (xs_distribution_exact(Dims(3, 4), census_cache(3, 4)).pmf
                != xs_distribution_exact(Dims(4, 3), census_cache(4, 3)).pmf)

    def test_exact_means_ordering(self, census_cache):
        e33 = xs_distribution_exact(Dims(3, 3)).mean_density()
        e34 = xs_distribution_exact(Dims(3, 4), census_cache(3, 4)).mean_density()
        e43 = xs_distribution_exact(Dims(4, 3), census_cache(4, 3)).mean_density()
        assert e34 < e33 and e43 < e33


class TestConjecture1:
    def test_3x3(self):
        report = conjecture1_report(Dims(3, 3))
        assert report.max_count == 129_600 and report.min_count == 25_920
        assert [c.count for c in report.most_built] == [8]
        assert len(report.least_built) == 9
        assert report.holds

    def test_1x2(self):
        report = conjecture1_report(Dims(1, 2))
        assert report.most_built == report.least_built == [Config.full(Dims(1, 2))]
        assert report.holds

    def test_detects_failure(self):
        census = count_preimages(Dims(3, 3))
        flipped = type(census)(census.dims, {c: (1 if v > 100_000 else 2) for c, v in census.counts.items()})
        assert not conjecture1_report(Dims(3, 3), flipped).holds

    def test_3x4(self, census_cache):
        report = conjecture1_report(Dims(3, 4), census_cache(3, 4))
        assert report.max_count == 56_422_080 and report.min_count == 5_116_320
        assert {c.count for c in report.most_built} == {10}
        assert {c.count for c in report.least_built} == {8}
        assert report.holds
