from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alctrie.lctrie import (
    AlcNode,
    _group_fillup,
    compress,
    depth,
    designated_depth,
    longest_prefix_match,
    match_length,
    structure_stats,
)
from alctrie.source import KeySet, SourceParams, generate_keys
from alctrie.trie import IndistinguishableKeysError, build, external_depth

from conftest import (
    finite_from_random,
    random_queries,
    ref_compress,
    ref_lpm,
    same_structure,
)


def keys_from(*lines):
    return KeySet.from_lines(lines)


def leaf_ids(node):
    out = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, AlcNode):
            stack.extend(c for c in cur.children if c is not None)
        elif cur is not None:
            out.append(cur)
    return out


def all_nodes(node):
    stack = [node] if isinstance(node, AlcNode) else []
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(c for c in cur.children if isinstance(c, AlcNode))


def test_two_keys_any_alpha():
    for alpha in (0.1, 0.5, 1.0):
        alc = compress(keys_from("0", "1"), alpha)
        assert isinstance(alc.root, AlcNode)
        assert alc.root.consumed == 1
        assert alc.root.children == [0, 1]
        assert depth(alc, 0) == depth(alc, 1).__class__(key_id=0, depth=1,
                                                        consumed_total=1)
        assert depth(alc, 1).depth == 1


def test_four_keys_full_alpha():
    alc = compress(keys_from("00", "01", "10", "11"), 1.0)
    assert alc.root.consumed == 2
    assert alc.root.children == [0, 1, 2, 3]
    for i in range(4):
        assert depth(alc, i).depth == 1


def test_empty_and_singleton():
    empty = compress(generate_keys(SourceParams(0.5, 0), 0), 0.5)
    assert empty.root is None
    single = compress(generate_keys(SourceParams(0.5, 0), 1), 0.5)
    assert single.root == 0
    assert depth(single, 0).depth == 0
    assert depth(single, 0).consumed_total == 0


def test_depth_unknown_key():
    alc = compress(keys_from("0", "1"), 0.5)
    with pytest.raises(KeyError):
        depth(alc, 2)
    with pytest.raises(KeyError):
        designated_depth(keys_from("0", "1"), 0.5, 7)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=48),
    p=st.sampled_from([0.3, 0.5, 0.7]),
    alpha=st.sampled_from([0.25, 0.5, 0.75, 1.0]),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_compress_matches_reference(n, p, alpha, seed):
    ks, _, tuples = finite_from_random(p, seed, n)
    alc = compress(ks, alpha)
    ref = ref_compress(list(enumerate(tuples)), alpha)
    assert same_structure(alc.root, ref)
    # leaf multiset preserved
    assert sorted(leaf_ids(alc.root)) == list(range(n))
    trie = build(ks)
    for node in all_nodes(alc.root):
        assert node.consumed >= 1
        assert len(node.children) == 1 << node.consumed
    for i in range(n):
        ds = depth(alc, i)
        ext = external_depth(trie, i)
        assert ds.depth <= ext <= ds.consumed_total
        if ds.consumed_total == ds.depth:
            # every step consumed one level, squeezing depth onto ext;
            # the converse fails: a wide stride can end at a key that was
            # already unique earlier in the stride
            assert ds.depth == ext


def test_full_alpha_reduces_to_classic_level_compression():
    # with alpha = 1 each node consumes (classic fillup level of its group) + 1
    from alctrie.trie import alpha_fillup_level, level_profile

    ks = generate_keys(SourceParams(0.7, 8080), 40)
    alc = compress(ks, 1.0)
    trie = build(ks)
    classic = alpha_fillup_level(level_profile(trie), 1.0)
    assert alc.root.consumed == classic + 1


def test_designated_depth_equals_full_compression_depth():
    for seed in range(12):
        ks = generate_keys(SourceParams(0.7, seed), 200)
        alc = compress(ks, 0.5)
        assert designated_depth(ks, 0.5, 0) == depth(alc, 0)
        assert designated_depth(ks, 0.5, 13) == depth(alc, 13)


def test_root_fillup_monotone_in_alpha():
    for seed in (1, 2, 3, 4, 5):
        ks = generate_keys(SourceParams(0.7, seed), 256)
        ids = np.arange(256)
        levels = [_group_fillup(ks, ids, 0, a) for a in (0.1, 0.25, 0.5, 0.75, 1.0)]
        assert levels == sorted(levels, reverse=True)


def test_root_consumed_monotone_in_alpha():
    for seed in range(8):
        ks = generate_keys(SourceParams(0.7, 1000 + seed), 128)
        low = compress(ks, 0.25)
        high = compress(ks, 0.75)
        assert low.root.consumed >= high.root.consumed


def test_structure_stats_small_cases():
    two = structure_stats(compress(keys_from("0", "1"), 0.5))
    assert two.node_count == 1
    assert two.empty_slot_fraction == 0.0
    assert two.consumed_histogram == {1: 1}
    assert two.max_depth == 1
    one = structure_stats(compress(generate_keys(SourceParams(0.5, 0), 1), 0.5))
    assert one.node_count == 0
    assert one.max_depth == 0


def test_structure_stats_consistency():
    ks = generate_keys(SourceParams(0.6, 44), 300)
    alc = compress(ks, 0.5)
    stats = structure_stats(alc)
    assert stats.node_count == sum(stats.consumed_histogram.values())
    assert 0.0 <= stats.empty_slot_fraction < 1.0
    assert stats.max_depth == max(depth(alc, i).depth for i in range(300))


def test_compress_needs_slot_bits():
    # key "0" is unique at level 1 but cannot address a 2-bit slot
    with pytest.raises(IndistinguishableKeysError):
        compress(keys_from("0", "10", "11"), 0.5)
    # with alpha > 1/2 the root consumes a single level and all is well
    alc = compress(keys_from("0", "10", "11"), 0.75)
    assert alc.root.consumed == 1
    assert sorted(leaf_ids(alc.root)) == [0, 1, 2]


def test_lpm_empty_keyset():
    alc = compress(generate_keys(SourceParams(0.5, 0), 0), 0.5)
    assert longest_prefix_match(alc, "0101") is None


def test_lpm_singleton_matches_regardless():
    alc = compress(generate_keys(SourceParams(0.5, 99), 1), 0.5)
    assert longest_prefix_match(alc, "111111") == 0


def test_lpm_deeper_key_wins():
    # a /16 under 10.0/ wins over the shallower /8 for a 10.0.0.1 query
    ks = keys_from("11.0.0.0/8", "10.0.0.0/16")
    alc = compress(ks, 0.5)
    query = "0000101000000000000000000000000" + "1"
    assert longest_prefix_match(alc, query) == 1
    assert match_length(alc, query, 1) == 16
    assert match_length(alc, query, 0) == 7


def test_lpm_tie_breaks_to_smallest_id():
    ks = keys_from("000", "001")
    alc = compress(ks, 1.0)
    assert longest_prefix_match(alc, "01") == 0
    assert longest_prefix_match(alc, "") == 0


def test_lpm_query_shorter_than_stride():
    ks = keys_from("0000", "0001", "0010", "0011", "1000")
    alc = compress(ks, 0.25)
    for q in ("", "0", "00", "1", "10"):
        got = longest_prefix_match(alc, q)
        want, _ = ref_lpm(ks, tuple(int(c) for c in q))
        assert got == want


@settings(max_examples=20, deadline=None)
@given(
    n=st.integers(min_value=0, max_value=40),
    p=st.sampled_from([0.3, 0.5, 0.7]),
    alpha=st.sampled_from([0.3, 0.6, 1.0]),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_lpm_matches_linear_scan(n, p, alpha, seed):
    ks = generate_keys(SourceParams(p, seed), n)
    alc = compress(ks, alpha)
    rng = np.random.default_rng(seed ^ 0xBEEF)
    for q in random_queries(rng, 25):
        got = longest_prefix_match(alc, q)
        want, want_len = ref_lpm(ks, q)
        assert got == want
        if got is not None:
            assert match_length(alc, q, got) == want_len


def test_lpm_with_finite_keys_of_mixed_length():
    ks = keys_from("0", "10", "110", "111000", "1111")
    alc = compress(ks, 0.75)
    rng = np.random.default_rng(3)
    for q in random_queries(rng, 60, max_len=10):
        got = longest_prefix_match(alc, q)
        want, _ = ref_lpm(ks, q)
        assert got == want


def test_query_bit_validation():
    alc = compress(keys_from("0", "1"), 0.5)
    with pytest.raises(ValueError):
        longest_prefix_match(alc, "01x")
    with pytest.raises(ValueError):
        longest_prefix_match(alc, (0, 2))


def test_depth_sample_fields():
    ks = generate_keys(SourceParams(0.7, 11), 64)
    sample = depth(compress(ks, 0.5), 7)
    assert sample.key_id == 7
    assert sample.depth >= 1
    assert sample.consumed_total >= sample.depth
