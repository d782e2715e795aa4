"""Longest prefix matching over a compressed key set.

Keys can be written as raw bit strings or IPv4 CIDR prefixes.  A query
returns the stored key sharing the longest prefix with it, the operation
behind routing-table lookups.
"""

import tempfile

from alctrie import compress, load_keys, longest_prefix_match, structure_stats
from alctrie.lctrie import match_length
from alctrie.source import parse_key_line

KEY_LINES = """\
# a toy forwarding table; keys must be pairwise distinguishable and long
# enough to address every compressed stride on their path
11.0.0.0/16
10.0.0.0/16
10.1.0.0/16
192.168.0.0/24
192.168.128.0/24
0101010101010101
"""

QUERIES = [
    "10.0.0.1/32",
    "10.1.2.3/32",
    "192.168.0.77/32",
    "11.255.0.1/32",
    "0101010111",
]


def main():
    with tempfile.NamedTemporaryFile("w", suffix=".txt", delete=False) as fh:
        fh.write(KEY_LINES)
        path = fh.name
    keys = load_keys(path)
    print(f"loaded {len(keys)} keys")

    for alpha in (1.0, 0.5):
        trie = compress(keys, alpha)
        stats = structure_stats(trie)
        print(f"alpha = {alpha}: {stats.node_count} compressed nodes, "
              f"max depth {stats.max_depth}, "
              f"empty slots {stats.empty_slot_fraction:.2f}, "
              f"consumed histogram {stats.consumed_histogram}")

    trie = compress(keys, 0.5)
    print("\nqueries:")
    for q in QUERIES:
        bits = parse_key_line(q)
        kid = longest_prefix_match(trie, bits)
        print(f"  {q:>18} -> key {kid} "
              f"(matches {match_length(trie, bits, kid)} bits)")


if __name__ == "__main__":
    main()
