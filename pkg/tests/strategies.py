"""Hypothesis strategies for raw trees and signatures."""

from hypothesis import strategies as st


def raw_trees(max_label=3, max_leaves=7):
    """Raw rooted trees: nested lists with at least two children per node."""
    leaves = st.integers(min_value=1, max_value=max_label)
    return st.recursive(
        leaves,
        lambda kids: st.lists(kids, min_size=2, max_size=4),
        max_leaves=max_leaves,
    ).filter(lambda t: not isinstance(t, int))


def small_signatures(max_weight=5, max_letters=3, min_weight=2):
    return st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=max_letters).filter(
        lambda s: min_weight <= sum(s) <= max_weight
    ).map(tuple)
