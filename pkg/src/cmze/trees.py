"""Planar rooted trees, sprouting growth, grafting, and the tree-level solver.

Two tree representations are used, matched to what each operation needs:

* plain planar trees are nested tuples of children (a leaf is ``()``); child
  order is significant;
* branch stacks are tuples of ``(children, inverse)`` units listed bottom to
  top.  Every tree grown from the one-node seed is a stack: the spine runs
  through first children, and all other children are leaves.  Only stacks may
  carry inverse units, and only stacks translate to words.

A forest is a dict from either representation to an exact rational weight.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .families import compositions, kappa, max_order, multinomial
from .words import NCPolynomial, Word, WordAlgebraError, letter

__all__ = [
    "Forest",
    "render_tree",
    "tree_nodes",
    "tree_height",
    "sprout_tree",
    "sprout",
    "sprout_counted",
    "forest_family",
    "stack_to_tree",
    "tree_to_stack",
    "tree_to_word",
    "stack_to_word",
    "forest_to_polynomial",
    "right_graft",
    "tree_solution_F",
    "render_stack",
]

PlainTree = tuple
Unit = Tuple[int, bool]
Stack = Tuple[Unit, ...]
Forest = Dict[object, Fraction]


# ---------------------------------------------------------------------------
# plain trees
# ---------------------------------------------------------------------------

def render_tree(t: PlainTree) -> str:
    return "[" + "".join(render_tree(c) for c in t) + "]"


def tree_nodes(t: PlainTree) -> int:
    return 1 + sum(tree_nodes(c) for c in t)


def tree_height(t: PlainTree) -> int:
    return 0 if not t else 1 + max(tree_height(c) for c in t)


def _germinate(t: PlainTree) -> PlainTree:
    """New node on the apical reached by descending first children."""
    if not t:
        return ((),)
    return (_germinate(t[0]),) + t[1:]


def _fork_at(t: PlainTree, path: Tuple[int, ...]) -> PlainTree:
    if not path:
        # new leaf right after the spine child
        return (t[0], ()) + t[1:]
    i = path[0]
    return t[:i] + (_fork_at(t[i], path[1:]),) + t[i + 1 :]


def _non_apical_paths(t: PlainTree, prefix: Tuple[int, ...] = ()) -> List[Tuple[int, ...]]:
    out = []
    if t:
        out.append(prefix)
        for i, c in enumerate(t):
            out.extend(_non_apical_paths(c, prefix + (i,)))
    return out


def sprout_tree(t: PlainTree) -> List[PlainTree]:
    """All single-node growths: one germination plus one fork per branch node."""
    return [_germinate(t)] + [_fork_at(t, p) for p in _non_apical_paths(t)]


def sprout(f: Forest) -> Forest:
    """Set-valued sprouting: every reachable tree once, weight 1."""
    out: Forest = {}
    for t in f:
        for nt in sprout_tree(t):
            out[nt] = Fraction(1)
    return out


def sprout_counted(f: Forest) -> Forest:
    """Counted sprouting: multiplicities accumulate through the input weights."""
    out: Forest = {}
    for t, w in f.items():
        for nt in sprout_tree(t):
            out[nt] = out.get(nt, Fraction(0)) + w
    return out


# ---------------------------------------------------------------------------
# stacks and translation
# ---------------------------------------------------------------------------

def stack_to_tree(s: Stack) -> PlainTree:
    t = None
    for c, inv in reversed(s):
        if inv:
            raise WordAlgebraError("inverse units have no plain-tree form")
        t = ((),) * c if t is None else (t,) + ((),) * (c - 1)
    return () if t is None else t


def tree_to_stack(t: PlainTree) -> Stack:
    units: List[Unit] = []
    node = t
    while node:
        if any(c != () for c in node[1:]):
            raise WordAlgebraError(
                f"tree {render_tree(t)} is not a branch stack"
            )
        units.append((len(node), False))
        node = node[0]
    return tuple(units)


def stack_to_word(s: Stack, alphabet: str) -> Word:
    # letters read top branch first
    letters = []
    for c, inv in reversed(s):
        if inv and c not in (1, 2):
            raise WordAlgebraError("only unit branches of one or two children invert")
        letters.append(letter(alphabet, c, inv))
    return Word(letters)


def tree_to_word(t: PlainTree, alphabet: str = "a") -> Word:
    return stack_to_word(tree_to_stack(t), alphabet)


def _as_stack(key) -> Stack:
    if key and isinstance(key[0], tuple) and len(key[0]) == 2 and isinstance(key[0][0], int):
        return key
    return tree_to_stack(key)


def forest_to_polynomial(f: Forest, alphabet: str = "a") -> NCPolynomial:
    acc: Dict[Word, Fraction] = {}
    for key, w in f.items():
        wd = stack_to_word(_as_stack(key), alphabet)
        acc[wd] = acc.get(wd, Fraction(0)) + w
    return NCPolynomial(acc)


def render_stack(s: Stack) -> str:
    if not s:
        return "[]"
    try:
        return render_tree(stack_to_tree(s))
    except WordAlgebraError:
        return "".join(f"[{c}^-1]" if inv else f"[{c}]" for c, inv in s)


# ---------------------------------------------------------------------------
# graded families
# ---------------------------------------------------------------------------

def _stack_of_composition(comp: Sequence[int]) -> Stack:
    # word letters are read top-down, so the bottom branch is the last part
    return tuple((c, False) for c in reversed(comp))


def forest_family(kind: str, n: int) -> Forest:
    """Size-n forest of one family, keyed by plain trees.

    All three families share the same 2^{n-1} stack shapes and differ only in
    weights: counted-sprout weights, inverse-factorial weights, or the
    alternating sign by height.
    """
    if n > max_order():
        raise ValueError(f"order {n} exceeds cap {max_order()}")
    if n == 0:
        return {(): Fraction(1)}
    weights = {
        "type1": lambda comp: kappa(comp) * multinomial(comp),
        "type2": lambda comp: Fraction(multinomial(comp), math.factorial(len(comp))),
        "bipart": lambda comp: Fraction((-1) ** (len(comp) + 1)),
    }
    if kind not in weights:
        raise ValueError(f"unknown family {kind!r}")
    out: Forest = {}
    for comp in compositions(n):
        out[stack_to_tree(_stack_of_composition(comp))] = weights[kind](comp)
    return out


# ---------------------------------------------------------------------------
# right grafting and the functional-equation solver
# ---------------------------------------------------------------------------

def _graft_stacks(x: Stack, y: Stack) -> Stack:
    """x stacked on top of y, cancelling inverse pairs at the junction."""
    ly = list(y)
    lx = list(x)
    while ly and lx:
        cy, iy = ly[-1]
        cx, ix = lx[0]
        if cy == cx and iy != ix:
            ly.pop()
            lx.pop(0)
        else:
            break
    return tuple(ly + lx)


def right_graft(f: Forest, g: Forest) -> Forest:
    """Bilinear right-grafting product of stack forests (f on top of g)."""
    out: Forest = {}
    for kx, wx in f.items():
        sx = _as_stack(kx)
        for ky, wy in g.items():
            sy = _as_stack(ky)
            s = _graft_stacks(sx, sy)
            out[s] = out.get(s, Fraction(0)) + wx * wy
            if out[s] == 0:
                del out[s]
    return out


def _unit_forest(c: int, inverse: bool = False) -> Forest:
    return {((c, inverse),): Fraction(1)}


def _stack_family(kind: str, n: int, k: int | None = None) -> Forest:
    """Family forests keyed by stacks, optionally restricted to height ``k``."""
    weights = {
        "type1": lambda comp: kappa(comp) * multinomial(comp),
        "type2": lambda comp: Fraction(multinomial(comp), math.factorial(len(comp))),
        "bipart": lambda comp: Fraction((-1) ** (len(comp) + 1)),
    }
    out: Forest = {}
    for comp in compositions(n, k):
        out[_stack_of_composition(comp)] = weights[kind](comp)
    return out


def tree_solution_F(order: int) -> List[Forest]:
    """Stack-forest coefficients solving the graded functional equation.

    Grade by grade the bipartition generating forest is matched against
    grafted powers of the branch-unit generating forest; the leading chain of
    single-child units is peeled off by grafting inverse units.  Translation
    through the moment dictionary reproduces the word-level operator ladder.
    """
    if order > max_order():
        raise ValueError(f"order {order} exceeds cap {max_order()}")
    sol: List[Forest] = [_stack_family("bipart", 2)]
    for n in range(1, order + 1):
        target = _stack_family("bipart", n + 2)
        for k in range(1, n):
            contrib = right_graft(sol[k], _stack_family("type2", n, k))
            for s, w in contrib.items():
                target[s] = target.get(s, Fraction(0)) - w
                if target[s] == 0:
                    del target[s]
        inv_chain: Forest = {tuple(((1, True),) * n): Fraction(1)}
        sol.append(right_graft(target, inv_chain))
    return sol
