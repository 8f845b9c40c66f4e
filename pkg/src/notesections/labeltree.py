"""Code hierarchies, spanning super-trees, and tree-edit-distance label similarity.

A label set is lifted to its spanning super-tree (labels, all their
ancestors, and the hierarchy root). Two label sets are then compared by

    alpha = 1 - 2 * TED(T_a, T_b) / (|nodes(T_a) | nodes(T_b)| - 1)

where TED is the ordered Zhang-Shasha edit distance with unit costs and
children ordered by code id. alpha lies in [-1, 1].
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

CodeId = str
SYNTHETIC_ROOT = "ROOT"


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True)
class Hierarchy:
    root: CodeId
    parent: Mapping[CodeId, CodeId]

    def __post_init__(self):
        if self.root in self.parent:
            raise HierarchyError(f"root {self.root} has a parent")
        for node in self.parent:
            path = [node]
            seen = {node}
            cur = node
            while cur != self.root:
                if cur not in self.parent:
                    raise HierarchyError(f"orphan node {cur}: not connected to root {self.root}")
                cur = self.parent[cur]
                if cur in seen:
                    witness = path[path.index(cur):] + [cur]
                    raise HierarchyError("cycle: " + " -> ".join(witness))
                seen.add(cur)
                path.append(cur)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[CodeId, CodeId]], root: CodeId) -> "Hierarchy":
        parent: dict[CodeId, CodeId] = {}
        for child, par in edges:
            if child == par:
                raise HierarchyError(f"cycle: {child} -> {child}")
            if child in parent and parent[child] != par:
                raise HierarchyError(f"node {child} has two parents: {parent[child]}, {par}")
            parent[child] = par
        return cls(root, parent)

    @cached_property
    def nodes(self) -> frozenset[CodeId]:
        return frozenset(self.parent) | {self.root}

    @cached_property
    def children(self) -> dict[CodeId, tuple[CodeId, ...]]:
        kids: dict[CodeId, list[CodeId]] = {n: [] for n in self.nodes}
        for child, par in self.parent.items():
            kids[par].append(child)
        return {n: tuple(sorted(c)) for n, c in kids.items()}

    def ancestors(self, code: CodeId) -> list[CodeId]:
        """Proper ancestors of ``code``, nearest first, ending at the root."""
        out = []
        while code != self.root:
            code = self.parent[code]
            out.append(code)
        return out

    def __contains__(self, code: CodeId) -> bool:
        return code in self.nodes


def load_hierarchy(path: str | Path) -> Hierarchy:
    """Read ``child<TAB>parent`` lines plus exactly one ``!root<TAB>code`` line."""
    edges = []
    roots = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise HierarchyError(f"line {lineno}: expected 'child<TAB>parent'")
            if parts[0] == "!root":
                roots.append(parts[1])
            else:
                edges.append((parts[0], parts[1]))
    if len(roots) != 1:
        raise HierarchyError(f"expected exactly one '!root' line, found {len(roots)}")
    return Hierarchy.from_edges(edges, roots[0])


def format_hierarchy(h: Hierarchy) -> str:
    lines = [f"!root\t{h.root}\n"]
    lines += [f"{c}\t{p}\n" for c, p in sorted(h.parent.items())]
    return "".join(lines)


def dotted_parent(code: CodeId) -> CodeId:
    """One step up an ICD-9 style code: 530.81 -> 530.8 -> 530 -> ROOT."""
    if not code:
        raise HierarchyError("empty code")
    stem, dot, suffix = code.partition(".")
    if dot and suffix:
        return f"{stem}.{suffix[:-1]}" if len(suffix) > 1 else stem
    if dot and not stem:
        raise HierarchyError(f"malformed code {code!r}")
    return SYNTHETIC_ROOT


def derive_dotted_parents(codes: Iterable[CodeId]) -> list[tuple[CodeId, CodeId]]:
    edges: set[tuple[CodeId, CodeId]] = set()
    for code in codes:
        if not code:
            raise HierarchyError("empty code")
        cur = code
        while cur != SYNTHETIC_ROOT:
            par = dotted_parent(cur)
            edges.add((cur, par))
            cur = par
    return sorted(edges)


def hierarchy_from_codes(codes: Iterable[CodeId]) -> Hierarchy:
    return Hierarchy.from_edges(derive_dotted_parents(codes), SYNTHETIC_ROOT)


@dataclass(frozen=True)
class SuperTree:
    root: CodeId
    nodes: frozenset[CodeId]
    parent: Mapping[CodeId, CodeId] = field(repr=False)

    @cached_property
    def children(self) -> dict[CodeId, tuple[CodeId, ...]]:
        kids: dict[CodeId, list[CodeId]] = {n: [] for n in self.nodes}
        for child, par in self.parent.items():
            kids[par].append(child)
        return {n: tuple(sorted(c)) for n, c in kids.items()}

    def nested(self, node: CodeId | None = None) -> tuple:
        """The tree as nested ``(label, (child, ...))`` tuples in canonical order."""
        node = self.root if node is None else node
        return (node, tuple(self.nested(c) for c in self.children[node]))

    def __len__(self) -> int:
        return len(self.nodes)


def super_tree(h: Hierarchy, labels: Iterable[CodeId]) -> SuperTree:
    labels = set(labels)
    if not labels:
        raise HierarchyError("empty label set has no super-tree")
    nodes = {h.root}
    for label in sorted(labels):
        if label not in h:
            raise HierarchyError(f"unknown label {label}")
        nodes.add(label)
        nodes.update(h.ancestors(label))
    parent = {n: h.parent[n] for n in nodes if n != h.root}
    return SuperTree(h.root, frozenset(nodes), parent)


def _postorder(tree: tuple) -> tuple[list, list[int]]:
    """Postorder labels and leftmost-leaf indices of a nested tree."""
    labels: list = []
    leftmost: list[int] = []

    def walk(node) -> int:
        label, kids = node
        first = None
        for kid in kids:
            lm = walk(kid)
            if first is None:
                first = lm
        labels.append(label)
        leftmost.append(len(labels) - 1 if first is None else first)
        return leftmost[-1]

    walk(tree)
    return labels, leftmost


def _keyroots(leftmost: list[int]) -> list[int]:
    last: dict[int, int] = {}
    for i, lm in enumerate(leftmost):
        last[lm] = i
    return sorted(last.values())


def ordered_tree_distance(t1: tuple, t2: tuple) -> int:
    """Zhang-Shasha edit distance between nested ``(label, children)`` trees.

    Insert, delete, and relabel cost 1; matching equal labels costs 0.
    """
    l1, lm1 = _postorder(t1)
    l2, lm2 = _postorder(t2)
    n1, n2 = len(l1), len(l2)
    td = [[0] * n2 for _ in range(n1)]
    for i in _keyroots(lm1):
        for j in _keyroots(lm2):
            a, b = lm1[i], lm2[j]
            rows, cols = i - a + 2, j - b + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = x
            for y in range(1, cols):
                fd[0][y] = y
            for x in range(1, rows):
                ii = a + x - 1
                for y in range(1, cols):
                    jj = b + y - 1
                    if lm1[ii] == a and lm2[jj] == b:
                        cost = 0 if l1[ii] == l2[jj] else 1
                        fd[x][y] = min(fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[x - 1][y - 1] + cost)
                        td[ii][jj] = fd[x][y]
                    else:
                        px, py = lm1[ii] - a, lm2[jj] - b
                        fd[x][y] = min(fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[px][py] + td[ii][jj])
    return td[n1 - 1][n2 - 1]


def tree_edit_distance(t1: SuperTree, t2: SuperTree) -> int:
    if t1.root != t2.root:
        raise HierarchyError(f"super-trees have different roots: {t1.root} vs {t2.root}")
    return ordered_tree_distance(t1.nested(), t2.nested())


def soft_similarity(t1: SuperTree, t2: SuperTree) -> float:
    union = len(t1.nodes | t2.nodes)
    if union < 2:
        raise HierarchyError("similarity undefined when both super-trees are the bare root")
    # one division of integers: exactly representable results (0.2, 1.0) come out exact
    return (union - 1 - 2 * tree_edit_distance(t1, t2)) / (union - 1)


def jaccard_similarity(a: Iterable[CodeId], b: Iterable[CodeId]) -> float:
    """Flat |A & B| / |A | B| on raw label sets (ablation baseline)."""
    a, b = set(a), set(b)
    if not a and not b:
        raise HierarchyError("jaccard similarity undefined for two empty sets")
    return len(a & b) / len(a | b)


class AlphaCache:
    """Memoized ``alpha(labels_a, labels_b)`` over one hierarchy.

    Keys are unordered pairs of sorted label tuples. ``maxsize=None`` keeps
    every entry; otherwise least-recently-used entries are evicted. Safe to
    share between threads: a concurrent miss may compute twice but only the
    first stored value is ever returned.
    """

    def __init__(self, hierarchy: Hierarchy, maxsize: int | None = None, mode: str = "tree"):
        if mode not in ("tree", "jaccard"):
            raise ValueError(f"unknown similarity mode {mode!r}")
        self.hierarchy = hierarchy
        self.maxsize = maxsize
        self.mode = mode
        self.hits = 0
        self.misses = 0
        self.computations = 0
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def _compute(self, a: tuple, b: tuple) -> float:
        if self.mode == "jaccard":
            return jaccard_similarity(a, b)
        ta, tb = super_tree(self.hierarchy, a), super_tree(self.hierarchy, b)
        if a == b:
            # dist is 0; skip the DP but keep the bare-root check.
            if len(ta.nodes) < 2:
                raise HierarchyError("similarity undefined when both super-trees are the bare root")
            return 1.0
        self.computations += 1
        return soft_similarity(ta, tb)

    def __call__(self, labels_a: Iterable[CodeId], labels_b: Iterable[CodeId]) -> float:
        a, b = tuple(sorted(set(labels_a))), tuple(sorted(set(labels_b)))
        key = (a, b) if a <= b else (b, a)
        with self._lock:
            if key in self._cache:
                self.hits += 1
                self._cache.move_to_end(key)
                return self._cache[key]
            self.misses += 1
        value = self._compute(*key)
        with self._lock:
            value = self._cache.setdefault(key, value)
            self._cache.move_to_end(key)
            if self.maxsize is not None:
                while len(self._cache) > self.maxsize:
                    self._cache.popitem(last=False)
        return value

    def __len__(self) -> int:
        return len(self._cache)


def alpha_cache(h: Hierarchy, maxsize: int | None = None, mode: str = "tree") -> AlphaCache:
    return AlphaCache(h, maxsize=maxsize, mode=mode)
