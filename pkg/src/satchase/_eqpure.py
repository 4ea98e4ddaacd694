"""Pure-Python union-find over null ids, with per-class constant and
smallest-member tracking.

Mirror of the compiled kernel in ``_eqcore.pyx``; the two must stay
behaviourally identical (there is a differential test for this).
Callers guarantee that ``union`` is only invoked on constant-free classes
and ``bind_constant`` on a class without a constant, so no conflict
handling happens at this level.
"""

from __future__ import annotations


class EqClasses:
    __slots__ = ("_parent", "_size", "_min", "_const")

    def __init__(self):
        self._parent: dict[int, int] = {}
        self._size: dict[int, int] = {}
        self._min: dict[int, int] = {}
        self._const: dict[int, object] = {}

    def add(self, nid: int) -> None:
        if nid not in self._parent:
            self._parent[nid] = nid
            self._size[nid] = 1
            self._min[nid] = nid

    def __contains__(self, nid: int) -> bool:
        return nid in self._parent

    def find(self, nid: int) -> int:
        parent = self._parent
        root = nid
        while parent[root] != root:
            root = parent[root]
        while parent[nid] != root:  # path compression
            parent[nid], nid = root, parent[nid]
        return root

    def union(self, a: int, b: int) -> int:
        """Merge the classes of a and b; returns the losing root, -1 if no-op."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return -1
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size.pop(rb)
        mb = self._min.pop(rb)
        if mb < self._min[ra]:
            self._min[ra] = mb
        const = self._const.pop(rb, None)
        if const is not None:
            self._const[ra] = const
        return rb

    def bind_constant(self, nid: int, const: object) -> None:
        self._const[self.find(nid)] = const

    def constant_of(self, root: int):
        return self._const.get(root)

    def min_of(self, root: int) -> int:
        return self._min[root]
