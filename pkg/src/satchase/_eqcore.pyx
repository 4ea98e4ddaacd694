# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled union-find over null ids (hot kernel of fd enforcement).

Behavioural twin of ``_eqpure.EqClasses``: same API, same merge policy.
Roots returned by ``find``/``union`` are opaque handles; callers must not
assume they equal null ids.  Storage is flat C arrays indexed by a dense
internal slot per registered id.
"""

from libc.stdlib cimport free, malloc, realloc


cdef class EqClasses:
    cdef dict _slot        # external id -> dense slot
    cdef long* _parent     # slot -> parent slot
    cdef long* _size       # root slot -> class size
    cdef long* _min        # root slot -> smallest external id in class
    cdef long _n
    cdef long _cap
    cdef dict _const       # root slot -> constant

    def __cinit__(self):
        self._slot = {}
        self._const = {}
        self._n = 0
        self._cap = 64
        self._parent = <long*>malloc(self._cap * sizeof(long))
        self._size = <long*>malloc(self._cap * sizeof(long))
        self._min = <long*>malloc(self._cap * sizeof(long))
        if self._parent == NULL or self._size == NULL or self._min == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self._parent)
        free(self._size)
        free(self._min)

    cdef int _grow(self) except -1:
        cdef long cap = self._cap * 2
        cdef long* p = <long*>realloc(self._parent, cap * sizeof(long))
        cdef long* s = <long*>realloc(self._size, cap * sizeof(long))
        cdef long* m = <long*>realloc(self._min, cap * sizeof(long))
        if p == NULL or s == NULL or m == NULL:
            raise MemoryError()
        self._parent = p
        self._size = s
        self._min = m
        self._cap = cap
        return 0

    cpdef add(self, long nid):
        if nid in self._slot:
            return
        if self._n == self._cap:
            self._grow()
        cdef long slot = self._n
        self._slot[nid] = slot
        self._parent[slot] = slot
        self._size[slot] = 1
        self._min[slot] = nid
        self._n += 1

    def __contains__(self, nid):
        return nid in self._slot

    cpdef long find(self, long nid):
        cdef long slot = <long>self._slot[nid]
        cdef long root = slot
        cdef long nxt
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[slot] != root:
            nxt = self._parent[slot]
            self._parent[slot] = root
            slot = nxt
        return root

    cpdef long union(self, long a, long b):
        """Merge the classes rooted at a and b (as returned by find);
        returns the losing root, -1 if they already coincide."""
        cdef long ra = a
        cdef long rb = b
        while self._parent[ra] != ra:
            ra = self._parent[ra]
        while self._parent[rb] != rb:
            rb = self._parent[rb]
        if ra == rb:
            return -1
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        if self._min[rb] < self._min[ra]:
            self._min[ra] = self._min[rb]
        cdef object const = self._const.pop(rb, None)
        if const is not None:
            self._const[ra] = const
        return rb

    cpdef bind_constant(self, long root, object const):
        cdef long r = root
        while self._parent[r] != r:
            r = self._parent[r]
        self._const[r] = const

    cpdef object constant_of(self, long root):
        return self._const.get(root)

    cpdef long min_of(self, long root):
        return self._min[root]
