"""Exhaustive finite-level orbit computations used as ground truth.

Two acting groups are realized explicitly:

* :class:`FiniteLevelAction` -- invertible linear maps of F_p^J fixing a set
  of vectors and mapping each coordinate subspace of a given family onto
  itself.  All constraints except invertibility are linear, so the
  candidates form an affine space ``I + N``; it is streamed in numpy chunks
  and filtered by a determinant test.
* :class:`StageAction` -- automorphisms of a small finite abelian group
  ``X_{J_M}`` respecting the kernels of the stage projections and fixing a
  subgroup pointwise, found from per-generator image candidates.

Orbits are exact: a first chunk of group elements gives blocks that lie
inside orbits, then one full pass computes the exact orbit of each block
representative.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .abelian import CyclicProduct
from .criterion import (
    InverseSystemSpec,
    EqualUpToDepth,
    elementary_signature,
    orbit_eq_upto_depth,
)
from .flag import FinSupp, StructureSpec, layer
from .orbits import ParamSet, same_orbit

__all__ = [
    "CapExceeded",
    "FiniteLevelAction",
    "OrbitPartition",
    "enumerate_stabilizer",
    "brute_orbits",
    "StageAction",
    "ComparisonReport",
    "flag_action",
    "saturation",
    "compare_with_orbit_test",
    "compare_with_vanishing_criterion",
    "compare_with_divisibility_criterion",
    "nullspace_mod_p",
]

DEFAULT_CAP = 50_000_000
CHUNK = 1 << 19


class CapExceeded(RuntimeError):
    pass


def nullspace_mod_p(rows: Sequence[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of ``{x in F_p^ncols : R x = 0}``."""
    R = [[v % p for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(R)) if R[k][c]), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = pow(R[r][c], -1, p)
        R[r] = [v * inv % p for v in R[r]]
        for k in range(len(R)):
            if k != r and R[k][c]:
                f = R[k][c]
                R[k] = [(a - f * b) % p for a, b in zip(R[k], R[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        x = [0] * ncols
        x[free] = 1
        for k, c in enumerate(pivots):
            x[c] = -R[k][free] % p
        basis.append(x)
    return basis


def _det_nonzero(C: np.ndarray, r: int, p: int) -> np.ndarray:
    """Which of the matrices stored column-wise in ``C`` (shape (r*r, N),
    row-major entries) are invertible mod p.  Laplace expansion along rows,
    memoizing minors by column subset."""
    minors = {(): None}
    for k in range(r):
        new = {}
        for S in itertools.combinations(range(r), k + 1):
            acc = None
            for pos, j in enumerate(S):
                prev = minors[S[:pos] + S[pos + 1:]]
                term = C[k * r + j] if prev is None else C[k * r + j] * prev
                if acc is None:
                    acc = term.copy() if pos % 2 == 0 else -term
                elif pos % 2:
                    acc -= term
                else:
                    acc += term
            new[S] = acc % p
        minors = new
    if r == 0:
        return np.ones(C.shape[1], dtype=bool)
    return minors[tuple(range(r))] != 0


# -- linear actions on F_p^J --------------------------------------------------

@dataclass
class FiniteLevelAction:
    """Invertible maps of F_p^J fixing ``fixed`` pointwise and each subspace
    ``{x : x_c = 0 for c not in S}`` (S in ``flags``) setwise.

    ``J`` names the coordinates (for reports); vectors are tuples indexed
    by position in ``J``.
    """

    p: int
    J: tuple[int, ...]
    fixed: tuple[tuple[int, ...], ...] = ()
    flags: tuple[frozenset[int], ...] = ()

    def __post_init__(self):
        self.J = tuple(self.J)
        r = len(self.J)
        self.fixed = tuple(tuple(int(v) % self.p for v in a) for a in self.fixed)
        for a in self.fixed:
            if len(a) != r:
                raise ValueError(f"fixed vector {a} does not have {r} coordinates")
        self.flags = tuple(sorted({frozenset(S) for S in self.flags}, key=lambda S: (len(S), sorted(S))))
        for S in self.flags:
            if not S <= set(range(r)):
                raise ValueError(f"flag support {sorted(S)} is not a set of positions")

    @property
    def dim(self) -> int:
        return len(self.J)

    def _free_entries(self) -> list[int]:
        r = self.dim
        # g[d][c] must vanish when column c lies in a support S and row d does not
        return [d * r + c for d in range(r) for c in range(r)
                if not any(c in S and d not in S for S in self.flags)]

    def directions(self) -> np.ndarray:
        """Basis of N: matrices D (flattened row-major) with the zero pattern
        and ``D a = 0`` for every fixed a."""
        r, p = self.dim, self.p
        free = self._free_entries()
        rows = []
        for a in self.fixed:
            for d in range(r):
                rows.append([a[e % r] if e // r == d else 0 for e in free])
        basis = nullspace_mod_p(rows, len(free), p)
        out = np.zeros((len(basis), r * r), dtype=np.int64)
        for k, x in enumerate(basis):
            out[k, free] = x
        return out

    def candidate_count(self) -> int:
        return self.p ** len(self.directions())

    def chunks(self, cap: int = DEFAULT_CAP, chunk: int = CHUNK) -> Iterator[np.ndarray]:
        """Group elements in chunks of shape (r*r, n), row-major entries."""
        p, r = self.p, self.dim
        B = self.directions()
        total = p ** len(B)
        if total > cap:
            raise CapExceeded(f"{total} candidate matrices exceed the cap of {cap}")
        low = 0
        while low < len(B) and p ** (low + 1) <= chunk:
            low += 1
        digits = np.arange(p ** low, dtype=np.int32) // (p ** np.arange(low - 1, -1, -1, dtype=np.int32))[:, None] % p
        # float matmul is exact at these sizes and far faster than integer matmul
        low_part = B[:low].reshape(low, r * r).T.astype(np.float32) @ digits.astype(np.float32)
        dtype = np.int16 if p * p * r < 1 << 14 else np.int64
        low_part = (low_part % p).astype(dtype)
        eye = np.eye(r, dtype=np.int64).reshape(-1)
        for high in itertools.product(range(p), repeat=len(B) - low):
            shift = eye + (np.array(high, dtype=np.int64) @ B[low:] if high else 0)
            C = low_part + shift.astype(dtype)[:, None]
            C %= p
            yield C[:, _det_nonzero(C, r, p)]

    def encode(self, vectors: np.ndarray) -> np.ndarray:
        """Index of each vector (rows) as ``sum x_c p^c``."""
        return vectors @ (self.p ** np.arange(self.dim))

    def decode(self, index: int) -> tuple[int, ...]:
        return tuple((index // self.p ** c) % self.p for c in range(self.dim))

    def vectors(self) -> np.ndarray:
        return np.array([self.decode(i) for i in range(self.p ** self.dim)], dtype=np.int64).reshape(-1, self.dim)

    def images(self, C: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """Indices of g x, shape (len(xs), n), for each vector x (rows of
        ``xs``) and each g in the chunk."""
        r = self.dim
        img = np.einsum("dcn,kc->kdn", C.reshape(r, r, -1).astype(np.int64), xs) % self.p
        return np.einsum("kdn,d->kn", img, self.p ** np.arange(r))


def enumerate_stabilizer(action: FiniteLevelAction, cap: int = 1 << 20,
                         candidate_cap: int = DEFAULT_CAP) -> np.ndarray:
    """All group elements as an array (n, r, r), in enumeration order.

    The result is checked to be a group: it contains the identity and is
    closed under products (on all pairs when small, else a seeded sample).
    """
    r, p = action.dim, action.p
    parts = [C.T for C in action.chunks(candidate_cap)]
    G = np.concatenate(parts) if parts else np.zeros((0, r * r), dtype=np.int32)
    if len(G) > cap:
        raise CapExceeded(f"group of order {len(G)} exceeds the cap of {cap}")
    mats = G.reshape(-1, r, r).astype(np.int64)
    _assert_group(mats, p)
    return mats


def _assert_group(mats: np.ndarray, p: int, samples: int = 400):
    n, r, _ = mats.shape
    weights = p ** np.arange(r * r, dtype=np.int64)
    keys = np.sort(mats.reshape(n, -1) @ weights)
    eye = np.eye(r, dtype=np.int64).reshape(-1) @ weights
    if not np.isin(eye, keys):
        raise AssertionError("enumerated set misses the identity")
    if n * n <= 4 * samples * samples:
        pairs = np.array(list(itertools.product(range(n), repeat=2)))
    else:
        pairs = np.random.default_rng(0).integers(0, n, (samples, 2))
    prods = np.einsum("nij,njk->nik", mats[pairs[:, 0]], mats[pairs[:, 1]]) % p
    if not np.isin(prods.reshape(len(pairs), -1) @ weights, keys).all():
        raise AssertionError("enumerated set is not closed under composition")


@dataclass
class OrbitPartition:
    blocks: list[tuple[int, ...]]
    group_order: int
    block_of: np.ndarray
    decode: object = field(repr=False, default=None)

    def same(self, x: int, y: int) -> bool:
        return self.block_of[x] == self.block_of[y]

    def vector_blocks(self) -> list[list[tuple[int, ...]]]:
        return [[self.decode(i) for i in b] for b in self.blocks]


def brute_orbits(action: FiniteLevelAction, cap: int = DEFAULT_CAP, probe: int = 256) -> OrbitPartition:
    """Exact orbit partition of F_p^J under the action's group."""
    p, r = action.p, action.dim
    nvec = p ** r
    V = action.vectors()
    parent = list(range(nvec))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    first = next(action.chunks(cap))
    picks = np.linspace(0, first.shape[1] - 1, min(probe, first.shape[1])).astype(int)
    for row in action.images(first[:, picks], V).T.tolist():
        for x, y in enumerate(row):
            fx, fy = find(x), find(y)
            if fx != fy:
                parent[max(fx, fy)] = min(fx, fy)
    reps = sorted({find(x) for x in range(nvec)})
    R = V[reps]
    reach = np.zeros((len(reps), nvec), dtype=bool)
    offsets = (np.arange(len(reps)) * nvec)[:, None]
    order = 0
    for C in action.chunks(cap):
        order += C.shape[1]
        reach.ravel()[(action.images(C, R) + offsets).ravel()] = True
    blocks = sorted({tuple(np.flatnonzero(row).tolist()) for row in reach})
    block_of = np.full(nvec, -1)
    for b, members in enumerate(blocks):
        if (block_of[list(members)] != -1).any():
            raise AssertionError("computed orbits overlap")
        block_of[list(members)] = b
        if order % len(members):
            raise AssertionError(f"orbit of size {len(members)} does not divide the group order {order}")
    if (block_of == -1).any():
        raise AssertionError("computed orbits do not cover the space")
    return OrbitPartition(blocks, order, block_of, action.decode)


# -- automorphisms of small abelian groups respecting stages ---------------------

class StageAction:
    """Automorphisms of ``X_{J_M}`` mapping each ``{x : x|J_m = 0}`` (m <= M)
    into itself and fixing the projection of A pointwise.

    Every candidate is a homomorphism given by generator images of matching
    order; bijectivity is checked on all elements.
    """

    def __init__(self, system: InverseSystemSpec, A: Iterable[Sequence[int]] = (), M: int | None = None,
                 cap: int = 2_000_000):
        self.system = system
        self.M = system.depth if M is None else M
        self.positions = system.stage_positions(self.M)
        u = system.universe
        self.group = CyclicProduct(tuple(u.orders[q] for q in self.positions))
        self.A = sorted({tuple(a[q] for q in self.positions) for a in A} | {self.group.zero})
        self.maps = self._enumerate(cap)

    def project(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(x[q] for q in self.positions)

    def _enumerate(self, cap: int) -> np.ndarray:
        X = self.group
        r = len(X)
        if r == 0:
            return np.zeros((1, 0, 0), dtype=np.int64)
        orders = np.array(X.orders, dtype=np.int64)
        elements = np.array(X.elements(), dtype=np.int64)
        local = {q: k for k, q in enumerate(self.positions)}
        kernels = []
        for m in range(self.M + 1):
            inside = [local[q] for q in self.system.stage_positions(m)]
            kernels.append(inside)
        columns = []
        for c in range(r):
            ok = (elements * X.orders[c]) % orders == 0
            ok = ok.all(axis=1)
            for inside in kernels:
                if c not in inside and inside:
                    ok &= (elements[:, inside] == 0).all(axis=1)
            columns.append(elements[ok])
        total = int(np.prod([len(c) for c in columns], dtype=object))
        if total > cap:
            raise CapExceeded(f"{total} candidate homomorphisms exceed the cap of {cap}")
        idx = np.array(list(itertools.product(*(range(len(c)) for c in columns))), dtype=np.int64)
        # G[n, :, c] is the image of the c-th generator
        G = np.stack([columns[c][idx[:, c]] for c in range(r)], axis=2)
        A = np.array(self.A, dtype=np.int64)
        fixes = ((np.einsum("nqc,ac->naq", G, A) % orders) == A[None]).all(axis=(1, 2))
        G = G[fixes]
        keep = []
        nonzero = elements[1:]
        for s in range(0, len(G), 4096):
            blk = G[s:s + 4096]
            img = np.einsum("nqc,ec->neq", blk, nonzero) % orders
            keep.append((img != 0).any(axis=2).all(axis=1))
        G = G[np.concatenate(keep)] if keep else G
        return G

    @property
    def order(self) -> int:
        return len(self.maps)

    def apply(self, x: Sequence[int]) -> np.ndarray:
        """Images of the projected x under every map, shape (order, r)."""
        orders = np.array(self.group.orders, dtype=np.int64)
        return np.einsum("nqc,c->nq", self.maps, np.array(self.project(x), dtype=np.int64)) % orders

    def same_orbit(self, eta: Sequence[Sequence[int]], tau: Sequence[Sequence[int]]) -> bool:
        hit = np.ones(self.order, dtype=bool)
        for x, y in zip(eta, tau):
            hit &= (self.apply(x) == np.array(self.project(y))).all(axis=1)
        return bool(hit.any())


# -- comparisons ------------------------------------------------------------------

@dataclass
class ComparisonReport:
    agreements: int = 0
    disagreements: list = field(default_factory=list)
    saturated: bool = True
    group_order: int | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_json(self) -> dict:
        return {
            "agreements": self.agreements,
            "disagreements": self.disagreements,
            "saturated": self.saturated,
            "group_order": self.group_order,
        }


def _vector(p: int, J: Sequence[int], x: FinSupp) -> tuple[int, ...]:
    pos = {n: k for k, n in enumerate(J)}
    out = [0] * len(J)
    for n, v in x.support.items():
        if n not in pos:
            raise ValueError(f"element {x} is not supported within J")
        out[pos[n]] = v % p
    return tuple(out)


def _element(p: int, J: Sequence[int], v: Sequence[int]) -> FinSupp:
    return FinSupp(p, {n: c for n, c in zip(J, v) if c})


def flag_action(spec: StructureSpec, A: ParamSet, J: Sequence[int]) -> FiniteLevelAction:
    """Flag-preserving, A-fixing maps of F_p^J: the flag subspaces are the
    traces on J of H_i, supported on ``{c in J : layer(c) < i}``."""
    J = tuple(J)
    layers = [layer(spec, n) for n in J]
    flags = set()
    for cut in set(layers):
        S = frozenset(k for k, b in enumerate(layers) if b < cut)
        if 0 < len(S) < len(J):
            flags.add(S)
    fixed = [_vector(spec.p, J, a) for a in A.generators]
    return FiniteLevelAction(spec.p, J, tuple(fixed), tuple(flags))


def saturation(spec: StructureSpec, A: ParamSet, J: Sequence[int], margin: int = 2) -> tuple[bool, list[str]]:
    """Heuristic faithfulness check for the truncation J.

    Every layer occurring in J needs ``margin`` coordinates of that layer in
    J outside the support of A, so that the finite group has room to move
    elements of that layer independently of the parameters.
    """
    spare = {}
    used = A.coords
    for n in J:
        b = layer(spec, n)
        spare.setdefault(b, 0)
        if n not in used:
            spare[b] += 1
    short = [f"layer {b}: {k} spare coordinate(s), need {margin}" for b, k in sorted(spare.items()) if k < margin]
    return not short, short


@functools.lru_cache(maxsize=256)
def _flag_orbits(p, r, fixed, flags, cap):
    # the partition depends on the constraint pattern only, not on which coordinates J names
    return brute_orbits(FiniteLevelAction(p, tuple(range(r)), fixed, flags), cap)


def compare_with_orbit_test(spec: StructureSpec, A, J: Sequence[int], same=None, cap: int = DEFAULT_CAP,
                       margin: int = 2) -> ComparisonReport:
    """Compare exact orbits at level J with the symbolic orbit test on all
    pairs of elements supported within J.

    ``same`` defaults to :func:`nmorbits.orbits.same_orbit` and is a
    parameter so callers can check the comparison itself catches faults.
    Each disagreement records which side merges the pair.
    """
    same = same_orbit if same is None else same
    A = A if isinstance(A, ParamSet) else ParamSet(spec.p, A)
    J = tuple(J)
    if not A.coords <= set(J):
        raise ValueError("A is not supported within J")
    action = flag_action(spec, A, J)
    part = _flag_orbits(action.p, len(J), action.fixed, action.flags, cap)
    sat, notes = saturation(spec, A, J, margin)
    report = ComparisonReport(saturated=sat, group_order=part.group_order, notes=notes)
    elems = [_element(spec.p, J, action.decode(i)) for i in range(spec.p ** len(J))]
    for x, y in itertools.combinations(range(len(elems)), 2):
        brute = part.same(x, y)
        symbolic = same(spec, elems[x], elems[y], A)
        if brute == symbolic:
            report.agreements += 1
        else:
            report.disagreements.append({
                "eta": elems[x].to_json(),
                "tau": elems[y].to_json(),
                "brute_force_same": bool(brute),
                "symbolic_same": bool(symbolic),
            })
    return report


def compare_with_vanishing_criterion(p: int, stages: Sequence[Sequence[int]], A: Sequence[Sequence[int]],
                           cap: int = DEFAULT_CAP) -> ComparisonReport:
    """All pairs of F_p^J (J the last stage, positions 0..|J|-1) under the
    stage-respecting A-fixing linear maps versus the elementary criterion."""
    J = sorted(set(stages[-1]))
    if J != list(range(len(J))):
        raise ValueError("the last stage must be 0..r-1")
    r = len(J)
    system = InverseSystemSpec.from_json([p] * r, [list(s) for s in stages])
    kernels = [frozenset(range(r)) - frozenset(s) for s in stages]
    action = FiniteLevelAction(p, tuple(J), tuple(tuple(a) for a in A),
                               tuple(S for S in kernels if 0 < len(S) < r))
    part = brute_orbits(action, cap)
    closed = _closure(p, r, A)
    sigs = [elementary_signature(system, [action.decode(i)], closed) for i in range(p ** r)]
    report = ComparisonReport(group_order=part.group_order)
    for x, y in itertools.combinations(range(p ** r), 2):
        if part.same(x, y) == (sigs[x] == sigs[y]):
            report.agreements += 1
        else:
            report.disagreements.append({"eta": list(action.decode(x)), "tau": list(action.decode(y)),
                                         "brute_force_same": bool(part.same(x, y))})
    return report


def _closure(p: int, r: int, gens) -> list[tuple[int, ...]]:
    return list(CyclicProduct((p,) * r).span([tuple(g) for g in gens])) if r else [()]


def compare_with_divisibility_criterion(system: InverseSystemSpec, instances, M: int | None = None,
                        cap: int = 2_000_000) -> ComparisonReport:
    """Brute-force tuple orbits versus :func:`orbit_eq_upto_depth`.

    ``instances`` yields ``(eta, tau, A)`` triples over the universe of the
    system; groups are cached per parameter subgroup.
    """
    M = system.depth if M is None else M
    report = ComparisonReport()
    groups = {}
    orders = set()
    for eta, tau, A in instances:
        key = tuple(sorted(map(tuple, A)))
        if key not in groups:
            groups[key] = StageAction(system, A, M, cap)
        act = groups[key]
        orders.add(act.order)
        brute = act.same_orbit(eta, tau)
        verdict = orbit_eq_upto_depth(system, eta, tau, A, M)
        if brute == isinstance(verdict, EqualUpToDepth):
            report.agreements += 1
        else:
            report.disagreements.append({"eta": [list(x) for x in eta], "tau": [list(x) for x in tau],
                                         "A": [list(a) for a in A], "brute_force_same": bool(brute),
                                         "criterion": verdict.to_json()})
    report.group_order = max(orders) if orders else None
    return report
