"""Concrete amalgamation classes over finite structures.

Seven built-in classes, each with a membership test, an amalgamation
strategy and a strong-amalgamation flag, plus exhaustive desk-scale
verifiers for the hereditary, joint-embedding and (strong) amalgamation
properties.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from genstruct.structures import (
    Embedding,
    FinStructure,
    GRAPH_SIG,
    ORDER_SIG,
    Signature,
    SignatureMismatch,
    StructureError,
    canonical_key,
    empty_structure,
    enumerate_embeddings,
    fresh_ids,
    induced_substructure,
    make_embedding,
    validate_structure,
)

TAGS = (
    "Graph",
    "Digraph",
    "Tournament",
    "LinearOrder",
    "PartialOrder",
    "RationalMetric",
    "LinearGraph",
)

# Strong amalgamation holds for every built-in class except LinearGraph,
# where gluing two length-2 arms at a shared vertex forces degree 4.
SAP_FLAGS = {tag: tag != "LinearGraph" for tag in TAGS}

# Distances used when enumerating rational metric spaces; the class has
# countably many isomorphism types per size, so enumeration needs a finite
# palette.  1+1 < 3 makes the triangle inequality actually prune.
METRIC_PALETTE = (Fraction(1), Fraction(2), Fraction(3))


class NotInClass(StructureError):
    pass


class AmalgamationImpossible(StructureError):
    pass


class ScaleExceeded(StructureError):
    pass


def metric_symbol(q: Fraction) -> str:
    q = Fraction(q)
    return f"d_{q.numerator}" if q.denominator == 1 else f"d_{q.numerator}/{q.denominator}"


def parse_metric_symbol(name: str) -> Fraction:
    if not name.startswith("d_"):
        raise SignatureMismatch(f"not a distance symbol: {name}")
    return Fraction(name[2:])


def metric_structure(universe: set[int], dist: dict[frozenset[int], Fraction]) -> FinStructure:
    """Build a rational metric space from an unordered-pair distance map."""
    values = sorted(set(dist.values()))
    sig = Signature(tuple((metric_symbol(q), 2) for q in values))
    interp: dict[str, set[tuple[int, ...]]] = {metric_symbol(q): set() for q in values}
    for pair, q in dist.items():
        a, b = sorted(pair)
        interp[metric_symbol(q)].update({(a, b), (b, a)})
    return validate_structure(sig, universe, interp)


def metric_distances(a: FinStructure) -> dict[frozenset[int], Fraction]:
    dist: dict[frozenset[int], Fraction] = {}
    for name, tuples in a.interp:
        q = parse_metric_symbol(name)
        for t in tuples:
            dist[frozenset(t)] = q
    return dist


def class_signature(tag: str) -> Signature | None:
    """Fixed signature of the tag, or None for the per-structure metric one."""
    if tag in ("Graph", "Digraph", "Tournament", "LinearGraph"):
        return GRAPH_SIG
    if tag in ("LinearOrder", "PartialOrder"):
        return ORDER_SIG
    if tag == "RationalMetric":
        return None
    raise StructureError(f"unknown class tag {tag!r}")


def _check_tag_signature(tag: str, a: FinStructure) -> None:
    want = class_signature(tag)
    if want is not None:
        if a.sig != want:
            raise SignatureMismatch(f"{tag} expects signature {want.symbols}, got {a.sig.symbols}")
        return
    for name, arity in a.sig.symbols:
        q = parse_metric_symbol(name)
        if arity != 2 or q <= 0:
            raise SignatureMismatch(f"bad distance symbol {name}")


def _edges(a: FinStructure) -> set[frozenset[int]]:
    return {frozenset(t) for t in a.rel("E")}


def _degrees(a: FinStructure) -> dict[int, int]:
    deg = {x: 0 for x in a.universe}
    for e in _edges(a):
        for x in e:
            deg[x] += 1
    return deg


def _is_symmetric_irreflexive(a: FinStructure) -> bool:
    rel = a.rel("E")
    return all(t[0] != t[1] and (t[1], t[0]) in rel for t in rel)


def _is_acyclic(a: FinStructure) -> bool:
    # Union-find over undirected edges; a repeated root means a cycle.
    parent = {x: x for x in a.universe}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in _edges(a):
        x, y = tuple(e)
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        parent[rx] = ry
    return True


def _is_connected_graph(a: FinStructure) -> bool:
    if len(a) <= 1:
        return True
    adj = {x: set() for x in a.universe}
    for e in _edges(a):
        x, y = tuple(e)
        adj[x].add(y)
        adj[y].add(x)
    start = min(a.universe)
    seen = {start}
    stack = [start]
    while stack:
        for y in adj[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(a)


def membership(tag: str, a: FinStructure) -> bool:
    """Does `a` satisfy the axioms of the tagged class?

    LinearGraph uses the hereditary closure of the path graphs: disjoint
    unions of simple paths (acyclic, every degree at most 2).
    """
    _check_tag_signature(tag, a)
    if tag == "Graph":
        return _is_symmetric_irreflexive(a)
    if tag == "Digraph":
        return all(t[0] != t[1] for t in a.rel("E"))
    if tag == "Tournament":
        rel = a.rel("E")
        if any(t[0] == t[1] for t in rel):
            return False
        return all(
            ((x, y) in rel) != ((y, x) in rel)
            for x, y in combinations(sorted(a.universe), 2)
        )
    if tag == "LinearOrder":
        rel = a.rel("<")
        if any(t[0] == t[1] for t in rel):
            return False
        for x, y in combinations(sorted(a.universe), 2):
            if ((x, y) in rel) == ((y, x) in rel):
                return False
        return _is_transitive(rel)
    if tag == "PartialOrder":
        rel = a.rel("<")
        if any(t[0] == t[1] for t in rel):
            return False
        if any((y, x) in rel for x, y in rel):
            return False
        return _is_transitive(rel)
    if tag == "RationalMetric":
        dist = metric_distances(a)
        for name, tuples in a.interp:
            for t in tuples:
                if t[0] == t[1] or (t[1], t[0]) not in tuples:
                    return False
        for x, y in combinations(sorted(a.universe), 2):
            if frozenset((x, y)) not in dist:
                return False
        for x, y, z in product(sorted(a.universe), repeat=3):
            if len({x, y, z}) == 3:
                if dist[frozenset((x, z))] > dist[frozenset((x, y))] + dist[frozenset((y, z))]:
                    return False
        return True
    if tag == "LinearGraph":
        if not _is_symmetric_irreflexive(a):
            return False
        return max(_degrees(a).values(), default=0) <= 2 and _is_acyclic(a)
    raise StructureError(f"unknown class tag {tag!r}")


def _is_transitive(rel: frozenset[tuple[int, ...]]) -> bool:
    index: dict[int, set[int]] = {}
    for x, y in rel:
        index.setdefault(x, set()).add(y)
    return all((x, z) in rel for x, y in rel for z in index.get(y, ()))


def chain_of(a: FinStructure) -> list[int]:
    """Universe of a linear order, sorted by its `<` relation."""
    rel = a.rel("<")
    return sorted(a.universe, key=lambda x: sum(1 for t in rel if t[1] == x))


def chain_structure(seq: list[int]) -> FinStructure:
    rel = {(seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))}
    return validate_structure(ORDER_SIG, set(seq), {"<": rel})


def merge_linear_orders(seq1: list[int], seq2: list[int], shared: set[int]) -> list[int]:
    """Merge two chains agreeing on `shared` into one chain.

    Cross pairs separated by a shared element follow the separator rule:
    x from side 1 precedes y from side 2 exactly when some shared r has
    x < r in side 1 and r < y in side 2.  Unseparated cross pairs put the
    side-2 element first.
    """
    r1 = [x for x in seq1 if x in shared]
    r2 = [x for x in seq2 if x in shared]
    if r1 != r2:
        raise StructureError("orders disagree on the shared part")
    if (set(seq1) & set(seq2)) - set(shared):
        raise StructureError("sides overlap outside the shared part")
    gaps1: dict[int, list[int]] = {}
    gaps2: dict[int, list[int]] = {}
    for seq, gaps in ((seq1, gaps1), (seq2, gaps2)):
        g = 0
        for x in seq:
            if x in shared:
                g += 1
            else:
                gaps.setdefault(g, []).append(x)
    merged: list[int] = []
    for g in range(len(r1) + 1):
        merged.extend(gaps2.get(g, []))
        merged.extend(gaps1.get(g, []))
        if g < len(r1):
            merged.append(r1[g])
    return merged


@dataclass(frozen=True)
class Amalgam:
    result: FinStructure
    emb_left: Embedding
    emb_right: Embedding


def _setup_amalgam(f: Embedding, g: Embedding) -> tuple[FinStructure, FinStructure, dict[int, int], list[int]]:
    """Common bookkeeping: left keeps its ids, right is renamed.

    Returns (b, c, map_c, base_ids) where map_c sends the right-hand
    universe into the result id space and base points land on f's image.
    """
    if f.source != g.source:
        raise StructureError("amalgamation requires a common base")
    b, c = f.target, g.target
    fm, gm = f.as_dict(), g.as_dict()
    map_c: dict[int, int] = {gm[a]: fm[a] for a in fm}
    new_points = [x for x in c.sorted_universe() if x not in map_c]
    names = fresh_ids(b.universe, len(new_points))
    for x, y in zip(new_points, names):
        map_c[x] = y
    base_ids = sorted(fm.values())
    return b, c, map_c, base_ids


def _mapped_rel(c: FinStructure, name: str, map_c: dict[int, int]) -> set[tuple[int, ...]]:
    return {tuple(map_c[x] for x in t) for t in c.rel(name)}


def amalgamate(tag: str, f: Embedding, g: Embedding) -> Amalgam:
    """Amalgamate f: A -> B and g: A -> C over the common base A.

    The result keeps B's ids; C's non-base points get the smallest fresh
    naturals.  Strategies are strong (no identification beyond the base)
    for every tag except LinearGraph, whose search may identify points or
    fail with AmalgamationImpossible.
    """
    for side in (f.target, g.target, f.source):
        if not membership(tag, side):
            raise NotInClass(f"input not in class {tag}")
    if tag == "LinearGraph":
        return _amalgamate_linear_graph(f, g, connected=False)
    if tag == "RationalMetric":
        return _amalgamate_metric(f, g)
    b, c, map_c, base_ids = _setup_amalgam(f, g)
    universe = set(b.universe) | set(map_c.values())

    if tag in ("Graph", "Digraph"):
        rel = set(b.rel("E")) | _mapped_rel(c, "E", map_c)
        result = validate_structure(GRAPH_SIG, universe, {"E": rel})
    elif tag == "Tournament":
        rel = set(b.rel("E")) | _mapped_rel(c, "E", map_c)
        left_only = sorted(set(b.universe) - set(base_ids))
        right_only = sorted(set(map_c.values()) - set(base_ids))
        rel.update((x, y) for x in left_only for y in right_only)
        result = validate_structure(GRAPH_SIG, universe, {"E": rel})
    elif tag == "LinearOrder":
        seq_b = chain_of(b)
        seq_c = [map_c[x] for x in chain_of(c)]
        merged = merge_linear_orders(seq_b, seq_c, set(base_ids))
        result = chain_structure(merged)
    elif tag == "PartialOrder":
        rel = set(b.rel("<")) | _mapped_rel(c, "<", map_c)
        closed = _transitive_closure(rel)
        if any((y, x) in closed for x, y in closed) or any(x == y for x, y in closed):
            raise AmalgamationImpossible("transitive closure breaks antisymmetry")
        result = validate_structure(ORDER_SIG, universe, {"<": closed})
    else:
        raise StructureError(f"unknown class tag {tag!r}")

    if not membership(tag, result):
        raise AmalgamationImpossible(f"strategy output left the class {tag}")
    emb_left = make_embedding(b, result, {x: x for x in b.universe})
    emb_right = make_embedding(c, result, map_c)
    return Amalgam(result, emb_left, emb_right)


def _transitive_closure(rel: set[tuple[int, ...]]) -> set[tuple[int, int]]:
    closed = set(rel)
    changed = True
    while changed:
        changed = False
        extra = {(x, w) for x, y in closed for z, w in closed if y == z and (x, w) not in closed}
        if extra:
            closed |= extra
            changed = True
    return closed


def _amalgamate_metric(f: Embedding, g: Embedding) -> Amalgam:
    """Shortest-path gluing over the base; exact rational arithmetic.

    Unset cross distances become the minimum over base points of the
    two-leg sums; with an empty base both sides sit at a constant cross
    distance no smaller than either diameter.
    """
    b, c, map_c, base_ids = _setup_amalgam(f, g)
    dist_b = metric_distances(b)
    dist_c = {frozenset(map_c[x] for x in pair): q for pair, q in metric_distances(c).items()}
    dist = dict(dist_b)
    dist.update(dist_c)
    left_only = sorted(set(b.universe) - set(base_ids))
    right_only = sorted(set(map_c.values()) - set(base_ids) - set(b.universe))
    if base_ids:
        for x in left_only:
            for y in right_only:
                dist[frozenset((x, y))] = min(
                    dist_b[frozenset((x, r))] + dist_c[frozenset((r, y))] for r in base_ids
                )
    else:
        diam = max(list(dist_b.values()) + list(dist_c.values()) + [Fraction(1)])
        for x in left_only:
            for y in right_only:
                dist[frozenset((x, y))] = diam
    universe = set(b.universe) | set(map_c.values())
    result = metric_structure(universe, dist)
    # One shared signature so the witness maps are honest embeddings.
    sig = _metric_common_signature(b, c, result)
    result = _align_signature(result, sig)
    if not membership("RationalMetric", result):
        raise AmalgamationImpossible("metric gluing left the class")
    emb_left = make_embedding(_align_signature(b, sig), result, {x: x for x in b.universe})
    emb_right = make_embedding(_align_signature(c, sig), result, map_c)
    return Amalgam(result, emb_left, emb_right)


# --- linear graphs ----------------------------------------------------------


def _path_sequence(a: FinStructure, component: set[int]) -> list[int]:
    """Walk one path component from its smallest endpoint."""
    adj = {x: set() for x in component}
    for e in _edges(a):
        x, y = tuple(e)
        if x in component:
            adj[x].add(y)
            adj[y].add(x)
    ends = sorted(x for x in component if len(adj[x]) <= 1)
    seq = [ends[0]]
    seen = {ends[0]}
    while len(seq) < len(component):
        nxt = sorted(adj[seq[-1]] - seen)[0]
        seq.append(nxt)
        seen.add(nxt)
    return seq


def _components(a: FinStructure) -> list[set[int]]:
    adj = {x: set() for x in a.universe}
    for e in _edges(a):
        x, y = tuple(e)
        adj[x].add(y)
        adj[y].add(x)
    out = []
    left = set(a.universe)
    while left:
        start = min(left)
        comp = {start}
        stack = [start]
        while stack:
            for y in adj[stack.pop()]:
                if y not in comp:
                    comp.add(y)
                    stack.append(y)
        out.append(comp)
        left -= comp
    return sorted(out, key=min)


def strong_linear_graph_obstruction(f: Embedding, g: Embedding) -> str | None:
    """Why no strong amalgam of linear graphs exists, or None if one does.

    Bridging through fresh points can always connect a valid union, so
    the only obstructions are an overloaded vertex or a forced cycle in
    the union over the base.
    """
    b, c, map_c, base_ids = _setup_amalgam(f, g)
    rel = set(b.rel("E")) | _mapped_rel(c, "E", map_c)
    union = validate_structure(GRAPH_SIG, set(b.universe) | set(map_c.values()), {"E": rel})
    deg = _degrees(union)
    overloaded = sorted(x for x, d in deg.items() if d > 2)
    if overloaded:
        return f"vertex {overloaded[0]} gets degree {deg[overloaded[0]]} in any strong amalgam"
    if not _is_acyclic(union):
        return "the union over the base contains a cycle"
    return None


def _bridge_components(structure: FinStructure) -> FinStructure:
    """Chain the path components into one path with fresh bridge points."""
    comps = _components(structure)
    if len(comps) <= 1:
        return structure
    rel = set(structure.rel("E"))
    universe = set(structure.universe)
    deg = _degrees(structure)
    bridges = fresh_ids(universe, len(comps) - 1)
    ends = []
    for comp in comps:
        ends.append(sorted(x for x in comp if deg.get(x, 0) <= 1))
    for i, z in enumerate(bridges):
        left_end = [x for x in ends[i] if deg[x] <= 1][-1]
        right_end = [x for x in ends[i + 1] if deg[x] <= 1][0]
        rel.update({(left_end, z), (z, left_end), (z, right_end), (right_end, z)})
        deg[left_end] += 1
        deg[right_end] += 1
        deg[z] = 2
        universe.add(z)
    return validate_structure(GRAPH_SIG, universe, {"E": rel})


def _partial_injections(xs: list[int], ys: list[int]):
    """All partial injective maps xs -> ys, smallest first, lexicographic."""
    for k in range(min(len(xs), len(ys)) + 1):
        for dom in combinations(xs, k):
            for img in _injective_images(list(ys), k):
                yield dict(zip(dom, img))


def _injective_images(ys: list[int], k: int):
    if k == 0:
        yield ()
        return
    for i, y in enumerate(ys):
        for rest in _injective_images(ys[:i] + ys[i + 1 :], k - 1):
            yield (y,) + rest


def _amalgamate_linear_graph(f: Embedding, g: Embedding, connected: bool) -> Amalgam:
    """Search amalgams of linear graphs, identifications allowed.

    Tries the strong union first, then partial identifications of the two
    new sides, smallest first.  With `connected` the result is bridged
    into a single path (inputs must then be connected themselves).
    """
    b, c = f.target, g.target
    fm, gm = f.as_dict(), g.as_dict()
    base_map = {gm[a]: fm[a] for a in fm}
    left_new = [x for x in b.sorted_universe() if x not in set(fm.values())]
    right_new = [x for x in c.sorted_universe() if x not in base_map]

    for ident in _partial_injections(right_new, left_new):
        map_c = dict(base_map)
        map_c.update(ident)
        unmatched = [x for x in right_new if x not in ident]
        names = fresh_ids(set(b.universe), len(unmatched))
        for x, y in zip(unmatched, names):
            map_c[x] = y
        if len(set(map_c.values())) != len(map_c):
            continue
        rel = set(b.rel("E")) | _mapped_rel(c, "E", map_c)
        universe = set(b.universe) | set(map_c.values())
        candidate = validate_structure(GRAPH_SIG, universe, {"E": rel})
        if not membership("LinearGraph", candidate):
            continue
        # Identification must not create adjacencies inside either image.
        image_c = frozenset(map_c.values())
        if induced_substructure(candidate, b.universe) != b:
            continue
        mapped_c_rel = frozenset(_mapped_rel(c, "E", map_c))
        if induced_substructure(candidate, image_c).rel("E") != mapped_c_rel:
            continue
        if connected:
            candidate = _bridge_components(candidate)
        emb_left = make_embedding(b, candidate, {x: x for x in b.universe})
        emb_right = make_embedding(c, candidate, map_c)
        return Amalgam(candidate, emb_left, emb_right)
    raise AmalgamationImpossible("no linear graph amalgam exists")


# --- exhaustive enumeration and property verdicts ---------------------------

_MEMBER_CACHE: dict[tuple[str, int, bool], list[FinStructure]] = {}

MAX_ENUM = 6


def enumerate_members(tag: str, size: int, connected: bool = False) -> list[FinStructure]:
    """All class members with exactly `size` elements, one per isomorphism
    type, universe 0..size-1, ordered by canonical key."""
    if size > MAX_ENUM:
        raise ScaleExceeded(f"enumeration capped at {MAX_ENUM} elements")
    key = (tag, size, connected)
    if key in _MEMBER_CACHE:
        return _MEMBER_CACHE[key]
    if size == 0:
        sig = class_signature(tag) or Signature(())
        out = [empty_structure(sig)]
    else:
        seen: dict[tuple, FinStructure] = {}
        for smaller in enumerate_members(tag, size - 1, connected=False):
            for candidate in _extensions(tag, smaller, size - 1):
                if not membership(tag, candidate):
                    continue
                if connected and not _is_connected_graph(candidate):
                    continue
                ck = canonical_key(candidate)
                if ck not in seen:
                    seen[ck] = candidate
        out = [seen[k] for k in sorted(seen)]
    _MEMBER_CACHE[key] = out
    return out


def _extensions(tag: str, a: FinStructure, new: int):
    """Candidate one-point extensions of `a` by the element `new`."""
    old = a.sorted_universe()
    if tag in ("Graph", "LinearGraph"):
        max_new_edges = 2 if tag == "LinearGraph" else len(old)
        for k in range(min(len(old), max_new_edges) + 1):
            for nbrs in combinations(old, k):
                rel = set(a.rel("E"))
                rel.update({(x, new) for x in nbrs} | {(new, x) for x in nbrs})
                yield validate_structure(GRAPH_SIG, set(old) | {new}, {"E": rel})
    elif tag == "Digraph":
        for pattern in product(range(4), repeat=len(old)):
            rel = set(a.rel("E"))
            for x, p in zip(old, pattern):
                if p in (1, 3):
                    rel.add((x, new))
                if p in (2, 3):
                    rel.add((new, x))
            yield validate_structure(GRAPH_SIG, set(old) | {new}, {"E": rel})
    elif tag == "Tournament":
        for pattern in product((0, 1), repeat=len(old)):
            rel = set(a.rel("E"))
            for x, p in zip(old, pattern):
                rel.add((x, new) if p else (new, x))
            yield validate_structure(GRAPH_SIG, set(old) | {new}, {"E": rel})
    elif tag == "LinearOrder":
        seq = chain_of(a)
        for k in range(len(seq) + 1):
            yield chain_structure(seq[:k] + [new] + seq[k:])
    elif tag == "PartialOrder":
        rel = a.rel("<")
        for downs in _subsets(old):
            down = set(downs)
            if not _down_closed(down, rel):
                continue
            above = [x for x in old if x not in down]
            for ups in _subsets(above):
                up = set(ups)
                if not _up_closed(up, rel):
                    continue
                if any((d, u) not in rel for d in down for u in up):
                    continue
                new_rel = set(rel)
                new_rel.update((d, new) for d in down)
                new_rel.update((new, u) for u in up)
                yield validate_structure(ORDER_SIG, set(old) | {new}, {"<": new_rel})
    elif tag == "RationalMetric":
        dist = metric_distances(a)
        for pattern in product(METRIC_PALETTE, repeat=len(old)):
            new_dist = dict(dist)
            for x, q in zip(old, pattern):
                new_dist[frozenset((x, new))] = q
            yield metric_structure(set(old) | {new}, new_dist)
    else:
        raise StructureError(f"unknown class tag {tag!r}")


def _subsets(xs: list[int]):
    for k in range(len(xs) + 1):
        yield from combinations(xs, k)


def _down_closed(down: set[int], rel) -> bool:
    return all(x in down for d in down for x, y in rel if y == d)


def _up_closed(up: set[int], rel) -> bool:
    return all(y in up for u in up for x, y in rel if x == u)


def count_iso_types(tag: str, n: int) -> int:
    """Number of isomorphism types of class members with exactly n elements."""
    return len(enumerate_members(tag, n))


@dataclass(frozen=True)
class PropertyVerdict:
    holds: bool
    counterexample: dict | None = None


def _property_members(tag: str, size_bound: int, connected: bool) -> list[FinStructure]:
    members = []
    for n in range(size_bound + 1):
        members.extend(enumerate_members(tag, n, connected=connected))
    if tag == "RationalMetric":
        sig = _metric_common_signature(*members)
        members = [_align_signature(m, sig) for m in members]
    return members


def _amalgam_instances(tag: str, size_bound: int, connected: bool):
    members = _property_members(tag, size_bound, connected)
    for base in members:
        for left in members:
            if len(left) < len(base):
                continue
            fs = enumerate_embeddings(base, left)
            if not fs:
                continue
            for right in members:
                if len(right) < len(base):
                    continue
                gs = enumerate_embeddings(base, right)
                for f in fs:
                    for g in gs:
                        yield base, left, right, f, g


def _amalgam_failure(tag: str, f: Embedding, g: Embedding, strong: bool, connected: bool) -> str | None:
    """Build an amalgam and validate it; returns a failure reason or None."""
    if tag == "LinearGraph":
        if strong:
            reason = strong_linear_graph_obstruction(f, g)
            if reason is not None:
                return reason
            b, c, map_c, _ = _setup_amalgam(f, g)
            rel = set(b.rel("E")) | _mapped_rel(c, "E", map_c)
            candidate = validate_structure(GRAPH_SIG, set(b.universe) | set(map_c.values()), {"E": rel})
            if connected:
                candidate = _bridge_components(candidate)
            amalgam = Amalgam(
                candidate,
                make_embedding(b, candidate, {x: x for x in b.universe}),
                make_embedding(c, candidate, map_c),
            )
        else:
            try:
                amalgam = _amalgamate_linear_graph(f, g, connected=connected)
            except AmalgamationImpossible as exc:
                return str(exc)
    else:
        try:
            amalgam = amalgamate(tag, f, g)
        except (AmalgamationImpossible, NotInClass, StructureError) as exc:
            return str(exc)
    return validate_amalgam(tag, f, g, amalgam, strong=strong, connected=connected)


def validate_amalgam(
    tag: str, f: Embedding, g: Embedding, amalgam: Amalgam, strong: bool, connected: bool = False
) -> str | None:
    if not membership(tag, amalgam.result):
        return "result not in class"
    if connected and not _is_connected_graph(amalgam.result):
        return "result not connected"
    fm, gm = f.as_dict(), g.as_dict()
    lm, rm = amalgam.emb_left.as_dict(), amalgam.emb_right.as_dict()
    for a in fm:
        if lm[fm[a]] != rm[gm[a]]:
            return "square does not commute"
    if strong:
        base_image = {lm[fm[a]] for a in fm}
        if set(lm.values()) & set(rm.values()) != base_image:
            return "images overlap beyond the base"
    return None


def check_property(tag: str, prop: str, size_bound: int) -> PropertyVerdict:
    """Exhaustively verify HP / JEP / AP / SAP on members of at most
    `size_bound` elements; returns the first counterexample in canonical
    order, if any.

    For LinearGraph, JEP / AP / SAP instances range over the connected
    members (the paths); membership and the hereditary check keep the
    hereditary closure.
    """
    if size_bound > MAX_ENUM:
        raise ScaleExceeded(f"property check capped at {MAX_ENUM} elements")
    if prop not in ("HP", "JEP", "AP", "SAP"):
        raise StructureError(f"unknown property {prop!r}")
    connected = tag == "LinearGraph"

    if prop == "HP":
        for n in range(size_bound + 1):
            for member in enumerate_members(tag, n, connected=connected):
                for subset in _subsets(member.sorted_universe()):
                    sub = induced_substructure(member, set(subset))
                    try:
                        ok = membership(tag, sub)
                    except SignatureMismatch:
                        ok = False
                    if not ok:
                        return PropertyVerdict(False, {
                            "member": member, "subset": sorted(subset),
                            "detail": "induced substructure leaves the class",
                        })
        return PropertyVerdict(True)

    if prop == "JEP":
        members = _property_members(tag, size_bound, connected)
        for left in members:
            for right in members:
                base = empty_structure(left.sig)
                f = make_embedding(base, left, {})
                g = make_embedding(base, right, {})
                reason = _amalgam_failure(tag, f, g, strong=False, connected=connected)
                if reason is not None:
                    return PropertyVerdict(False, {"left": left, "right": right, "detail": reason})
        return PropertyVerdict(True)

    strong = prop == "SAP"
    for base, left, right, f, g in _amalgam_instances(tag, size_bound, connected):
        reason = _amalgam_failure(tag, f, g, strong=strong, connected=connected)
        if reason is not None:
            return PropertyVerdict(False, {
                "base": base, "left": left, "right": right,
                "f": f.as_dict(), "g": g.as_dict(), "detail": reason,
            })
    return PropertyVerdict(True)


def _align_signature(a: FinStructure, sig: Signature) -> FinStructure:
    """Re-base a structure onto a containing signature; missing symbols
    get empty interpretations."""
    if not set(a.sig.symbols) <= set(sig.symbols):
        raise SignatureMismatch("target signature does not contain the source one")
    return validate_structure(sig, set(a.universe), {n: set(ts) for n, ts in a.interp})


def _metric_common_signature(*structures: FinStructure) -> Signature:
    symbols = sorted({sym for s in structures for sym in s.sig.symbols},
                     key=lambda s: parse_metric_symbol(s[0]))
    return Signature(tuple(symbols))
