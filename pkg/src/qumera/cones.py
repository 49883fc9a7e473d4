"""MERA graph bookkeeping, causal cones, causal shadows and Kraus families.

Geometry of one layer (level ``l`` has ``n = N / 2**l`` sites, 0-based and
periodic; level 0 is physical, level ``m`` is the hat):

* isometry ``("iso", l, i)`` takes site ``i`` of level ``l`` to the
  intermediate legs ``2i, 2i+1``;
* disentangler ``("dis", l, q)`` takes intermediate legs ``2q+1, 2q+2``
  (mod ``2n``) to the sites ``2q+1, 2q+2`` of level ``l-1``.

With this layout the ``M`` tensor over upper sites ``(i, i+1, i+2)`` has its
six lower legs at intermediate/final positions ``2i .. 2i+5``; legs 1 and 6
are isometry outputs that leave the cone through a disentangler which then
cancels against its adjoint.

Public site numbers are 1-based, as in ``k = 1..N``.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .model import StructuralError, require_valid

MODALITIES = ("L", "R")


def _log2_exact(n):
    n = int(n)
    if n < 1 or n & (n - 1):
        return None
    return n.bit_length() - 1


@dataclass(frozen=True)
class MeraGraph:
    N: int
    m: int

    @cached_property
    def layers(self):
        """``layers[l-1]`` = (isometries, disentanglers) of layer ``l``; built on demand."""
        out = []
        for l in range(1, self.m + 1):
            n_up = self.N >> l
            out.append((tuple(("iso", l, i) for i in range(n_up)),
                        tuple(("dis", l, q) for q in range(n_up))))
        return tuple(out)

    def sites(self, level):
        return self.N >> level

    def tensors(self):
        out = {("hat",)}
        for iso, dis in self.layers:
            out.update(iso)
            out.update(dis)
        return out

    def audit(self):
        """Count producers/consumers of every leg; return (physical, dangling)."""
        produced = {}
        consumed = {}

        def bump(table, leg):
            table[leg] = table.get(leg, 0) + 1

        for s in range(4):
            bump(produced, ("site", self.m, s))
        for l, (iso, dis) in enumerate(self.layers, start=1):
            n_low = 2 * self.sites(l)
            for _, _, i in iso:
                bump(consumed, ("site", l, i))
                bump(produced, ("mid", l, 2 * i))
                bump(produced, ("mid", l, 2 * i + 1))
            for _, _, q in dis:
                a, b = (2 * q + 1) % n_low, (2 * q + 2) % n_low
                bump(consumed, ("mid", l, a))
                bump(consumed, ("mid", l, b))
                bump(produced, ("site", l - 1, a))
                bump(produced, ("site", l - 1, b))
        internal = set(consumed)
        bad = [leg for leg in set(produced) | internal
               if produced.get(leg, 0) != 1 or (leg in internal and consumed[leg] != 1)]
        physical = [leg for leg in produced if leg not in internal]
        return physical, bad


def build_graph(N):
    n = _log2_exact(N)
    if n is None or n < 3:
        raise StructuralError(f"site count must be a power of two >= 8, got {N}")
    return MeraGraph(N=N, m=n - 2)


def _ascend(graph, level, sites):
    """Percolate a set of final sites at ``level - 1`` one layer up.

    Returns the tensors touched in layer ``level`` and the upper sites reached.
    """
    n_low = 2 * graph.sites(level)
    dis = set()
    mids = set()
    for p in sites:
        q = ((p - 1) % n_low) // 2
        dis.add(("dis", level, q))
        mids.update({(2 * q + 1) % n_low, (2 * q + 2) % n_low})
    ups = {x // 2 for x in mids}
    iso = {("iso", level, i) for i in ups}
    return dis | iso, ups


def _ordered_triple(sites, n):
    for c in sites:
        if {(c - 1) % n, c, (c + 1) % n} == set(sites):
            return c
    raise AssertionError(f"cone width broke: {sorted(sites)} on ring of {n}")


@dataclass(frozen=True)
class ConePath:
    k: int
    modalities: tuple
    hat_leg: int
    centers: tuple  # 0-based triple centers at levels 0..m
    tensors: tuple  # per layer, frozensets of tensor ids

    @property
    def string(self):
        return "".join(self.modalities)


def cone_path(graph, k):
    """Trace the causal cone of the triple centred at site ``k`` (1-based)."""
    if not 1 <= k <= graph.N:
        raise ValueError(f"site {k} outside 1..{graph.N}")
    c = k - 1
    n = graph.N
    sites = {(c - 1) % n, c, (c + 1) % n}
    mods, centers, tens = [], [c], []
    for level in range(1, graph.m + 1):
        n_up = graph.sites(level)
        touched, ups = _ascend(graph, level, sites)
        if len(ups) != 3:
            raise AssertionError(f"cone of site {k} spans {len(ups)} sites at level {level}")
        i = (_ordered_triple(ups, n_up) - 1) % n_up
        offset = ((c - 1) - 2 * i) % (2 * n_up)
        # lower triple on M legs (2,3,4) is L, on (3,4,5) is R
        mods.append({1: "L", 2: "R"}[offset])
        c = (i + 1) % n_up
        centers.append(c)
        tens.append(frozenset(touched))
        sites = ups
    traced = ({0, 1, 2, 3} - {(c - 1) % 4, c, (c + 1) % 4}).pop()
    return ConePath(k=k, modalities=tuple(mods), hat_leg=traced + 1,
                    centers=tuple(centers), tensors=tuple(tens))


def all_cone_paths(graph):
    return [cone_path(graph, k) for k in range(1, graph.N + 1)]


def merge_layer(graph, k, k2):
    """First layer (counted from the bottom) where the cones of ``k`` and ``k2`` share a tensor.

    Returns ``graph.m + 1`` when they only meet at the hat.
    """
    a = cone_path(graph, k)
    b = cone_path(graph, k2)
    for level, (ta, tb) in enumerate(zip(a.tensors, b.tensors), start=1):
        if ta & tb:
            return level
    return graph.m + 1


@dataclass(frozen=True)
class Shadow:
    depth: int
    links: tuple  # 1-based sites at level `depth`
    triples: tuple  # 1-based physical triple centres, left to right
    physical_window: tuple  # 1-based physical sites, left to right
    prefixes: tuple  # modality prefix of each triple's cone
    tensors: frozenset

    @property
    def k_left(self):
        return self.physical_window[0]


def _arc_order(sites, n):
    """Order a set of ring sites as a contiguous arc (left to right)."""
    sites = set(sites)
    if len(sites) == n:
        return list(range(n))
    start = next(s for s in sites if (s - 1) % n not in sites)
    out = [start]
    while (out[-1] + 1) % n in sites:
        out.append((out[-1] + 1) % n)
    if len(out) != len(sites):
        raise ValueError(f"sites {sorted(sites)} are not contiguous on a ring of {n}")
    return out


def shadow(graph, depth, links):
    """Causal shadow of the level-``depth`` links ``links`` (1-based).

    Collects every physical triple whose cone reaches ``links`` and nothing
    else at that level.
    """
    if not 1 <= depth <= graph.m:
        raise ValueError(f"shadow depth {depth} outside 1..{graph.m}")
    n = graph.sites(depth)
    target = {(x - 1) % n for x in links}
    triples, prefixes, window, tensors = [], [], set(), set()
    for path in all_cone_paths(graph):
        c = path.centers[depth]
        if {(c - 1) % n, c, (c + 1) % n} <= target:
            triples.append(path.k - 1)
            prefixes.append(path.string[:depth])
            window.update({(path.k - 2) % graph.N, path.k - 1, path.k % graph.N})
            for layer in path.tensors[:depth]:
                tensors.update(layer)
    if not triples:
        raise ValueError(f"no cone reaches exactly the links {sorted(links)} at depth {depth}")
    order = _arc_order(window, graph.N)
    pos = {s: i for i, s in enumerate(order)}
    ranked = sorted(zip(triples, prefixes), key=lambda tp: pos[tp[0]])
    return Shadow(
        depth=depth,
        links=tuple(sorted(x % n + 1 for x in target)),
        triples=tuple(t + 1 for t, _ in ranked),
        physical_window=tuple(s + 1 for s in order),
        prefixes=tuple(p for _, p in ranked),
        tensors=frozenset(tensors),
    )


def triple_shadow(graph, depth, center):
    """Shadow of the three consecutive links centred at ``center`` (1-based) at ``depth``."""
    n = graph.sites(depth)
    c = center - 1
    return shadow(graph, depth, [(c - 1) % n + 1, c + 1, (c + 1) % n + 1])


def build_M(spec):
    """Five-factor tensor of one cone layer, legs ``(u1, u2, u3, l1, ..., l6)``."""
    require_valid(spec)
    lam, chi = spec.lam, spec.chi
    # lam^{u1}_{l1,o} chi^{o,b}_{l2,l3} lam^{u2}_{b,e} chi^{e,s}_{l4,l5} lam^{u3}_{s,l6}
    return np.einsum("xAo,obBC,ybe,esDE,zsF->xyzABCDEF", lam, chi, lam, chi, lam, optimize=True)


@dataclass(frozen=True)
class KrausSet:
    modality: str
    picture: str  # "heisenberg" or "schrodinger"
    ops: np.ndarray  # (d**3, d**3, d**3): ops[r] is one operator


def kraus(spec, modality, picture="heisenberg", M=None):
    """Kraus family of one cone layer.

    Heisenberg operators map lower triples to upper ones,
    ``<u|L_r|l> = conj(M[u, r1, l, r2, r3])``; the Schrodinger family is
    their adjoint, so ``<l|L_r^dag|u> = M[u, r1, l, r2, r3]`` descends the
    literal ket contraction. For ``R`` the lower legs are ``(r1, r2, l, r3)``.
    """
    if modality not in MODALITIES:
        raise ValueError(f"modality must be L or R, got {modality!r}")
    if picture not in ("heisenberg", "schrodinger"):
        raise ValueError(f"unknown picture {picture!r}")
    d = spec.d
    if M is None:
        M = build_M(spec)
    # M legs: 0..2 upper, 3..8 lower (l1..l6)
    if modality == "L":
        perm = (3, 7, 8, 4, 5, 6, 0, 1, 2)  # r1, r2=l5, r3=l6, kept l2..l4, u
    else:
        perm = (3, 4, 8, 5, 6, 7, 0, 1, 2)  # r1, r2=l2, r3=l6, kept l3..l5, u
    K = np.transpose(M, perm).reshape(d**3, d**3, d**3)  # K[r, l, u] = Schrodinger op
    if picture == "schrodinger":
        return KrausSet(modality, picture, K)
    return KrausSet(modality, picture, np.conj(np.transpose(K, (0, 2, 1))))


def swap13(d):
    """Unitary exchanging the first and third qudit of a triple."""
    P = np.zeros((d**3, d**3))
    for a, b, c in product(range(d), repeat=3):
        P[(c * d + b) * d + a, (a * d + b) * d + c] = 1.0
    return P
