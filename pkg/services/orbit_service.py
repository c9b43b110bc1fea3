"""
Primitive periodic orbits on G_I and G_II, their weights, and the orbit-sum
forms of both oscillating terms.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from config import ORBIT_MAX_COUNT, ORBIT_MAX_LEN, ORBIT_MAX_WALKS
from services.combinatorics_service import polylog_neg
from services.matrix_service import AssociatedGraphs, HermitianMatrix
from services.scattering_service import prepare_scattering, vertex_scattering
from services.trace_one_service import COUNTING, _check_mode
from utils.errors import ArgumentError, ResourceError

logger = logging.getLogger(__name__)

GRAPH_I = 'I'
GRAPH_II = 'II'


@dataclass(frozen=True)
class Orbit:
    """Rotation-minimal vertex cycle; `repetition` is 1 for primitives."""
    vertices: tuple
    repetition: int = 1

    @property
    def length(self) -> int:
        return len(self.vertices) * self.repetition

    @property
    def primitive_length(self) -> int:
        return len(self.vertices)

    def label(self) -> str:
        return '-'.join(str(v) for v in self.vertices)


class OrbitCatalog(list):
    """Primitive orbits of one graph, sorted by (length, vertices)."""

    def __init__(self, which: str, max_len: int, orbits: Sequence[Orbit] = ()):
        super().__init__(orbits)
        self.which = which
        self.max_len = max_len

    def of_length(self, n: int) -> list:
        return [p for p in self if p.primitive_length == n]


def canonical_rotation(vertices: Sequence[int]) -> tuple:
    """Lexicographically smallest rotation of a cyclic sequence."""
    vertices = tuple(vertices)
    return min(vertices[k:] + vertices[:k] for k in range(len(vertices)))


def is_primitive(vertices: Sequence[int]) -> bool:
    """False when the cycle is q^r for some r >= 2."""
    vertices = tuple(vertices)
    n = len(vertices)
    for period in range(1, n):
        if n % period == 0 and vertices == vertices[:period] * (n // period):
            return False
    return True


def _adjacency(graph: AssociatedGraphs, which: str) -> list:
    if which == GRAPH_I:
        adjacency = graph.adjacency_I
    elif which == GRAPH_II:
        adjacency = graph.adjacency_II
    else:
        raise ArgumentError(f"Graph must be '{GRAPH_I}' or '{GRAPH_II}' (got '{which}')")
    return [tuple(int(w) for w in np.flatnonzero(adjacency[v])) for v in range(len(adjacency))]


def enumerate_primitive_orbits(graph: AssociatedGraphs, which: str, max_len: int, max_count: int = ORBIT_MAX_COUNT,
                               max_walks: int = ORBIT_MAX_WALKS) -> OrbitCatalog:
    """
    Depth-first search for closed walks starting at their smallest vertex v0 and
    visiting only vertices >= v0. Each walk is kept if it is its own canonical
    rotation and is not a proper power.
    Raises ResourceError past max_count orbits found or max_walks partial walks explored.
    """
    if max_len < 1:
        raise ArgumentError(f"max_len must be at least 1 (got {max_len})")
    if max_len > ORBIT_MAX_LEN:
        raise ResourceError(f"max_len={max_len} exceeds the enumeration budget of {ORBIT_MAX_LEN}")

    neighbors = _adjacency(graph, which)
    found = []
    explored = 0

    for start in range(len(neighbors)):
        stack = [(start,)]
        while stack:
            walk = stack.pop()
            for nxt in neighbors[walk[-1]]:
                if nxt < start:
                    continue
                if nxt == start and walk == canonical_rotation(walk) and is_primitive(walk):
                    found.append(Orbit(vertices=walk))
                    if len(found) > max_count:
                        raise ResourceError(f"More than {max_count} primitive orbits up to length {max_len}")
                if len(walk) < max_len:
                    explored += 1
                    if explored > max_walks:
                        raise ResourceError(
                            f"Orbit search explored more than {max_walks} walks up to length {max_len}"
                        )
                    stack.append(walk + (nxt,))

    found.sort(key=lambda p: (p.primitive_length, p.vertices))
    logger.debug("Enumerated %d primitive orbits on G_%s up to length %d", len(found), which, max_len)
    return OrbitCatalog(which, max_len, found)


def _cycle_pairs(vertices: tuple):
    n = len(vertices)
    return [(vertices[(k + 1) % n], vertices[k]) for k in range(n)]


def orbit_weight_I(matrix: HermitianMatrix, orbit: Orbit) -> complex:
    """W_I = prod_k H_{v_{k+1} v_k} around the primitive cycle."""
    entries = np.asarray(matrix.entries)
    weight = 1.0 + 0j
    for to, frm in _cycle_pairs(orbit.vertices):
        if entries[to, frm] == 0:
            raise ArgumentError(f"Orbit {orbit.label()} uses missing edge ({to}, {frm})")
        weight *= entries[to, frm]
    return complex(weight) ** orbit.repetition


def _require_depth(orbits: OrbitCatalog, s: int):
    if getattr(orbits, 'max_len', s) < s:
        raise ArgumentError(f"Orbits enumerated to length {orbits.max_len}, need {s}")


def trace_from_orbits(matrix: HermitianMatrix, s: int, orbits: OrbitCatalog) -> complex:
    """tr H^s as sum over primitives p with r n_p = s of n_p W_p^r."""
    if s == 0:
        return complex(matrix.n)
    _require_depth(orbits, s)
    total = 0j
    for orbit in orbits:
        n_p = orbit.primitive_length
        if s % n_p == 0:
            total += n_p * orbit_weight_I(matrix, orbit) ** (s // n_p)
    return total


def osc_I_orbits(matrix: HermitianMatrix, lam: float, epsilon: float, orbits: OrbitCatalog,
                 max_total_len: int, mode: str = COUNTING) -> float:
    """
    Polylog-weighted orbit sum over repetitions with r n_p <= max_total_len.
    Only lengths s >= 1 appear; the s = 0 term has no orbit.
    """
    _check_mode(mode)
    if epsilon <= 0:
        raise ArgumentError(f"epsilon must be positive (got {epsilon})")
    z = complex(np.exp(1j * lam - epsilon))

    total = 0j
    for orbit in orbits:
        n_p = orbit.primitive_length
        weight = orbit_weight_I(matrix, orbit)
        for r in range(1, max_total_len // n_p + 1):
            s = r * n_p
            prefactor = (-1j) ** s / math.factorial(s)
            polylog = polylog_neg(s - 1 if mode == COUNTING else s, z)
            total += n_p * weight ** r * prefactor * polylog

    return float(total.imag / math.pi if mode == COUNTING else total.real / math.pi)


def orbit_weight_II(matrix, lam: complex, orbit: Orbit) -> complex:
    """W_II = prod_k sigma^{(v_k)}_{v_{k+1}, v_{k-1}} with cyclic indices."""
    data = prepare_scattering(matrix) if isinstance(matrix, HermitianMatrix) else matrix
    vertices = orbit.vertices
    n = len(vertices)
    weight = 1.0 + 0j
    for k, v in enumerate(vertices):
        out_to, in_from = vertices[(k + 1) % n], vertices[k - 1]
        if out_to not in data.graphs.neighborhoods[v] or in_from not in data.graphs.neighborhoods[v]:
            raise ArgumentError(f"Orbit {orbit.label()} is not a cycle of G_II")
        weight *= vertex_scattering(data, v, lam).entry(out_to, in_from)
    return weight ** orbit.repetition


def osc_II_orbits(matrix, lam: float, epsilon: float, orbits: OrbitCatalog, max_total_len: int) -> float:
    """(1/pi) Im sum_p sum_{r n_p <= max_total_len} W_p^r / r at lambda + i epsilon."""
    if epsilon <= 0:
        raise ArgumentError(f"epsilon must be positive (got {epsilon})")
    data = prepare_scattering(matrix) if isinstance(matrix, HermitianMatrix) else matrix
    point = lam + 1j * epsilon

    total = 0j
    for orbit in orbits:
        weight = orbit_weight_II(data, point, orbit)
        for r in range(1, max_total_len // orbit.primitive_length + 1):
            total += weight ** r / r
    return float(total.imag / math.pi)


def orbit_table(matrix: HermitianMatrix, orbits: OrbitCatalog, lam: float = None) -> pd.DataFrame:
    """One row per primitive orbit with its r = 1 weight; mode II needs lambda."""
    rows = []
    data = prepare_scattering(matrix) if orbits.which == GRAPH_II else None
    for orbit in orbits:
        if orbits.which == GRAPH_I:
            weight = orbit_weight_I(matrix, orbit)
        else:
            if lam is None:
                raise ArgumentError("G_II orbit weights need a lambda")
            weight = orbit_weight_II(data, lam, orbit)
        rows.append({
            'orbit': orbit.label(),
            'length': orbit.primitive_length,
            'weight_re': weight.real,
            'weight_im': weight.imag,
        })
    return pd.DataFrame(rows, columns=['orbit', 'length', 'weight_re', 'weight_im'])
