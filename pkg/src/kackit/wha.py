"""
Weak Hopf C*-algebras and weak Kac algebras as explicit structure tensors.

Conventions on a linear basis b_0 .. b_{d-1}:

    m[i, j, l]   b_i b_j = sum_l m[i, j, l] b_l
    D[i, j, k]   coefficient of b_i (x) b_j in Delta(b_k)
    eps[k]       counit on b_k
    S[l, k]      S(b_k) = sum_l S[l, k] b_l

Every identity is multilinear, so checking it on basis tuples is exhaustive.
Sweedler sums become tensor contractions.
"""

import enum
import itertools
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .base import AxiomReport
from .exceptions import InvalidGroupoid, InvalidInput
from .fdca import is_connected
from .presentation import StarAlgebraPresentation, Subalgebra, wedderburn
from .utils import max_abs, null_space, orthonormal_columns, resolve_tolerance

logger = logging.getLogger(__name__)


# Groupoids


@dataclass(frozen=True, eq=False)
class Groupoid:
    """
    A finite groupoid.

    Morphism g goes from objects[sources[g]] to objects[targets[g]]. The
    table maps (i, j) to i o j, defined exactly when sources[i] == targets[j].

    Raises:
        InvalidGroupoid: If the data violates the groupoid axioms.
    """

    objects: Tuple[str, ...]
    morphisms: Tuple[str, ...]
    sources: Tuple[int, ...]
    targets: Tuple[int, ...]
    table: Mapping[Tuple[int, int], int]
    inverse: Tuple[int, ...]

    def __post_init__(self) -> None:
        for name in ("objects", "morphisms", "sources", "targets", "inverse"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "table", {(int(i), int(j)): int(k) for (i, j), k in dict(self.table).items()})
        self._validate()

    def _validate(self) -> None:
        n, objects = len(self.morphisms), len(self.objects)
        if not objects:
            raise InvalidGroupoid("groupoid has no objects", "objects")
        if len(set(self.morphisms)) != n:
            raise InvalidGroupoid("morphism ids are not unique", "morphisms")
        if len(self.sources) != n or len(self.targets) != n or len(self.inverse) != n:
            raise InvalidGroupoid("sources, targets and inverse need one entry per morphism", "morphisms")
        for g in range(n):
            if not (0 <= self.sources[g] < objects and 0 <= self.targets[g] < objects):
                raise InvalidGroupoid(f"morphism {self.morphisms[g]} has an unknown object", f"morphisms[{g}]")
            if not 0 <= self.inverse[g] < n:
                raise InvalidGroupoid(f"inverse of {self.morphisms[g]} is out of range", f"inverse[{g}]")
        for i, j in itertools.product(range(n), repeat=2):
            composable = self.sources[i] == self.targets[j]
            k = self.table.get((i, j))
            if composable != (k is not None):
                state = "missing" if composable else "defined for a non-composable pair"
                raise InvalidGroupoid(f"composition {self.morphisms[i]} o {self.morphisms[j]} is {state}", "compose")
            if k is not None and (
                not 0 <= k < n or self.sources[k] != self.sources[j] or self.targets[k] != self.targets[i]
            ):
                raise InvalidGroupoid(
                    f"composition {self.morphisms[i]} o {self.morphisms[j]} has the wrong endpoints", "compose"
                )
        for (i, j), ij in self.table.items():
            for k in range(n):
                if self.sources[j] == self.targets[k] and self.table[(ij, k)] != self.table[(i, self.table[(j, k)])]:
                    raise InvalidGroupoid("composition is not associative", "compose")
        identities = self.identities
        for g in range(n):
            h = self.inverse[g]
            if self.table.get((g, h)) != identities[self.targets[g]] or self.table.get((h, g)) != identities[
                self.sources[g]
            ]:
                raise InvalidGroupoid(f"{self.morphisms[h]} is not inverse to {self.morphisms[g]}", f"inverse[{g}]")

    @cached_property
    def identities(self) -> Tuple[int, ...]:
        """Identity morphism of each object."""
        found = []
        for x in range(len(self.objects)):
            candidates = [
                e
                for e in range(len(self.morphisms))
                if self.sources[e] == x
                and self.targets[e] == x
                and all(self.table[(e, g)] == g for g in range(len(self.morphisms)) if self.targets[g] == x)
                and all(self.table[(g, e)] == g for g in range(len(self.morphisms)) if self.sources[g] == x)
            ]
            if not candidates:
                raise InvalidGroupoid(f"object {self.objects[x]} has no identity", f"objects[{x}]")
            found.append(candidates[0])
        return tuple(found)

    def __len__(self) -> int:
        return len(self.morphisms)

    def compose(self, i: int, j: int) -> Optional[int]:
        return self.table.get((i, j))

    @property
    def is_group(self) -> bool:
        return len(self.objects) == 1


def is_group(groupoid: Groupoid) -> bool:
    return groupoid.is_group


def group_from_table(elements: Sequence[Any], product: Dict[Tuple[Any, Any], Any], name: str = "*") -> Groupoid:
    """One-object groupoid from a multiplication table keyed by element pairs."""
    index = {g: i for i, g in enumerate(elements)}
    table = {(index[a], index[b]): index[c] for (a, b), c in product.items()}
    identity = next(
        (e for e in range(len(elements)) if all(table[(e, g)] == g for g in range(len(elements)))),
        None,
    )
    if identity is None:
        raise InvalidGroupoid("table has no identity element", "compose")
    inverse = []
    for g in range(len(elements)):
        h = next((h for h in range(len(elements)) if table[(g, h)] == identity), None)
        if h is None:
            raise InvalidGroupoid(f"{elements[g]} has no inverse", "inverse")
        inverse.append(h)
    n = len(elements)
    return Groupoid((name,), tuple(str(g) for g in elements), (0,) * n, (0,) * n, table, tuple(inverse))


def cyclic_group(n: int) -> Groupoid:
    elements = list(range(n))
    return group_from_table(elements, {(a, b): (a + b) % n for a in elements for b in elements})


def symmetric_group(n: int) -> Groupoid:
    """Permutations of range(n); (p o q)(x) = p(q(x))."""
    elements = list(itertools.permutations(range(n)))
    product = {(p, q): tuple(p[q[x]] for x in range(n)) for p in elements for q in elements}
    return group_from_table(elements, product)


def klein_four_group() -> Groupoid:
    elements = [(a, b) for a in range(2) for b in range(2)]
    return group_from_table(
        elements, {(g, h): ((g[0] + h[0]) % 2, (g[1] + h[1]) % 2) for g in elements for h in elements}
    )


def pair_groupoid(n: int) -> Groupoid:
    """One morphism between every ordered pair of n objects; (t, s) goes from s to t."""
    pairs = [(t, s) for t in range(n) for s in range(n)]
    index = {p: i for i, p in enumerate(pairs)}
    table = {(index[(t, s)], index[(s, r)]): index[(t, r)] for t in range(n) for s in range(n) for r in range(n)}
    return Groupoid(
        tuple(str(x) for x in range(n)),
        tuple(f"{t}<-{s}" for t, s in pairs),
        tuple(s for _, s in pairs),
        tuple(t for t, _ in pairs),
        table,
        tuple(index[(s, t)] for t, s in pairs),
    )


def discrete_groupoid(n: int) -> Groupoid:
    """n objects with identities only."""
    return Groupoid(
        tuple(str(x) for x in range(n)),
        tuple(f"id{x}" for x in range(n)),
        tuple(range(n)),
        tuple(range(n)),
        {(x, x): x for x in range(n)},
        tuple(range(n)),
    )


def disjoint_union(first: Groupoid, second: Groupoid) -> Groupoid:
    shift_obj, shift_mor = len(first.objects), len(first.morphisms)
    table = dict(first.table)
    table.update({(i + shift_mor, j + shift_mor): k + shift_mor for (i, j), k in second.table.items()})
    return Groupoid(
        tuple(f"a.{x}" for x in first.objects) + tuple(f"b.{x}" for x in second.objects),
        tuple(f"a.{g}" for g in first.morphisms) + tuple(f"b.{g}" for g in second.morphisms),
        first.sources + tuple(s + shift_obj for s in second.sources),
        first.targets + tuple(t + shift_obj for t in second.targets),
        table,
        first.inverse + tuple(h + shift_mor for h in second.inverse),
    )


def two_sided_transversal(group: Groupoid, subgroup: Sequence[int]) -> List[int]:
    """
    Elements forming simultaneously a left and a right transversal of a subgroup.

    Left cosets gH and right cosets Hg are matched through a perfect bipartite
    matching; every matched pair of cosets meets and contributes one element.

    Raises:
        InvalidGroupoid: If the groupoid is not a group or the subset is not a subgroup.
    """
    if not group.is_group:
        raise InvalidGroupoid("transversals need a group", "objects")
    members = sorted(set(int(h) for h in subgroup))
    if not members or any(group.table[(a, group.inverse[b])] not in members for a in members for b in members):
        raise InvalidGroupoid("subset is not a subgroup", "subgroup")
    n = len(group)
    left = {g: frozenset(group.table[(g, h)] for h in members) for g in range(n)}
    right = {g: frozenset(group.table[(h, g)] for h in members) for g in range(n)}
    left_cosets = sorted(set(left.values()), key=min)
    right_cosets = sorted(set(right.values()), key=min)

    graph = nx.Graph()
    graph.add_nodes_from((("L", i) for i in range(len(left_cosets))), bipartite=0)
    graph.add_nodes_from((("R", j) for j in range(len(right_cosets))), bipartite=1)
    for i, lc in enumerate(left_cosets):
        for j, rc in enumerate(right_cosets):
            if lc & rc:
                graph.add_edge(("L", i), ("R", j))
    top = [("L", i) for i in range(len(left_cosets))]
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    chosen = []
    for i in range(len(left_cosets)):
        _, j = matching[("L", i)]
        chosen.append(min(left_cosets[i] & right_cosets[j]))
    logger.debug(f"two-sided transversal of index {len(chosen)}: {chosen}")
    return chosen


# Structures


class Certification(str, enum.Enum):
    PENDING = "pending"
    WEAK_BIALGEBRA = "weak-bialgebra"
    WEAK_HOPF = "weak-hopf"
    WEAK_KAC = "weak-kac"


_LEVELS = list(Certification)


@dataclass(frozen=True, eq=False)
class WHAStructure:
    """
    A weak Hopf *-algebra as structure tensors over a presentation.

    Attributes:
        algebra: Product, unit and involution.
        delta: D with D[i, j, k] the coefficient of b_i (x) b_j in Delta(b_k).
        counit: Values of epsilon on the basis.
        antipode: Matrix S of the antipode.
        status: Highest verified level.
    """

    algebra: StarAlgebraPresentation
    delta: np.ndarray
    counit: np.ndarray
    antipode: np.ndarray
    status: Certification = Certification.PENDING
    label: str = field(default="")

    def __post_init__(self) -> None:
        d = self.algebra.dim
        delta = np.asarray(self.delta, dtype=complex)
        if delta.shape == (d * d, d):
            delta = delta.reshape(d, d, d)
        if delta.shape != (d, d, d):
            raise InvalidInput(f"Delta must be {d * d} x {d}", "Delta")
        counit = np.asarray(self.counit, dtype=complex).reshape(-1)
        if counit.shape != (d,):
            raise InvalidInput(f"eps must have {d} entries", "eps")
        antipode = np.asarray(self.antipode, dtype=complex)
        if antipode.shape != (d, d):
            raise InvalidInput(f"S must be {d} x {d}", "S")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "counit", counit)
        object.__setattr__(self, "antipode", antipode)
        object.__setattr__(self, "status", Certification(self.status))

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def delta_matrix(self) -> np.ndarray:
        """Delta as a d^2 x d matrix, row i*d + j for b_i (x) b_j."""
        return self.delta.reshape(self.dim * self.dim, self.dim)

    def at_least(self, level: Certification) -> bool:
        return _LEVELS.index(self.status) >= _LEVELS.index(level)

    @cached_property
    def delta_unit(self) -> np.ndarray:
        """Delta(1) as a d x d coefficient matrix."""
        return self.delta @ self.algebra.unit

    @cached_property
    def counit_products(self) -> np.ndarray:
        """E2[x, y] = eps(b_x b_y)."""
        return self.algebra.structure @ self.counit

    def comultiply(self, u: np.ndarray) -> np.ndarray:
        return self.delta @ np.asarray(u, dtype=complex)


def verify_weak_bialgebra(w: WHAStructure, tol: Optional[float] = None) -> AxiomReport:
    """
    Multiplicativity of Delta, the two weak counit identities, the weak
    comultiplicativity of the unit, coassociativity, counit laws and Delta(x*) = Delta(x)*.
    """
    tol = resolve_tolerance(tol)
    m, D, eps = w.algebra.structure, w.delta, w.counit
    St = w.algebra.involution
    d = w.dim
    eye = np.eye(d)

    product_then_delta = np.einsum("pqk,abk->pqab", m, D)
    delta_then_product = np.einsum("ijp,klq,ika,jlb->pqab", D, D, m, m, optimize=True)

    E2 = w.counit_products
    E3 = np.einsum("pqa,ark,k->pqr", m, m, eps, optimize=True)
    first = np.einsum("ijq,pi,jr->pqr", D, E2, E2, optimize=True)
    second = np.einsum("ijq,pj,ir->pqr", D, E2, E2, optimize=True)

    O = w.delta_unit
    delta_squared_unit = np.einsum("abi,ij->abj", D, O)
    unit_left = np.einsum("ax,yc,xyk->akc", O, O, m, optimize=True)
    unit_right = np.einsum("ax,yc,yxk->akc", O, O, m, optimize=True)

    coassoc_left = np.einsum("abi,ick->abck", D, D, optimize=True)
    coassoc_right = np.einsum("bcj,ajk->abck", D, D, optimize=True)
    counit_left = np.einsum("i,ijk->jk", eps, D) - eye
    counit_right = np.einsum("j,ijk->ik", eps, D) - eye

    delta_of_star = np.einsum("abl,lk->abk", D, St)
    star_of_delta = np.einsum("ijk,ai,bj->abk", np.conj(D), St, St, optimize=True)

    residuals = {
        "multiplicative": max_abs(product_then_delta - delta_then_product),
        "counit_first": max_abs(E3 - first),
        "counit_second": max_abs(E3 - second),
        "unit_left": max_abs(delta_squared_unit - unit_left),
        "unit_right": max_abs(delta_squared_unit - unit_right),
        "coassociative": max_abs(coassoc_left - coassoc_right),
        "counit_law": max(max_abs(counit_left), max_abs(counit_right)),
        "star_preserving": max_abs(delta_of_star - star_of_delta),
    }
    report = AxiomReport(residuals, tol)
    logger.debug(f"weak bialgebra residuals for {w.label or 'structure'}: {residuals}")
    return report


@dataclass(frozen=True)
class CounitalMaps:
    """Matrices of the target and source counital maps with their idempotence residuals."""

    target: np.ndarray
    source: np.ndarray
    residual: float


def counital_maps(w: WHAStructure) -> CounitalMaps:
    """
    eps_t(x) = eps(1_1 x) 1_2 and eps_s(x) = 1_1 eps(x 1_2).
    """
    O, E2 = w.delta_unit, w.counit_products
    target = O.T @ E2
    source = O @ E2.T
    residual = max(max_abs(target @ target - target), max_abs(source @ source - source))
    return CounitalMaps(target, source, residual)


def verify_antipode(w: WHAStructure, tol: Optional[float] = None) -> AxiomReport:
    """x_1 S(x_2) = eps_t(x), S(x_1) x_2 = eps_s(x) and S(x_1) x_2 S(x_3) = S(x)."""
    tol = resolve_tolerance(tol)
    m, D, S = w.algebra.structure, w.delta, w.antipode
    maps = counital_maps(w)
    left = np.einsum("ijk,lj,ilr->rk", D, S, m, optimize=True)
    right = np.einsum("ijk,li,ljr->rk", D, S, m, optimize=True)
    triple = np.einsum("abi,ick->abck", D, D, optimize=True)
    s_then_product = np.einsum("la,lbr->abr", S, m)
    sandwich = np.einsum("abck,abr,sc,rst->tk", triple, s_then_product, S, m, optimize=True)
    residuals = {
        "target_counit": max_abs(left - maps.target),
        "source_counit": max_abs(right - maps.source),
        "sandwich": max_abs(sandwich - S),
    }
    return AxiomReport(residuals, tol)


def verify_weak_kac(w: WHAStructure, tol: Optional[float] = None) -> AxiomReport:
    """S o S = id and S(x*) = S(x)*."""
    tol = resolve_tolerance(tol)
    S, St = w.antipode, w.algebra.involution
    residuals = {
        "involutive": max_abs(S @ S - np.eye(w.dim)),
        "star_compatible": max_abs(S @ St - St @ np.conj(S)),
    }
    return AxiomReport(residuals, tol)


@dataclass(frozen=True)
class WHAReport:
    bialgebra: AxiomReport
    antipode: Optional[AxiomReport] = None
    kac: Optional[AxiomReport] = None

    @property
    def status(self) -> Certification:
        if not self.bialgebra:
            return Certification.PENDING
        if self.antipode is None or not self.antipode:
            return Certification.WEAK_BIALGEBRA
        if self.kac is None or not self.kac:
            return Certification.WEAK_HOPF
        return Certification.WEAK_KAC

    def __bool__(self) -> bool:
        return self.status is Certification.WEAK_KAC

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"status": self.status.value, "bialgebra": self.bialgebra.to_dict()}
        if self.antipode is not None:
            result["antipode"] = self.antipode.to_dict()
        if self.kac is not None:
            result["kac"] = self.kac.to_dict()
        return result


def check_all(w: WHAStructure, tol: Optional[float] = None) -> WHAReport:
    """Run the suites in order, stopping at the first failing level."""
    bialgebra = verify_weak_bialgebra(w, tol)
    if not bialgebra:
        return WHAReport(bialgebra)
    antipode = verify_antipode(w, tol)
    if not antipode:
        return WHAReport(bialgebra, antipode)
    return WHAReport(bialgebra, antipode, verify_weak_kac(w, tol))


def certify(w: WHAStructure, tol: Optional[float] = None) -> WHAStructure:
    """A copy of the structure carrying the highest level its suites reach."""
    report = check_all(w, tol)
    if report.status is not Certification.WEAK_KAC:
        logger.info(f"{w.label or 'structure'} certified only as {report.status.value}: {report.to_dict()}")
    return replace(w, status=report.status)


def counital_subalgebras(w: WHAStructure, tol: Optional[float] = None) -> Tuple[Subalgebra, Subalgebra]:
    """The fixed-point algebras A_t of eps_t and A_s of eps_s."""
    tol = resolve_tolerance(tol)
    maps = counital_maps(w)
    eye = np.eye(w.dim)
    target = Subalgebra(w.algebra, null_space(maps.target - eye, tol))
    source = Subalgebra(w.algebra, null_space(maps.source - eye, tol))
    return target, source


cartan_subalgebras = counital_subalgebras


def dual_wha(w: WHAStructure) -> WHAStructure:
    """
    The dual structure on the dual basis: product D, coproduct m, unit eps,
    counit evaluation at 1, antipode S^T and f*(x) = conj(f(S(x)*)).
    """
    m, D, S = w.algebra.structure, w.delta, w.antipode
    St = w.algebra.involution
    algebra = StarAlgebraPresentation(
        structure=D.copy(),
        unit=w.counit.copy(),
        involution=(np.conj(St) @ S).T,
        label=f"dual({w.algebra.label})" if w.algebra.label else "",
    )
    status = Certification.WEAK_KAC if w.status is Certification.WEAK_KAC else Certification.PENDING
    label = f"dual({w.label})" if w.label else ""
    return WHAStructure(algebra, m.copy(), w.algebra.unit.copy(), S.T.copy(), status, label)


def groupoid_algebra(groupoid: Groupoid) -> WHAStructure:
    """
    The groupoid algebra: g h is the composite when defined and 0 otherwise,
    Delta(g) = g (x) g, eps(g) = 1, S(g) = g^{-1} = g*.
    """
    n = len(groupoid)
    m = np.zeros((n, n, n))
    for (i, j), k in groupoid.table.items():
        m[i, j, k] = 1.0
    D = np.zeros((n, n, n))
    D[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    inverse = np.zeros((n, n))
    inverse[list(groupoid.inverse), np.arange(n)] = 1.0
    unit = np.zeros(n)
    unit[list(groupoid.identities)] = 1.0
    algebra = StarAlgebraPresentation(m, unit, inverse, label=f"C[{'group' if groupoid.is_group else 'groupoid'}]")
    return WHAStructure(algebra, D, np.ones(n), inverse.copy(), Certification.WEAK_KAC, algebra.label)


def is_hopf(w: WHAStructure, tol: Optional[float] = None) -> bool:
    """True iff Delta(1) = 1 (x) 1."""
    tol = resolve_tolerance(tol)
    unit = w.algebra.unit
    unital = max_abs(w.delta_unit - np.outer(unit, unit)) <= tol
    if unital != counit_is_multiplicative(w, tol):
        logger.warning(f"unit preservation and counit multiplicativity disagree for {w.label or 'structure'}")
    return unital


def counit_is_multiplicative(w: WHAStructure, tol: Optional[float] = None) -> bool:
    tol = resolve_tolerance(tol)
    return max_abs(w.counit_products - np.outer(w.counit, w.counit)) <= tol


def is_connected_wha(w: WHAStructure, tol: Optional[float] = None, seed: Optional[int] = None) -> bool:
    """Connectedness of the inclusion A_t in A through its Bratteli diagram."""
    tol = resolve_tolerance(tol)
    target, _ = counital_subalgebras(w, tol)
    decomposition = wedderburn(w.algebra, tol, seed)
    inside = Subalgebra(decomposition.algebra, orthonormal_columns(decomposition.inverse @ target.basis, tol))
    embedding = inside.embedding(tol, seed)
    connected = is_connected(embedding.inclusion)
    logger.debug(f"A_t in A has inclusion matrix {embedding.inclusion.tolist()}, connected={connected}")
    return connected


def is_biconnected(w: WHAStructure, tol: Optional[float] = None, seed: Optional[int] = None) -> bool:
    return is_connected_wha(w, tol, seed) and is_connected_wha(dual_wha(w), tol, seed)
