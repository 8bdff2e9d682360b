"""Markov partitions of p-adic Julia sets: construction by uniform ball
refinement for polynomial maps, independent verification, and ingestion of
subhyperbolic chart data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import RationalMapSpec, derivatives_along_orbit, evaluate_orbit
from .errors import (
    ExpansionViolation,
    MissingRootData,
    NonConstantDerivativeValuation,
    NotMarkovAtLevel,
    PoleHit,
)
from .padic import INFINITE, PadicContext, PadicDisc, PadicNumber, truncate, vp
from .poly import to_fraction

DEFAULT_T_ESC = 32
DEFAULT_ESCAPE_VALUATION = -8
DEFAULT_LEVELS = range(1, 7)


@dataclass
class MarkovPartition:
    blocks: list[PadicDisc]
    transition: list[list[bool]]
    derivative_valuations: list[int]
    ctx: PadicContext
    level: int | None = None
    slack: int = 1  # chart discs are one p-adic level wider than the blocks

    @property
    def size(self) -> int:
        return len(self.blocks)

    def block_of(self, x) -> int | None:
        for i, b in enumerate(self.blocks):
            if b.contains(x):
                return i
        return None

    def successors(self, i: int) -> list[int]:
        return [j for j, t in enumerate(self.transition[i]) if t]

    def loops(self, n: int):
        """Admissible sequences (a_0, ..., a_n) with a_0 = a_n."""
        for start in range(self.size):
            yield from self._paths(start, n, start)

    def _paths(self, start, n, end):
        stack = [(start,)]
        while stack:
            path = stack.pop()
            if len(path) == n + 1:
                if path[-1] == end:
                    yield path
                continue
            for j in self.successors(path[-1]):
                stack.append(path + (j,))

    def loop_count(self, n: int) -> int:
        k = self.size
        T = [[int(t) for t in row] for row in self.transition]
        P = [[int(i == j) for j in range(k)] for i in range(k)]
        for _ in range(n):
            P = [[sum(P[i][m] * T[m][j] for m in range(k)) for j in range(k)] for i in range(k)]
        return sum(P[i][i] for i in range(k))

    def to_json(self) -> dict:
        return {
            "prime": self.ctx.prime,
            "precision": self.ctx.precision,
            "level": self.level,
            "slack": self.slack,
            "blocks": [{"center": str(b.center), "radius_valuation": b.radius_valuation}
                       for b in self.blocks],
            "transition": [[int(t) for t in row] for row in self.transition],
            "derivative_valuations": list(self.derivative_valuations),
        }

    @classmethod
    def from_json(cls, data: dict, ctx: PadicContext | None = None) -> MarkovPartition:
        if ctx is None:
            ctx = PadicContext(data["prime"], data.get("precision", 20))
        blocks = [PadicDisc(to_fraction(b["center"]), int(b["radius_valuation"]), ctx.prime)
                  for b in data["blocks"]]
        return cls(
            blocks=blocks,
            transition=[[bool(t) for t in row] for row in data["transition"]],
            derivative_valuations=[int(v) for v in data["derivative_valuations"]],
            ctx=ctx,
            level=data.get("level"),
            slack=data.get("slack", 1),
        )


# ---------------------------------------------------------------------------
# ball dynamics for polynomial maps


def _taylor(f: RationalMapSpec, disc: PadicDisc, widen: int = 0) -> list[Fraction]:
    p = disc.prime
    return f.as_poly().taylor_shift(disc.center, Fraction(p) ** (disc.radius_valuation - widen))


def is_scaling_on(b: list[Fraction], p: int, strict: bool = True) -> bool:
    """The linear Taylor term dominates every higher one on the unit disc."""
    if len(b) < 2 or b[1] == 0:
        return False
    v1 = vp(b[1], p)
    return all(vp(c, p) > v1 if strict else vp(c, p) >= v1 for c in b[2:])


def disc_image(f: RationalMapSpec, disc: PadicDisc) -> PadicDisc:
    """Smallest disc around f(center) known to contain f(disc)."""
    p = disc.prime
    b = _taylor(f, disc)
    rho = min((vp(c, p) for c in b[1:]), default=INFINITE)
    if rho == INFINITE:
        return PadicDisc(b[0], 10**6, p)
    return PadicDisc(truncate(b[0], p, rho), int(rho), p)


def escape_certificate(f: RationalMapSpec, p: int, escape_valuation: int) -> bool:
    """Every y with v(y) <= escape_valuation has v(f(y)) < v(y), and this persists.

    Holds when the leading term strictly dominates at that valuation and is
    itself expanding; both conditions only improve as v(y) decreases.
    """
    if not f.is_polynomial:
        return False
    a = f.as_poly().coeffs
    d = len(a) - 1
    if d < 2:
        return False
    e = escape_valuation
    lead = vp(a[d], p) + d * e
    if lead >= e:
        return False
    return all(lead < vp(a[k], p) + k * e for k in range(d) if a[k] != 0)


def outer_region_escapes(f: RationalMapSpec, p: int, escape_valuation: int) -> bool:
    """Every point outside Z_p escapes: annulus by annulus down to the certified region."""
    if not escape_certificate(f, p, escape_valuation):
        return False
    a = f.as_poly().coeffs
    for m in range(escape_valuation + 1, 0):
        vals = [vp(c, p) + k * m for k, c in enumerate(a) if c != 0]
        mu = min(vals)
        if vals.count(mu) > 1 or mu >= m:
            return False
    return True


def escaping_test(f: RationalMapSpec, x, T_esc: int = DEFAULT_T_ESC,
                  escape_valuation: int = DEFAULT_ESCAPE_VALUATION,
                  ctx: PadicContext | None = None) -> bool:
    """Certificate that the orbit of x escapes; False means undetermined."""
    if T_esc <= 0:
        return False
    if not isinstance(x, PadicNumber):
        if ctx is None:
            raise ValueError("a context is needed for a rational starting point")
        x = ctx(x)
    p = x.p
    if not escape_certificate(f, p, escape_valuation):
        return False
    y = x
    for _ in range(T_esc):
        try:
            y = f(y)
        except PoleHit:
            return False
        if y.is_zero():
            continue
        if y.valuation <= escape_valuation:
            return True
    return False


def ball_escapes(f: RationalMapSpec, disc: PadicDisc, T_esc: int, escape_valuation: int,
                 outer_ok: bool) -> bool:
    p = disc.prime
    d = disc
    for _ in range(T_esc):
        d = disc_image(f, d)
        vc = vp(d.center, p)
        if vc < d.radius_valuation:
            # every point of d has valuation vc
            if vc <= escape_valuation and escape_certificate(f, p, escape_valuation):
                return True
            if vc <= -1 and outer_ok:
                return True
        if d.radius_valuation < 0:
            return False
    return False


def _block_data(f: RationalMapSpec, disc: PadicDisc) -> int:
    """Constant derivative valuation of f on a block, checking expansion and scaling."""
    p = disc.prime
    r = disc.radius_valuation
    b = _taylor(f, disc)
    lowest = min((vp(k * c, p) for k, c in enumerate(b) if k >= 1 and c != 0), default=INFINITE)
    if lowest - r >= 0:
        raise ExpansionViolation(f"|f'| <= 1 on all of {disc}")
    if not is_scaling_on(b, p):
        raise NonConstantDerivativeValuation(f"f is not a scaling on {disc}")
    v = int(vp(b[1], p) - r)
    if v >= 0:
        raise ExpansionViolation(f"v_p(f') = {v} >= 0 on {disc}")
    return v


def build_partition(f: RationalMapSpec, ctx: PadicContext, level: int,
                    T_esc: int = DEFAULT_T_ESC,
                    escape_valuation: int = DEFAULT_ESCAPE_VALUATION) -> MarkovPartition:
    """Uniform level-``level`` ball partition of the non-escaping part of Z_p."""
    if level < 1:
        raise ValueError("level must be at least 1")
    if not f.is_polynomial or f.degree < 2:
        raise ValueError("construction is available for polynomial maps of degree >= 2")
    p = ctx.prime
    outer_ok = outer_region_escapes(f, p, escape_valuation)
    if not outer_ok:
        raise NotMarkovAtLevel("cannot certify that the complement of Z_p escapes")
    balls = [PadicDisc(Fraction(c), level, p) for c in range(p**level)]
    survivors = [b for b in balls if not ball_escapes(f, b, T_esc, escape_valuation, outer_ok)]

    # Drop blocks whose forward paths die out (they hold no Julia points).
    while True:
        vals = [_block_data(f, b) for b in survivors]
        images = [PadicDisc(f.as_poly()(b.center), b.radius_valuation + v, p)
                  for b, v in zip(survivors, vals)]
        T = []
        for i, img in enumerate(images):
            row = []
            for j, blk in enumerate(survivors):
                rel = img.relation(blk)
                if rel == "subset":
                    raise NotMarkovAtLevel(
                        f"image of block {i} is strictly inside block {j}; refine the level"
                    )
                row.append(rel in ("equal", "superset"))
            T.append(row)
        dead = [i for i, row in enumerate(T) if not any(row)]
        if not dead:
            break
        survivors = [b for i, b in enumerate(survivors) if i not in dead]
        if not survivors:
            break
    if not survivors:
        return MarkovPartition([], [], [], ctx, level)
    return MarkovPartition(survivors, T, vals, ctx, level)


def find_partition(f: RationalMapSpec, ctx: PadicContext, levels=DEFAULT_LEVELS,
                   T_esc: int = DEFAULT_T_ESC,
                   escape_valuation: int = DEFAULT_ESCAPE_VALUATION) -> MarkovPartition:
    """Try increasing levels until the uniform partition is Markov."""
    last = None
    for r in levels:
        try:
            return build_partition(f, ctx, r, T_esc, escape_valuation)
        except (NotMarkovAtLevel, NonConstantDerivativeValuation) as exc:
            last = exc
    raise NotMarkovAtLevel(f"no Markov partition at levels {list(levels)}: {last}")


# ---------------------------------------------------------------------------
# verification


@dataclass
class Discrepancy:
    kind: str
    where: tuple
    detail: str

    def to_json(self):
        return {"kind": self.kind, "where": list(self.where), "detail": self.detail}


@dataclass
class MarkovReport:
    discrepancies: list[Discrepancy] = field(default_factory=list)
    derived_transition: list[list[bool]] = field(default_factory=list)
    derived_valuations: list[int | None] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def kinds(self) -> set[str]:
        return {d.kind for d in self.discrepancies}

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "discrepancies": [d.to_json() for d in self.discrepancies],
            "derived_transition": [[int(t) for t in row] for row in self.derived_transition],
            "derived_valuations": self.derived_valuations,
        }


def verify_markov(f: RationalMapSpec, partition: MarkovPartition, samples: int | None = None) -> MarkovReport:
    """Re-derive the partition data from point samples and the scaling law.

    Nothing here reuses the Taylor-dominance route of ``build_partition``
    except for the enlargement (chart) margin, which is a property of the
    wider C_p disc and cannot be sampled from Q_p points alone.
    """
    rep = MarkovReport()
    p = partition.ctx.prime
    blocks = partition.blocks
    k = len(blocks)
    samples = p * p if samples is None else samples

    for i, j in itertools.combinations(range(k), 2):
        if not blocks[i].disjoint(blocks[j]):
            rep.discrepancies.append(Discrepancy("overlap", (i, j), "blocks are not disjoint"))

    images: list[PadicDisc | None] = []
    for i, blk in enumerate(blocks):
        r = blk.radius_valuation
        step = Fraction(p) ** r
        pts = [blk.center + s * step for s in range(samples)]
        vals = {vp(f.derivative(x), p) for x in pts}
        if len(vals) != 1:
            rep.discrepancies.append(Discrepancy(
                "NonConstantDerivativeValuation", (i,), f"sampled v_p(f') values {sorted(vals)}"))
            rep.derived_valuations.append(None)
            images.append(None)
            continue
        v = vals.pop()
        rep.derived_valuations.append(v)
        if v != partition.derivative_valuations[i]:
            rep.discrepancies.append(Discrepancy(
                "derivative_valuation", (i,), f"stored {partition.derivative_valuations[i]}, derived {v}"))
        if v >= 0:
            rep.discrepancies.append(Discrepancy("ExpansionViolation", (i,), f"v_p(f') = {v} >= 0"))
        # scaling: distances between sample points are multiplied by |f'|
        fx = [f(x) for x in pts[:p]]
        for a, b in itertools.combinations(range(len(fx)), 2):
            if vp(fx[a] - fx[b], p) != r + v:
                rep.discrepancies.append(Discrepancy(
                    "injectivity", (i,), f"samples {a}, {b} are not scaled apart"))
                break
        images.append(PadicDisc(f(blk.center), int(r + v), p))

    derived = []
    for i in range(k):
        row = []
        for j in range(k):
            img = images[i]
            if img is None:
                row.append(False)
                continue
            rel = img.relation(blocks[j])
            if rel == "subset":
                rep.discrepancies.append(Discrepancy(
                    "not_markov", (i, j), "image meets block without covering it"))
            t = rel in ("equal", "superset")
            row.append(t)
            if t != bool(partition.transition[i][j]):
                rep.discrepancies.append(Discrepancy(
                    "transition", (i, j), f"stored {int(bool(partition.transition[i][j]))}, derived {int(t)}"))
        derived.append(row)
    rep.derived_transition = derived

    # chart margin: closure of the widened disc B_j inside f(widened B_i)
    s = partition.slack
    if f.is_polynomial:
        for i, blk in enumerate(blocks):
            v = rep.derived_valuations[i]
            if v is None:
                continue
            b = _taylor(f, blk, widen=s)
            if not is_scaling_on(b, p, strict=False):
                rep.discrepancies.append(Discrepancy(
                    "margin", (i,), "f is not a scaling on the widened chart disc"))
                continue
            open_rad = blk.radius_valuation - s + v  # f(B_i) = {v(z - f(c_i)) > open_rad}
            fc = f(blk.center)
            for j in range(k):
                if not derived[i][j]:
                    continue
                cj, rj = blocks[j].center, blocks[j].radius_valuation - s
                if not (rj > open_rad and vp(cj - fc, p) > open_rad):
                    rep.discrepancies.append(Discrepancy(
                        "margin", (i, j), "closure of widened chart not inside the image chart"))
    return rep


# ---------------------------------------------------------------------------
# subhyperbolic chart data


@dataclass
class ChartOrbit:
    """A periodic point with its period, multiplier and weight product.

    For infinite blocks ``degree`` is the local degree d_l and ``root`` a
    chosen d_l-th root of the multiplier; the correction factor uses powers
    of that root.
    """

    center: PadicNumber
    period: int
    multiplier: PadicNumber
    psi_product: PadicNumber
    degree: int = 1
    root: PadicNumber | None = None

    def scaling(self) -> PadicNumber:
        if self.degree == 1:
            return self.multiplier
        if self.root is None:
            raise MissingRootData(f"degree-{self.degree} chart needs a root of the multiplier")
        return self.root

    def to_json(self) -> dict:
        out = {
            "center": self.center.to_json(),
            "period": self.period,
            "multiplier": self.multiplier.to_json(),
            "psi_product": self.psi_product.to_json(),
            "degree": self.degree,
        }
        if self.root is not None:
            out["root"] = self.root.to_json()
        return out


@dataclass
class SubhyperbolicChartData:
    ctx: PadicContext
    infinite: list[ChartOrbit] = field(default_factory=list)     # representatives Q
    exceptional: list[ChartOrbit] = field(default_factory=list)  # representatives Q'

    @property
    def empty(self) -> bool:
        return not self.infinite and not self.exceptional

    def validate(self, f: RationalMapSpec | None = None) -> list[str]:
        """Problems found in the data; an empty list means it is consistent."""
        problems = []
        for name, group in (("infinite", self.infinite), ("exceptional", self.exceptional)):
            for idx, orb in enumerate(group):
                tag = f"{name}[{idx}]"
                if orb.degree < 1:
                    problems.append(f"{tag}: degree must be >= 1")
                if orb.period < 1:
                    problems.append(f"{tag}: period must be >= 1")
                if name == "exceptional" and orb.degree != 1:
                    problems.append(f"{tag}: exceptional points carry degree 1")
                if orb.degree > 1:
                    if orb.root is None:
                        problems.append(f"{tag}: missing root of the multiplier")
                    elif not orb.root ** orb.degree == orb.multiplier:
                        problems.append(f"{tag}: root^degree does not equal the multiplier")
                if f is not None:
                    problems.extend(_check_periodic(f, orb, tag))
            if f is not None:
                problems.extend(_check_distinct_orbits(f, group, name))
        return problems


def _check_periodic(f, orb: ChartOrbit, tag: str) -> list[str]:
    out = []
    try:
        orbit = evaluate_orbit(f, orb.center, orb.period)
        lam, _ = derivatives_along_orbit(f, orb.center, orb.period)
    except PoleHit:
        return [f"{tag}: orbit hits a pole"]
    if not orbit[-1] == orb.center:
        out.append(f"{tag}: center is not periodic with the stated period")
    if not lam == orb.multiplier:
        out.append(f"{tag}: multiplier disagrees with (f^n)'")
    return out


def _check_distinct_orbits(f, group: list[ChartOrbit], name: str) -> list[str]:
    out = []
    for a, b in itertools.combinations(range(len(group)), 2):
        orbit = evaluate_orbit(f, group[a].center, group[a].period)
        if any(x == group[b].center for x in orbit):
            out.append(f"{name}[{a}] and {name}[{b}] lie on the same orbit")
    return out


def chart_orbit_from_json(data: dict, ctx: PadicContext) -> ChartOrbit:
    def num(v):
        if isinstance(v, dict):
            return PadicNumber.from_json(ctx, v)
        return ctx(to_fraction(v))

    return ChartOrbit(
        center=num(data["center"]),
        period=int(data["period"]),
        multiplier=num(data["multiplier"]),
        psi_product=num(data.get("psi_product", 1)),
        degree=int(data.get("degree", 1)),
        root=num(data["root"]) if data.get("root") is not None else None,
    )


def chart_data_from_json(data: dict, ctx: PadicContext) -> SubhyperbolicChartData:
    return SubhyperbolicChartData(
        ctx=ctx,
        infinite=[chart_orbit_from_json(d, ctx) for d in data.get("infinite", [])],
        exceptional=[chart_orbit_from_json(d, ctx) for d in data.get("exceptional", [])],
    )


def chart_data_to_json(data: SubhyperbolicChartData) -> dict:
    return {
        "infinite": [o.to_json() for o in data.infinite],
        "exceptional": [o.to_json() for o in data.exceptional],
    }
