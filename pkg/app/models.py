import cmath
import math
import re
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Annotated, Any, Literal

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, field_validator, model_validator
from pydantic_core import core_schema
from typing_extensions import Self

from app.core.errors import DepthTooLarge, ItineraryParseError

ExactRational = Annotated[Fraction, PlainSerializer(str, return_type=str)]
ComplexPoint = Annotated[
    complex, PlainSerializer(lambda z: [z.real, z.imag], return_type=list[float])
]


# Exact circle values


@total_ordering
@dataclass(frozen=True, slots=True, eq=True)
class Angle:
    """A point of R/Z stored as a reduced fraction in [0, 1)."""

    numerator: int
    denominator: int = 1

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise ValueError(f"angle denominator must be positive, got {self.denominator}")
        num = self.numerator % self.denominator
        g = math.gcd(num, self.denominator)
        object.__setattr__(self, "numerator", num // g)
        object.__setattr__(self, "denominator", self.denominator // g)

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> "Angle":
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @classmethod
    def parse(cls, text: str) -> "Angle":
        try:
            return cls.from_fraction(Fraction(text.strip()))
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not an angle: {text!r}") from e

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def double(self) -> "Angle":
        return Angle(2 * self.numerator, self.denominator)

    def __add__(self, other: "Angle | Fraction | int") -> "Angle":
        other = other.fraction if isinstance(other, Angle) else Fraction(other)
        return Angle.from_fraction(self.fraction + other)

    def __lt__(self, other: "Angle") -> bool:
        return self.numerator * other.denominator < other.numerator * self.denominator

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    @classmethod
    def __get_pydantic_core_schema__(cls, source: Any, handler: Any) -> core_schema.CoreSchema:
        return core_schema.no_info_plain_validator_function(
            cls._coerce, serialization=core_schema.to_string_ser_schema()
        )

    @classmethod
    def _coerce(cls, value: Any) -> "Angle":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls.from_fraction(Fraction(value))


@dataclass(frozen=True, slots=True)
class Arc:
    """Counterclockwise arc from start to end."""

    start: Angle
    end: Angle
    closed: tuple[bool, bool] = (False, False)

    @property
    def length(self) -> Fraction:
        return (self.end.fraction - self.start.fraction) % 1

    def contains(self, theta: Angle) -> bool:
        offset = (theta.fraction - self.start.fraction) % 1
        if offset == 0:
            return self.closed[0] or (self.length == 0 and self.closed[1])
        if offset < self.length:
            return True
        return offset == self.length and self.closed[1]

    @classmethod
    def __get_pydantic_core_schema__(cls, source: Any, handler: Any) -> core_schema.CoreSchema:
        return core_schema.is_instance_schema(
            cls,
            serialization=core_schema.plain_serializer_function_ser_schema(
                lambda arc: [str(arc.start), str(arc.end)]
            ),
        )


@dataclass(frozen=True, slots=True)
class CriticalLeaf:
    """Chord from alpha to beta; a true critical leaf is a diameter."""

    alpha: Angle
    beta: Angle

    def __post_init__(self) -> None:
        if not (0 < self.alpha.fraction < Fraction(1, 2)):
            raise ValueError(f"leaf alpha must lie in (0, 1/2), got {self.alpha}")
        if not self.alpha < self.beta:
            raise ValueError(f"leaf beta must follow alpha, got {self.alpha}, {self.beta}")

    @classmethod
    def diameter(cls, alpha: Angle) -> "CriticalLeaf":
        return cls(alpha, alpha + Fraction(1, 2))

    @property
    def span(self) -> Fraction:
        return self.beta.fraction - self.alpha.fraction

    @property
    def is_diameter(self) -> bool:
        return self.span == Fraction(1, 2)

    @property
    def siegel_arc(self) -> Arc:
        return Arc(self.alpha, self.beta, (True, True))

    @classmethod
    def __get_pydantic_core_schema__(cls, source: Any, handler: Any) -> core_schema.CoreSchema:
        return core_schema.is_instance_schema(
            cls,
            serialization=core_schema.plain_serializer_function_ser_schema(
                lambda leaf: {"alpha": str(leaf.alpha), "beta": str(leaf.beta)}
            ),
        )


# Itineraries

_ITINERARY_RE = re.compile(r"^(?P<head>[01]*?)(?:(?P<ones>1\*)|\((?P<period>[01]+)\)\^)$")


def _minimal_period(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True, slots=True)
class Itinerary:
    """Eventually periodic binary sequence head·(period)^inf in canonical form.

    The all-ones tail 1_inf is the period "1". Canonicalization reduces the
    period to its minimal word and rotates trailing head symbols into it, so
    two values are equal exactly when the infinite sequences are.
    """

    head: str
    period: str = "1"

    def __post_init__(self) -> None:
        if not self.period:
            raise ItineraryParseError("itinerary period must be nonempty")
        if set(self.head + self.period) - {"0", "1"}:
            raise ItineraryParseError(f"itinerary symbols must be 0/1: {self.head!r}, {self.period!r}")
        head, period = self.head, _minimal_period(self.period)
        while head and head[-1] == period[-1]:
            head, period = head[:-1], period[-1] + period[:-1]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "period", period)

    @classmethod
    def pullback(cls, word: str) -> "Itinerary":
        return cls(word, "1")

    @classmethod
    def periodic(cls, word: str, head: str = "") -> "Itinerary":
        return cls(head, word)

    @classmethod
    def parse(cls, text: str) -> "Itinerary":
        cleaned = re.sub(r"[\s·.]", "", text)
        match = _ITINERARY_RE.match(cleaned)
        if match is None:
            raise ItineraryParseError(f"cannot parse itinerary {text!r}")
        if match.group("ones"):
            return cls(match.group("head"), "1")
        return cls(match.group("head"), match.group("period"))

    @property
    def is_pullback(self) -> bool:
        return self.period == "1"

    @property
    def order(self) -> int:
        return len(self.head)

    def symbol(self, i: int) -> str:
        if i < len(self.head):
            return self.head[i]
        return self.period[(i - len(self.head)) % len(self.period)]

    def prefix(self, n: int) -> str:
        return "".join(self.symbol(i) for i in range(n))

    def zero_positions(self) -> Iterator[int]:
        for i, s in enumerate(self.head):
            if s == "0":
                yield i
        offsets = [i for i, s in enumerate(self.period) if s == "0"]
        if not offsets:
            return
        base = len(self.head)
        while True:
            for i in offsets:
                yield base + i
            base += len(self.period)

    def __str__(self) -> str:
        if self.is_pullback:
            return f"{self.head}1*"
        return f"{self.head}({self.period})^"

    @classmethod
    def __get_pydantic_core_schema__(cls, source: Any, handler: Any) -> core_schema.CoreSchema:
        return core_schema.no_info_plain_validator_function(
            cls._coerce, serialization=core_schema.to_string_ser_schema()
        )

    @classmethod
    def _coerce(cls, value: Any) -> "Itinerary":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        raise ItineraryParseError(f"cannot build an itinerary from {value!r}")


# itinerary of the pullback Δ and of Δ′
DELTA = Itinerary("", "1")
DELTA_PRIME = Itinerary("0", "1")


# Circle records


class RotationSetApprox(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    q: int
    orbit: list[Angle]
    major_gap: Arc

    @property
    def leaf_estimate(self) -> CriticalLeaf:
        return CriticalLeaf(alpha=self.major_gap.end, beta=self.major_gap.start)


class LeafEstimate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: int
    q: int
    leaf: CriticalLeaf
    gap_length: ExactRational
    error: ExactRational | None = None


# Symbolic records


class PullbackTree(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    nodes: list[Itinerary]
    edges: list[tuple[int, int]]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(str(node) for node in self.nodes)
        graph.add_edges_from((str(self.nodes[a]), str(self.nodes[b])) for a, b in self.edges)
        return graph

    def to_graph_file(self, name: str | None = None) -> str:
        lines = [f"graph {name or f'A{self.n}'} {{"]
        lines += [f'  "{self.nodes[a]}" -- "{self.nodes[b]}"' for a, b in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def check_invariants(self) -> bool:
        """2^n nodes, connected and acyclic, no three pairwise intersecting pullbacks."""
        graph = self.to_networkx()
        if graph.number_of_nodes() != 2**self.n or graph.number_of_edges() != 2**self.n - 1:
            return False
        return nx.is_tree(graph) and sum(nx.triangles(graph).values()) == 0


class PullbackString(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: Itinerary
    elements: list[Itinerary]

    def __len__(self) -> int:
        return len(self.elements)

    def element(self, j: int) -> Itinerary:
        """The j-th pullback counted from the disk, 1-based."""
        return self.elements[j - 1]


class ConstructionPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    u_word: str
    v_word: str
    k: int
    l: int  # noqa: E741
    w: int
    q: int
    m: int
    prefix: list[Itinerary] = Field(serialization_alias="F")
    last_common: Itinerary = Field(serialization_alias="L")
    hat_f_u: list[Itinerary] = Field(serialization_alias="hatF_u")
    f_u: list[Itinerary] = Field(serialization_alias="F_u")
    hat_f_v: list[Itinerary] = Field(serialization_alias="hatF_v")
    f_v: list[Itinerary] = Field(serialization_alias="F_v")
    n: int
    assumption_flag: bool
    within_order: bool


# Numerical records


class ContinuedFraction(BaseModel):
    """Finite stored prefix [a_1, a_2, ...] of rho = 1/(a_1 + 1/(a_2 + ...))."""

    model_config = ConfigDict(frozen=True)

    partial_quotients: list[int]

    @field_validator("partial_quotients")
    @classmethod
    def _positive(cls, v: list[int]) -> list[int]:
        if not v or any(a < 1 for a in v):
            raise ValueError("partial quotients must be a nonempty list of positive integers")
        return v

    @classmethod
    def parse(cls, text: str) -> "ContinuedFraction":
        return cls(partial_quotients=[int(a) for a in text.replace(" ", "").split(",") if a])

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ContinuedFraction":
        if not 0 < value < 1:
            raise ValueError(f"rotation number must lie in (0, 1), got {value}")
        quotients = []
        while value:
            value = 1 / value
            a = math.floor(value)
            quotients.append(a)
            value -= a
        return cls(partial_quotients=quotients)

    @classmethod
    def from_float(cls, x: float, depth: int = 32) -> "ContinuedFraction":
        if not 0 < x < 1:
            raise ValueError(f"rotation number must lie in (0, 1), got {x}")
        quotients = []
        for _ in range(depth):
            x = 1 / x
            a = math.floor(x)
            quotients.append(a)
            x -= a
            if x < 1e-12:
                break
        return cls(partial_quotients=quotients)

    def convergents(self, depth: int) -> list[Fraction]:
        """First `depth` convergents p_n/q_n, from the recursion x_n = a_n x_{n-1} + x_{n-2}."""
        if depth > len(self.partial_quotients):
            raise DepthTooLarge(
                f"depth {depth} exceeds the {len(self.partial_quotients)} stored partial quotients"
            )
        p_prev, p = 1, 0
        q_prev, q = 0, 1
        out = []
        for a in self.partial_quotients[:depth]:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
            out.append(Fraction(p, q))
        return out

    def convergent(self, depth: int) -> Fraction:
        return self.convergents(depth)[-1]

    def bounded_type(self, bound: int) -> bool:
        """All stored partial quotients are below `bound` (relative to the stored prefix)."""
        return all(a < bound for a in self.partial_quotients)

    def in_s_tilde(self, floor: int) -> bool:
        """All stored partial quotients are at least `floor` (relative to the stored prefix)."""
        return all(a >= floor for a in self.partial_quotients)

    def value(self) -> float:
        x = 0.0
        for a in reversed(self.partial_quotients):
            x = 1 / (a + x)
        return x

    def __len__(self) -> int:
        return len(self.partial_quotients)

    def __str__(self) -> str:
        return ",".join(str(a) for a in self.partial_quotients)


class QuadraticMap(BaseModel):
    """P(z) = lambda z + z^2 with lambda = exp(2 pi i rotation)."""

    model_config = ConfigDict(frozen=True)

    rotation: float
    exact: Angle | None = None
    label: str = ""

    @classmethod
    def from_angle(cls, alpha: Angle) -> "QuadraticMap":
        return cls(rotation=alpha.value, exact=alpha, label=str(alpha))

    @classmethod
    def from_cf(cls, cf: ContinuedFraction) -> "QuadraticMap":
        return cls(rotation=cf.value(), label=f"[{cf}]")

    @classmethod
    def from_float(cls, rotation: float) -> "QuadraticMap":
        return cls(rotation=rotation, label=repr(rotation))

    @cached_property
    def lam(self) -> complex:
        return cmath.exp(2j * math.pi * self.rotation)

    @property
    def critical_point(self) -> complex:
        return -self.lam / 2

    @property
    def fixed_points(self) -> tuple[complex, complex]:
        return (0j, 1 - self.lam)

    def derivative(self, z: complex) -> complex:
        return 2 * z + self.lam

    def __call__(self, z: complex) -> complex:
        return self.lam * z + z * z

    def iterate(self, z: complex, n: int) -> complex:
        for _ in range(n):
            z = self.lam * z + z * z
        return z


class RayTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    angle: Angle
    depth: int
    steps_per_level: int
    radius: float
    points: list[ComplexPoint]
    landing_estimate: ComplexPoint | None = None
    landing_residual: float | None = None
    period: int | None = None

    def level(self, k: int) -> complex:
        return self.points[k * self.steps_per_level]


class OrbitCloud(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: list[ComplexPoint]
    origin: Literal["critical orbit", "preimage cloud", "involution image"]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.complex128)


class PeriodicPointSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    period: int
    points: list[ComplexPoint]
    multipliers: list[ComplexPoint]
    multiplicities: list[int]
    expected: int
    complete: bool

    @model_validator(mode="after")
    def _check_root_count(self) -> Self:
        if not len(self.points) == len(self.multipliers) == len(self.multiplicities):
            raise ValueError("points, multipliers and multiplicities must align")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")
        if self.found > self.expected:
            raise ValueError(f"{self.found} roots exceed the degree {self.expected}")
        return self

    @property
    def found(self) -> int:
        """Roots counted with multiplicity."""
        return sum(self.multiplicities)


class Image(BaseModel):
    """Grayscale raster, row 0 at the top, viewport given by its center and horizontal span."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    width: int
    height: int
    center: ComplexPoint
    span: float
    pixels: np.ndarray = Field(exclude=True)

    @property
    def pixel_size(self) -> float:
        return self.span / self.width if self.width else 0.0

    def plane_to_pixel(self, z: complex) -> tuple[float, float]:
        x = (z.real - self.center.real) / self.pixel_size + self.width / 2
        y = (self.center.imag - z.imag) / self.pixel_size + self.height / 2
        return x, y


class Report(BaseModel):
    schema_version: str
    project: str
    command: list[str]
    threads: int
    payload: dict[str, Any]
    timing: float | None = None


class ErrorReport(BaseModel):
    error: str
    detail: str
    level: int | None = None


# Figure records


class RaySummary(BaseModel):
    angle: Angle
    period: int | None
    landing: ComplexPoint | None
    residual: float | None
    distance_to_critical: float | None

    @classmethod
    def from_trace(cls, trace: RayTrace, critical_point: complex) -> "RaySummary":
        landing = trace.landing_estimate
        return cls(
            angle=trace.angle,
            period=trace.period,
            landing=landing,
            residual=trace.landing_residual,
            distance_to_critical=abs(landing - critical_point) if landing is not None else None,
        )


class Figure1Report(BaseModel):
    map_label: str
    rotation: float
    critical_point: ComplexPoint
    leaf: LeafEstimate
    image: Image
    rays: list[RaySummary]


class Figure3Side(BaseModel):
    word: str
    angles: list[Angle]
    rays: list[RaySummary]
    note: str | None = None


class Figure3Report(BaseModel):
    label: Literal["Siegel-side analogue"] = "Siegel-side analogue"
    plan: ConstructionPlan
    leaf: LeafEstimate
    u: Figure3Side
    v: Figure3Side
