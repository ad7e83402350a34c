"""Exact phase-space polynomial algebra with the Moyal star product.

Polynomials in the commuting symbols (p, q) stand in for operator-valued
expressions; the star product

    F * G = sum_k (i/2)^k / k! * F (d_q d_p - d_p d_q)^k G

(left derivatives on F, right on G) reproduces the operator product of
the corresponding symmetrically ordered operators, and conjugating the
coefficients represents the operator adjoint.  For polynomials the series
terminates, and every scalar it introduces is an integer multiple of a
power of 1/2, so coefficients are kept as exact rational complex numbers:
associativity, the canonical commutator q*p - p*q = i, and adjoint
compatibility all hold bit-exactly, leaving time integration as the only
numerical step in this module.

The flow of a metric symbol under a generator symbol H is

    dTheta/dt = i (Theta * H - conj(H) * Theta),

which for the quadratic generator p^2 + q^2 reduces identically to the
rotation field 2 (q dTheta/dp - p dTheta/dq): metrics are transported
along clockwise phase-space rotations at angular rate 2, hence with
period pi.  The cubic model adds i g q^3; its order-g metric closes on
polynomials of degree three, integrated and solved in closed form below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._integrate import solve_ode
from .errors import OutOfRange
from .metric_flow import SolverConfig

__all__ = [
    "PhasePolynomial",
    "P",
    "Q",
    "ONE",
    "moyal_product",
    "star_flow_rhs",
    "harmonic_transport_check",
    "cubic_static_first_order",
    "ANSATZ_BASIS",
    "ANSATZ_NAMES",
    "CoefficientTrajectory",
    "cubic_linear_switch_evolve",
    "linear_switch_closed_form",
]

_ZERO = Fraction(0)


def _to_pair(value):
    if isinstance(value, tuple):
        return value
    if isinstance(value, complex):
        return (Fraction(value.real), Fraction(value.imag))
    return (Fraction(value), _ZERO)


def _cadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


class PhasePolynomial:
    """Immutable polynomial in (p, q) with exact rational complex coefficients.

    ``terms`` maps exponent pairs ``(i, j)`` (p-power, q-power) to nonzero
    coefficients.  Accepts int, float, Fraction, or complex coefficient
    values; floats convert exactly (every float is a dyadic rational).
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, value in (terms or {}).items():
            i, j = int(key[0]), int(key[1])
            if i < 0 or j < 0:
                raise ValueError("exponents must be nonnegative")
            pair = _to_pair(value)
            if pair[0] or pair[1]:
                clean[(i, j)] = pair
        self._terms = clean

    # -- construction helpers -------------------------------------------
    @classmethod
    def monomial(cls, i, j, coeff=1):
        return cls({(i, j): coeff})

    @classmethod
    def _raw(cls, terms):
        poly = cls.__new__(cls)
        poly._terms = {k: v for k, v in terms.items() if v[0] or v[1]}
        return poly

    # -- inspection ------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((i + j for i, j in self._terms), default=0)

    def coefficient(self, i, j) -> complex:
        re, im = self._terms.get((i, j), (_ZERO, _ZERO))
        return complex(float(re), float(im))

    def coefficient_exact(self, i, j):
        return self._terms.get((i, j), (_ZERO, _ZERO))

    def terms(self):
        """Iterate ``((i, j), complex_coefficient)`` pairs, sorted."""
        for key in sorted(self._terms):
            yield key, self.coefficient(*key)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, PhasePolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if self.is_zero:
            return "PhasePolynomial(0)"
        bits = []
        for (i, j), c in self.terms():
            mono = "".join(
                s for s, e in (("p^%d" % i, i), ("q^%d" % j, j)) if e
            ) or "1"
            bits.append(f"({c:g})*{mono}")
        return "PhasePolynomial(" + " + ".join(bits) + ")"

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        terms = dict(self._terms)
        for key, val in other._terms.items():
            terms[key] = _cadd(terms.get(key, (_ZERO, _ZERO)), val)
        return PhasePolynomial._raw(terms)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return PhasePolynomial._raw(
            {k: (-v[0], -v[1]) for k, v in self._terms.items()}
        )

    def scale(self, value):
        pair = _to_pair(value)
        return PhasePolynomial._raw(
            {k: _cmul(v, pair) for k, v in self._terms.items()}
        )

    def times_i(self):
        return PhasePolynomial._raw(
            {k: (-v[1], v[0]) for k, v in self._terms.items()}
        )

    def conjugate(self):
        """Coefficient conjugation: the symbol of the operator adjoint."""
        return PhasePolynomial._raw(
            {k: (v[0], -v[1]) for k, v in self._terms.items()}
        )

    def pointwise_mul(self, other):
        """Ordinary commutative polynomial product."""
        terms = {}
        for (a, b), cf in self._terms.items():
            for (c, d), cg in other._terms.items():
                key = (a + c, b + d)
                terms[key] = _cadd(terms.get(key, (_ZERO, _ZERO)), _cmul(cf, cg))
        return PhasePolynomial._raw(terms)

    def diff_p(self):
        return PhasePolynomial._raw(
            {
                (i - 1, j): (v[0] * i, v[1] * i)
                for (i, j), v in self._terms.items()
                if i > 0
            }
        )

    def diff_q(self):
        return PhasePolynomial._raw(
            {
                (i, j - 1): (v[0] * j, v[1] * j)
                for (i, j), v in self._terms.items()
                if j > 0
            }
        )

    def substitute_linear(self, pp, pq, qp, qq):
        """Compose with p -> pp*p + pq*q, q -> qp*p + qq*q (exact pairs)."""
        new_p = PhasePolynomial({(1, 0): pp, (0, 1): pq})
        new_q = PhasePolynomial({(1, 0): qp, (0, 1): qq})
        # precompute powers up to needed degree
        max_i = max((i for i, _ in self._terms), default=0)
        max_j = max((j for _, j in self._terms), default=0)
        pow_p = [ONE]
        for _ in range(max_i):
            pow_p.append(pow_p[-1].pointwise_mul(new_p))
        pow_q = [ONE]
        for _ in range(max_j):
            pow_q.append(pow_q[-1].pointwise_mul(new_q))
        total = PhasePolynomial()
        for (i, j), v in self._terms.items():
            total = total + pow_p[i].pointwise_mul(pow_q[j]).scale(v)
        return total

    def __call__(self, p, q):
        """Numeric evaluation at scalar (p, q)."""
        return sum(
            self.coefficient(i, j) * p**i * q**j for (i, j) in self._terms
        )


ONE = PhasePolynomial.monomial(0, 0)
P = PhasePolynomial.monomial(1, 0)
Q = PhasePolynomial.monomial(0, 1)


def moyal_product(f: PhasePolynomial, g: PhasePolynomial) -> PhasePolynomial:
    """Star product; a finite sum for polynomials, evaluated exactly.

    Expanding the exponential bidifferential operator binomially,

        F * G = sum_{k,m} (i/2)^k (-1)^m / (m! (k-m)!)
                * (d_p^m d_q^(k-m) F) (d_p^(k-m) d_q^m G),

    truncating at ``k = min(deg F, deg G)``.  Each k-th order scalar is a
    Gaussian integer divided by 2^k, so the rational coefficient pairs
    stay exact.
    """
    kmax = min(f.degree, g.degree)
    # i^k cycles (1, i, -1, -i); attach (1/2)^k and the factorial split.
    result_terms = {}
    fd = {(0, 0): f}
    gd = {(0, 0): g}

    def deriv(cache, base, dp, dq):
        key = (dp, dq)
        if key not in cache:
            if dp > 0:
                cache[key] = deriv(cache, base, dp - 1, dq).diff_p()
            else:
                cache[key] = deriv(cache, base, 0, dq - 1).diff_q()
        return cache[key]

    total = PhasePolynomial()
    for k in range(kmax + 1):
        ik = (1, 0) if k % 4 == 0 else (0, 1) if k % 4 == 1 else (-1, 0) if k % 4 == 2 else (0, -1)
        half = Fraction(1, 2**k)
        for m in range(k + 1):
            scalar = Fraction((-1) ** m, math.factorial(m) * math.factorial(k - m))
            coeff = (ik[0] * half * scalar, ik[1] * half * scalar)
            left = deriv(fd, f, m, k - m)
            right = deriv(gd, g, k - m, m)
            if left.is_zero or right.is_zero:
                continue
            total = total + left.pointwise_mul(right).scale(coeff)
    return total


def star_flow_rhs(theta: PhasePolynomial, h: PhasePolynomial) -> PhasePolynomial:
    """Metric-flow field ``i (Theta * H - conj(H) * Theta)`` on symbols.

    For ``H = p^2 + q^2`` this equals ``2 (q dTheta/dp - p dTheta/dq)``
    identically, and real (Hermitian-symbol) metrics stay real.
    """
    return (moyal_product(theta, h) - moyal_product(h.conjugate(), theta)).times_i()


def harmonic_transport_check(theta0: PhasePolynomial, t) -> PhasePolynomial:
    """Exact flow of the quadratic-generator metric: rotation transport.

    Solves ``dTheta/dt = 2 (q d_p - p d_q) Theta`` by composing with the
    rotation ``p -> p cos 2t + q sin 2t, q -> -p sin 2t + q cos 2t``.
    The angle is reduced modulo the flow period pi first, so transport by
    any whole multiple of pi is the identity bit-exactly.
    """
    reduced = math.remainder(float(t), math.pi)
    if reduced == 0.0:
        return theta0
    c = math.cos(2.0 * reduced)
    s = math.sin(2.0 * reduced)
    return theta0.substitute_linear(
        (Fraction(c), _ZERO),
        (Fraction(s), _ZERO),
        (Fraction(-s), _ZERO),
        (Fraction(c), _ZERO),
    )


def cubic_static_first_order(c=0.0, d=0.0) -> PhasePolynomial:
    """First-order static metric symbol of the cubic model.

    ``c + d (p^2 + q^2) + p q^2 + (2/3) p^3``; the first two terms commute
    with the quadratic generator and parametrize the metric ambiguity,
    while the cubic part cancels the flow source exactly at first order.
    """
    return PhasePolynomial(
        {
            (0, 0): c,
            (2, 0): d,
            (0, 2): d,
            (1, 2): 1,
            (3, 0): Fraction(2, 3),
        }
    )


#: Exponent pairs of the order-3 metric ansatz, in canonical order.
ANSATZ_BASIS = (
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
)

ANSATZ_NAMES = ("1", "p", "q", "p2", "pq", "q2", "p3", "p2q", "pq2", "q3")

_H0 = PhasePolynomial({(2, 0): 1, (0, 2): 1})
_Q3_INDEX = ANSATZ_BASIS.index((0, 3))


def _ansatz_generator_matrix() -> np.ndarray:
    """Flow generator of the quadratic part projected on the ansatz.

    Built by pushing every basis monomial through the star flow; the
    result must close on the ansatz (degree is preserved), which is
    asserted here rather than assumed.
    """
    index = {key: n for n, key in enumerate(ANSATZ_BASIS)}
    gen = np.zeros((len(ANSATZ_BASIS), len(ANSATZ_BASIS)))
    for col, key in enumerate(ANSATZ_BASIS):
        out = star_flow_rhs(PhasePolynomial.monomial(*key), _H0)
        for mono, coeff in out.terms():
            if mono not in index:
                raise AssertionError(f"ansatz not closed: produced {mono}")
            if abs(coeff.imag) > 0:
                raise AssertionError("generator must be real on real symbols")
            gen[index[mono], col] = coeff.real
    return gen


@dataclass(frozen=True)
class CoefficientTrajectory:
    """Per-time coefficient vectors of the order-3 metric ansatz.

    ``values[k]`` holds the coefficients of the full metric symbol on
    ``ANSATZ_BASIS`` at ``times[k]`` (constant term included); valid
    metrics keep every coefficient real.
    """

    times: np.ndarray
    values: np.ndarray
    g: float
    duration: float

    def coefficient(self, name: str) -> np.ndarray:
        return self.values[:, ANSATZ_NAMES.index(name)]


def cubic_linear_switch_evolve(
    g, duration, t_eval=None, config: SolverConfig | None = None
) -> CoefficientTrajectory:
    """Integrate the order-g metric of the cubic model under a linear switch.

    The generator is ``p^2 + q^2 + i (t g / duration) q^3`` on
    ``[0, duration]`` with the metric symbol starting at 1.  At first
    order in g the flow closes on the degree-3 ansatz: the quadratic part
    contributes the rotation generator and the switched cubic part feeds
    the q^3 coefficient with strength ``-2 t g / duration``, a linear
    10-dimensional system integrated here adaptively.
    """
    if duration <= 0.0:
        raise OutOfRange("switch duration must be positive")
    cfg = config or SolverConfig(rtol=1e-12, atol=1e-14)
    gen = _ansatz_generator_matrix()
    rate = 2.0 * float(g) / float(duration)

    def rhs(t, y):
        out = gen @ y
        out[_Q3_INDEX] -= rate * t
        return out

    if t_eval is None:
        n = max(513, min(4097, int(64 * duration / math.pi) | 1))
        t_eval = np.linspace(0.0, duration, n)
    y0 = np.zeros(len(ANSATZ_BASIS))
    y0[0] = 1.0
    sol = solve_ode(
        rhs,
        0.0,
        float(duration),
        y0,
        rtol=cfg.rtol,
        atol=cfg.atol,
        t_eval=t_eval,
    )
    return CoefficientTrajectory(
        times=sol.times,
        values=np.array(sol.states),
        g=float(g),
        duration=float(duration),
    )


def linear_switch_closed_form(g, duration, t, convention="flow") -> np.ndarray:
    """Closed-form ansatz coefficients for the linearly switched cubic model.

    Returns the 10-vector on ``ANSATZ_BASIS`` at time ``t`` in
    ``[0, duration]``.  Only the constant term and the four cubic
    coefficients are nonzero at first order in g; the cubic block is

        p^3  : (g/T) (48 t - 27 sin 2t + sin 6t) / 72
        p^2 q: -(g/T) (2/3) (2 + cos 2t) sin^4 t
        p q^2: (g/T) (t - (3/8) sin 2t - (1/24) sin 6t)
        q^3  : -(g/T) (15 + 2 cos 2t + cos 4t) sin^2 t / 18

    (convention ``"flow"``), the solution of the flow equation exactly as
    integrated by :func:`cubic_linear_switch_evolve`.  Convention
    ``"half-rate"`` evaluates the same family for a flow normalized with
    an extra factor 1/2 (equivalently, coefficients ``flow(t) =
    half_rate(2t) / 2``), kept for comparison with texts using that
    normalization of the star-product flow.  Both conventions share the
    anchor values: zero at t=0, a p^3 coefficient of ``(g/T) 2 pi / 3``
    at t = pi, and the same slow-switch limit, where the oscillatory
    p^2 q and q^3 terms die off like 1/T and the surviving terms
    reproduce the first-order static metric with zero free constants.
    """
    if convention not in ("flow", "half-rate"):
        raise ValueError(f"unknown convention {convention!r}")
    t = float(t)
    duration = float(duration)
    if duration <= 0.0:
        raise OutOfRange("switch duration must be positive")
    if t < -1e-12 or t > duration * (1.0 + 1e-12):
        raise OutOfRange(f"t={t:g} outside the switching window [0, {duration:g}]")

    if convention == "flow":
        tau = 2.0 * t
        amp = 0.5
    else:
        tau = t
        amp = 1.0
    scale = amp * float(g) / duration
    p3 = scale * (24.0 * tau - 27.0 * math.sin(tau) + math.sin(3.0 * tau)) / 36.0
    p2q = -scale * (4.0 / 3.0) * (2.0 + math.cos(tau)) * math.sin(0.5 * tau) ** 4
    pq2 = scale * (tau - 0.75 * math.sin(tau) - math.sin(3.0 * tau) / 12.0)
    q3 = -scale * (15.0 + 2.0 * math.cos(tau) + math.cos(2.0 * tau)) * math.sin(
        0.5 * tau
    ) ** 2 / 9.0

    out = np.zeros(len(ANSATZ_BASIS))
    out[0] = 1.0
    out[ANSATZ_BASIS.index((3, 0))] = p3
    out[ANSATZ_BASIS.index((2, 1))] = p2q
    out[ANSATZ_BASIS.index((1, 2))] = pq2
    out[ANSATZ_BASIS.index((0, 3))] = q3
    return out
