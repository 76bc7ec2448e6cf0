"""Named surface families and their printed closed-form derivative tables.

Each :class:`SurfaceSpec` is an expression written with the dispatching
functions of :mod:`umbilics.jets`, so the same callable evaluates plain
numbers, numpy arrays, mpmath scalars and Taylor polynomials.  The closed forms
further down are kept as independent oracles for the automatic derivatives.
"""

from __future__ import annotations

import ast
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import jets
from .errors import DomainError, ParseError
from .jets import Jet, Taylor, is_extended

__all__ = [
    "Domain",
    "FSpec",
    "TANH",
    "ONE_MINUS_EXP",
    "SurfaceSpec",
    "bates",
    "ghomi_howard",
    "rez3",
    "rez2zbar",
    "paraboloid",
    "fm",
    "gm",
    "lambda_m",
    "make_dual",
    "expression",
    "parse_surface",
    "closed_form_polar_jet_g",
    "closed_form_polar_jet_lambda",
    "closed_form_delta_g",
    "closed_form_zeta",
    "closed_form_lambda_gradient",
]


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Domain:
    """Where a field is defined.

    ``plane``: everywhere; ``exterior``: r > radius; ``punctured``: r > 0;
    ``punctured-disk``: 0 < r < radius.
    """

    kind: str = "plane"
    radius: float = 0.0

    def contains(self, x, y):
        if self.kind == "plane":
            return True
        if is_extended(x) or is_extended(y):
            r = mpmath.sqrt(x * x + y * y)
        else:
            r = np.hypot(x, y)
        if self.kind == "exterior":
            return r > self.radius
        if self.kind == "punctured":
            return r > 0
        if self.kind == "punctured-disk":
            return (r > 0) & (r < self.radius)
        raise ValueError(f"unknown domain kind {self.kind!r}")

    def describe(self) -> str:
        return {
            "plane": "all-plane",
            "exterior": f"exterior r > {self.radius:g}",
            "punctured": "punctured plane r > 0",
            "punctured-disk": f"punctured disk 0 < r < {self.radius:g}",
        }[self.kind]


PLANE = Domain()


# --------------------------------------------------------------------------
# bounded odd profile functions F


def _quintic_glue(M: float) -> tuple[float, float, float]:
    # odd c1 x + c3 x^3 + c5 x^5 matching 1 - exp(-x) to second order at x = M
    e = math.exp(-M)
    A = np.array([[M, M ** 3, M ** 5], [1.0, 3 * M ** 2, 5 * M ** 4], [0.0, 6 * M, 20 * M ** 3]])
    c = np.linalg.solve(A, np.array([1 - e, e, -e]))
    return float(c[0]), float(c[1]), float(c[2])


@dataclass(frozen=True)
class FSpec:
    """Bounded odd function with F' > 0 and x F''(x) < 0 (x != 0).

    ``tanh`` is the analytic choice.  ``one-minus-exp`` equals
    ``sign(x) (1 - exp(-|x|))`` for ``|x| >= M`` and an odd quintic inside,
    glued to second order; it is only C^2, which is enough to show that the
    index computations do not depend on F being tanh.
    """

    kind: str = "tanh"
    M: float = 3.0

    def __post_init__(self):
        if self.kind not in ("tanh", "one-minus-exp"):
            raise ValueError(f"unknown F kind {self.kind!r}")

    @property
    def glue(self) -> tuple[float, float, float]:
        return _quintic_glue(self.M)

    def derivs(self, x, n: int = 3) -> list:
        """[F(x), F'(x), F''(x), F'''(x)][: n + 1]."""
        if self.kind == "tanh":
            return jets._tanh_d(x, 3)[: n + 1]
        c1, c3, c5 = self.glue
        if is_extended(x):
            c1, c3, c5 = mpmath.mpf(c1), mpmath.mpf(c3), mpmath.mpf(c5)
            if abs(x) >= self.M:
                e = mpmath.exp(-abs(x))
                sg = 1 if x > 0 else -1
                return [sg * (1 - e), e, -sg * e, e][: n + 1]
            return [
                c1 * x + c3 * x ** 3 + c5 * x ** 5,
                c1 + 3 * c3 * x ** 2 + 5 * c5 * x ** 4,
                6 * c3 * x + 20 * c5 * x ** 3,
                6 * c3 + 60 * c5 * x ** 2,
            ][: n + 1]
        x = np.asarray(x, dtype=float)
        outside = np.abs(x) >= self.M
        e = np.exp(-np.abs(x))
        sg = np.sign(x)
        tail = [sg * (1 - e), e, -sg * e, e]
        poly = [
            c1 * x + c3 * x ** 3 + c5 * x ** 5,
            c1 + 3 * c3 * x ** 2 + 5 * c5 * x ** 4,
            6 * c3 * x + 20 * c5 * x ** 3,
            6 * c3 + 60 * c5 * x ** 2,
        ]
        return [np.where(outside, t, p) for t, p in zip(tail, poly)][: n + 1]

    def __call__(self, x):
        if isinstance(x, Taylor):
            return x._compose(self.derivs(x.c[0], x.order))
        return self.derivs(x, 0)[0]

    def label(self) -> str:
        return "tanh" if self.kind == "tanh" else f"one-minus-exp(M={self.M:g})"


TANH = FSpec("tanh")
ONE_MINUS_EXP = FSpec("one-minus-exp", 3.0)


# --------------------------------------------------------------------------
# surface specs


@dataclass(frozen=True, eq=False)
class SurfaceSpec:
    """A named scalar field z = f(x, y), evaluable on Taylor polynomials."""

    kind: str
    label: str
    domain: Domain = PLANE
    params: dict = field(default_factory=dict)
    cartesian: Callable | None = None
    polar: Callable | None = None
    probe_angles: Callable[[float], Sequence[float]] | None = None
    of: "SurfaceSpec | None" = None

    def param(self, name: str, default=None):
        return self.params.get(name, default)

    def evaluate_cartesian(self, x, y):
        if self.cartesian is not None:
            return self.cartesian(x, y)
        return self.polar(jets.sqrt(x * x + y * y), jets.atan2(y, x))

    def evaluate_polar(self, r, theta):
        if self.polar is not None:
            return self.polar(r, theta)
        return self.cartesian(r * jets.cos(theta), r * jets.sin(theta))

    def __call__(self, x, y):
        self.check_domain(x, y)
        return self.evaluate_cartesian(x, y)

    def check_domain(self, x, y) -> None:
        inside = self.domain.contains(x, y)
        if not np.all(inside):
            raise DomainError(f"{self.label}: point outside {self.domain.describe()}")

    def __repr__(self):
        return f"SurfaceSpec({self.label})"


def bates() -> SurfaceSpec:
    def f(x, y):
        return 2 + x * y / (jets.sqrt(1 + x * x) * jets.sqrt(1 + y * y))

    def probe(r):
        return [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]

    return SurfaceSpec("Bates", "bates", cartesian=f, probe_angles=probe)


def ghomi_howard(lam: float = 1.0) -> SurfaceSpec:
    if lam <= 0:
        raise ValueError("Ghomi-Howard requires lam > 0")

    def f(x, y):
        w = x + y * y
        return 1 + lam * (1 + w) / jets.sqrt(1 + w * w)

    def probe(r):
        # the two curves where d1 vanishes: y = 0 and x = -y^2
        y2 = (-1 + math.sqrt(1 + 4 * r * r)) / 2
        y = math.sqrt(y2)
        return [0.0, math.pi, math.atan2(y, -y2) % (2 * math.pi), math.atan2(-y, -y2) % (2 * math.pi)]

    return SurfaceSpec("GhomiHoward", f"gh:lam={lam:g}", params={"lam": lam}, cartesian=f, probe_angles=probe)


def rez3() -> SurfaceSpec:
    return SurfaceSpec(
        "ReZ3",
        "rez3",
        cartesian=lambda x, y: x ** 3 - 3 * x * y ** 2,
        polar=lambda r, t: r ** 3 * jets.cos(3 * t),
    )


def rez2zbar() -> SurfaceSpec:
    return SurfaceSpec(
        "ReZ2Zbar",
        "rez2zbar",
        cartesian=lambda x, y: x ** 3 + x * y ** 2,
        polar=lambda r, t: r ** 3 * jets.cos(t),
    )


def paraboloid() -> SurfaceSpec:
    return SurfaceSpec(
        "Paraboloid",
        "paraboloid",
        cartesian=lambda x, y: (x * x + y * y) / 2,
        polar=lambda r, t: r * r / 2,
    )


def _check_a(a: float, strict_quarter: bool) -> None:
    if not 0 < a < 1:
        raise ValueError("exponent a must lie in (0, 1)")
    if strict_quarter and a >= 0.25:
        warnings.warn(f"a = {a} >= 1/4: the C^2 argument for the inversion needs a < 1/4", stacklevel=3)


def gm(m: int, a: float, F: FSpec = TANH, offset: float = 1.0, R: float = 1.0) -> SurfaceSpec:
    """g_m(r, theta) = offset + F(r^a cos(m theta)) on r > R."""
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    m = int(m)
    _check_a(a, strict_quarter=True)

    def f(r, t):
        return offset + F(r ** a * jets.cos(m * t))

    def probe(r):
        return [k * math.pi / m for k in range(2 * m)]

    kind = "Fm" if F.kind == "tanh" else "Gm"
    name = "fm" if F.kind == "tanh" else "gm"
    label = f"{name}:m={m},a={a:g}"
    if F.kind != "tanh":
        label += ",F=exp"
    if offset != 1.0:
        label += f",offset={offset:g}"
    return SurfaceSpec(
        kind,
        label,
        domain=Domain("exterior", R),
        params={"m": m, "a": a, "F": F, "offset": offset, "R": R},
        polar=f,
        probe_angles=probe,
    )


def fm(m: int, a: float, offset: float = 1.0, R: float = 1.0) -> SurfaceSpec:
    """f_m = offset + tanh(r^a cos(m theta))."""
    return gm(m, a, TANH, offset=offset, R=R)


def lambda_m(m: int, a: float, F: FSpec = TANH) -> SurfaceSpec:
    """Lambda_m = r^2 F(r^-a cos(m theta)) on the punctured plane."""
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    m = int(m)
    _check_a(a, strict_quarter=False)

    def f(r, t):
        return r * r * F(r ** (-a) * jets.cos(m * t))

    label = f"lambda:m={m},a={a:g}" + ("" if F.kind == "tanh" else ",F=exp")
    return SurfaceSpec(
        "LambdaM",
        label,
        domain=Domain("punctured"),
        params={"m": m, "a": a, "F": F},
        polar=f,
        probe_angles=lambda r: [k * math.pi / m for k in range(2 * m)],
    )


def make_dual(f: SurfaceSpec) -> SurfaceSpec:
    """g(u, v) = (u^2 + v^2) f(u/(u^2+v^2), v/(u^2+v^2))."""

    def cart(u, v):
        q = u * u + v * v
        return q * f.evaluate_cartesian(u / q, v / q)

    def pol(rho, t):
        return rho * rho * f.evaluate_polar(1 / rho, t)

    if f.domain.kind == "exterior" and f.domain.radius > 0:
        dom = Domain("punctured-disk", 1.0 / f.domain.radius)
    elif f.domain.kind == "punctured-disk":
        dom = Domain("exterior", 1.0 / f.domain.radius)
    else:
        dom = Domain("punctured")
    probe = None
    if f.probe_angles is not None:
        probe = lambda rho: f.probe_angles(1.0 / rho)  # the inversion keeps theta
    return SurfaceSpec(
        "Dual",
        f"dual({f.label})",
        domain=dom,
        params={"of": f.label, **{k: v for k, v in f.params.items() if k in ("m", "a", "F")}},
        cartesian=cart if f.polar is None else None,
        polar=pol if f.polar is not None else None,
        probe_angles=probe,
        of=f,
    )


# --------------------------------------------------------------------------
# expression surfaces


_FUNCS: dict[str, Callable] = {
    "tanh": jets.tanh,
    "exp": jets.exp,
    "sqrt": jets.sqrt,
    "sin": jets.sin,
    "cos": jets.cos,
    "log": jets.log,
    "atan": jets.atan,
    "sech2": jets.sech2,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


def _compile(node: ast.AST) -> Callable[[dict], object]:
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        v = node.value
        return lambda env: v
    if isinstance(node, ast.Name):
        name = node.id
        if name in _CONSTS:
            v = _CONSTS[name]
            return lambda env: v
        if name in ("x", "y", "r", "theta"):
            return lambda env: env[name]
        raise ParseError(f"unknown name {name!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        lhs, rhs = _compile(node.left), _compile(node.right)
        return lambda env: op(lhs(env), rhs(env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        arg = _compile(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda env: -arg(env)
        return arg
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        if node.func.id not in _FUNCS or len(node.args) != 1:
            raise ParseError(f"unsupported function {node.func.id!r}")
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0])
        return lambda env: fn(arg(env))
    raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}")


def expression(text: str, domain: Domain = PLANE) -> SurfaceSpec:
    """Surface from an infix expression in x, y or r, theta (``^`` means power)."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    body = _compile(tree)
    names = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}
    polar_vars = bool(names & {"r", "theta"})

    def cart(x, y):
        env = {"x": x, "y": y}
        if polar_vars:
            env["r"] = jets.sqrt(x * x + y * y)
            env["theta"] = jets.atan2(y, x)
        return body(env)

    def pol(r, t):
        return body({"r": r, "theta": t, "x": r * jets.cos(t), "y": r * jets.sin(t)})

    return SurfaceSpec(
        "Expression",
        f"expr:{text}",
        domain=domain,
        params={"text": text},
        cartesian=None if polar_vars else cart,
        polar=pol if polar_vars else None,
    )


def _parse_params(text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise ParseError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_surface(text: str) -> SurfaceSpec:
    """Parse the CLI surface grammar.

    ``bates``, ``rez3``, ``rez2zbar``, ``paraboloid``, ``gh[:lam=L]``,
    ``fm:m=M,a=A[,offset=C][,R=R]``, ``gm:m=M,a=A,F=tanh|exp``,
    ``lambda:m=M,a=A[,F=...]``, ``dual:<surface>``, ``expr:<expression>``.
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.lower()
    try:
        if head == "dual":
            return make_dual(parse_surface(rest))
        if head == "expr":
            if not rest:
                raise ParseError("empty expression")
            return expression(rest)
        p = _parse_params(rest)
        if head == "bates":
            return bates()
        if head == "rez3":
            return rez3()
        if head == "rez2zbar":
            return rez2zbar()
        if head == "paraboloid":
            return paraboloid()
        if head == "gh":
            return ghomi_howard(float(p.get("lam", 1.0)))
        if head in ("fm", "gm", "lambda"):
            m, a = int(p["m"]), float(p["a"])
            F = ONE_MINUS_EXP if p.get("F", "tanh").lower() in ("exp", "one-minus-exp") else TANH
            if head == "lambda":
                return lambda_m(m, a, F)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return gm(m, a, F, offset=float(p.get("offset", 1.0)), R=float(p.get("R", 1.0)))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad surface {text!r}: {exc}") from None
    raise ParseError(f"unknown surface {text!r}")


# --------------------------------------------------------------------------
# printed closed forms (oracles)


def _mp_or_np(r):
    return jets._ops(r)


def _g_parts(spec: SurfaceSpec, p):
    r, t = p
    o = _mp_or_np(r)
    m, a, F = spec.params["m"], spec.params["a"], spec.params["F"]
    if is_extended(r):
        a = mpmath.mpf(a)
    cm, sm = o.cos(m * t), o.sin(m * t)
    ra = o.power(r, a)
    F0, F1, F2, _ = F.derivs(ra * cm)
    return r, m, a, cm, sm, ra, F0, F1, F2


def closed_form_polar_jet_g(spec: SurfaceSpec, p) -> Jet:
    """The printed five-derivative table for g = offset + F(r^a cos m theta)."""
    if spec.kind not in ("Fm", "Gm"):
        raise ValueError("closed form only available for the g_m family")
    r, m, a, cm, sm, ra, F0, F1, F2 = _g_parts(spec, p)
    x = ra * cm
    g_r = a * ra / r * cm * F1
    g_t = -m * ra * sm * F1
    g_rr = a * ra / (r * r) * cm * (a * x * F2 + (a - 1) * F1)
    g_rt = -a * m * ra / r * sm * (x * F2 + F1)
    g_tt = m * m * ra * (ra * sm * sm * F2 - cm * F1)
    return Jet(2, "polar", tuple(p), spec.params["offset"] + F0, (g_r, g_t), (g_rr, g_rt, g_tt))


def closed_form_delta_g(spec: SurfaceSpec, p) -> tuple:
    """Printed polar identifiers (delta1, delta2) of g_m."""
    r, m, a, cm, sm, ra, F0, F1, F2 = _g_parts(spec, p)
    d1 = -m * ra * sm * (a * ra * cm * F2 + (a - 1) * F1)
    o = _mp_or_np(r)
    scaled = (
        -o.power(r, 2 - a) * (a * a * cm * cm - m * m * sm * sm) * F2
        + a * cm * (a * a * cm * cm - a * m * m + m * m * sm * sm) * F1 ** 3
        - cm * o.power(r, 2 - 2 * a) * (a * a - 2 * a + m * m) * F1
    )
    d2 = scaled / o.power(r, 2 - 3 * a)
    return d1, d2


def _lambda_parts(spec: SurfaceSpec, p):
    r, t = p
    o = _mp_or_np(r)
    m, a, F = spec.params["m"], spec.params["a"], spec.params["F"]
    if is_extended(r):
        a = mpmath.mpf(a)
    cm, sm = o.cos(m * t), o.sin(m * t)
    rma = o.power(r, -a)
    F0, F1, F2, _ = F.derivs(rma * cm)
    return r, m, a, cm, sm, o.power(r, a), rma, F0, F1, F2


def closed_form_polar_jet_lambda(spec: SurfaceSpec, p) -> Jet:
    """The printed derivative list for lambda_m = r^2 F(r^-a cos m theta)."""
    if spec.kind != "LambdaM":
        raise ValueError("closed form only available for the Lambda_m family")
    r, m, a, cm, sm, ra, rma, F0, F1, F2 = _lambda_parts(spec, p)
    l_r = r * (2 * F0 - a * cm * rma * F1)
    l_t = -m * r * r * rma * sm * F1
    l_rr = 2 * F0 + a * rma * rma * cm * ((a - 3) * ra * F1 + a * cm * F2)
    l_rt = m * sm * r * rma * rma * ((a - 2) * ra * F1 + a * cm * F2)
    l_tt = -m * m * r * r * rma * rma * (ra * cm * F1 - sm * sm * F2)
    return Jet(2, "polar", tuple(p), r * r * F0, (l_r, l_t), (l_rr, l_rt, l_tt))


def closed_form_zeta(spec: SurfaceSpec, p) -> tuple:
    """Printed (zeta1, zeta2) = delta_lambda for Lambda_m."""
    r, m, a, cm, sm, ra, rma, F0, F1, F2 = _lambda_parts(spec, p)
    w = r * r * rma * rma  # r^(2-2a)
    z1 = 2 * m * w * sm * (a * cm * F2 + (a - 1) * ra * F1)
    z2 = -w * (a * a * cm * cm - m * m * sm * sm) * F2 - (a * a - 2 * a + m * m) * r * r * rma * cm * F1
    return z1, z2


def closed_form_lambda_gradient(spec: SurfaceSpec, p) -> tuple:
    """Printed Cartesian gradient (Lambda_xi, Lambda_eta) of Lambda_m (F = tanh)."""
    if spec.kind != "LambdaM" or spec.params["F"].kind != "tanh":
        raise ValueError("printed gradient is stated for Lambda_m with F = tanh")
    r, t = p
    o = _mp_or_np(r)
    m, a = spec.params["m"], spec.params["a"]
    c1, s1 = o.cos(t), o.sin(t)
    cm, sm = o.cos(m * t), o.sin(m * t)
    rma = o.power(r, -a)
    x = rma * cm
    sech2 = jets.sech2(x)
    th = o.tanh(x)
    ra = o.power(r, a)
    l_xi = r * rma * ((m * s1 * sm - a * c1 * cm) * sech2 + 2 * ra * c1 * th)
    l_eta = r * rma * (2 * ra * s1 * th - (a * s1 * cm + m * c1 * sm) * sech2)
    return l_xi, l_eta
