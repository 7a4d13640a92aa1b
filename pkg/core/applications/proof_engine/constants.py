"""Explicit constants of the sup-norm estimates.

Every constant the chain produces is appended to a ledger together with the
formula that produced it and the part of the argument it feeds, so a report
can be audited line by line.
"""

import logging
import math

import numpy as np
from scipy import optimize

from core.applications.functionals.services import l1_green_bound
from core.applications.proof_engine.interface import ConstantChain
from core.applications.proof_engine.interface import CoupledConstants
from core.applications.proof_engine.interface import LedgerEntry
from core.applications.proof_engine.interface import RecursionConstants
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.helper.custom_exceptions import LabError
from core.helper.enums import Provenance

logger = logging.getLogger(__name__)

YOUNG_U_MAX = 50.0
YOUNG_U_STEP = 1e-3
YOUNG_LOG_V_MAX = 50.0
YOUNG_SAFETY = 1.05
YOUNG_BISECTION_STEPS = 80
GREEN_GRID_POINTS = {1: 32, 2: 16, 3: 8}
MAX_EXPONENT = 700.0
ABSORPTION_LIMIT = 0.1


def _exp(x: float) -> float:
    return math.exp(x) if x < MAX_EXPONENT else math.inf


def _power(base: float, exponent: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.power(np.float64(base), exponent))


def young_constant(
    p: float,
    u_max: float = YOUNG_U_MAX,
    u_step: float = YOUNG_U_STEP,
    log_v_max: float = YOUNG_LOG_V_MAX,
    safety: float = YOUNG_SAFETY,
) -> float:
    """Smallest C_p with ``(u/2)^p v <= v (1 + |log v|^p) + C_p e^u`` on the search box, times ``safety``.

    For fixed u and ``v = e^w`` the slack is ``e^{w-u}(c - |w|^p)`` with
    ``c = (u/2)^p - 1``; its supremum sits at ``w = 0``, at the edge of the box
    or at the root of ``w^p + p w^{p-1} = c``.
    """
    if p <= 0:
        msg = f"p must be positive, got {p}"
        raise LabError.DomainError(msg)
    u = np.arange(0.0, u_max + 0.5 * u_step, u_step)
    c = (u / 2) ** p - 1
    positive = c > 0
    if not np.any(positive):
        return 0.0
    u, c = u[positive], c[positive]
    edge = np.minimum(c ** (1.0 / p), log_v_max)
    low = np.minimum(max(0.0, 1.0 - p), edge)
    high = edge.copy()
    for _ in range(YOUNG_BISECTION_STEPS):
        middle = 0.5 * (low + high)
        below = middle**p + p * middle ** (p - 1) < c
        low = np.where(below, middle, low)
        high = np.where(below, high, middle)
    root = 0.5 * (low + high)

    def slack(w: np.ndarray) -> np.ndarray:
        return np.exp(w - u) * (c - w**p)

    best = np.maximum(np.maximum(slack(np.zeros_like(u)), slack(root)), slack(edge))
    return safety * max(0.0, float(np.max(best)))


class _Ledger:
    def __init__(self) -> None:
        self.entries: list[LedgerEntry] = []

    def record(
        self,
        name: str,
        value: float,
        formula_id: str,
        proof_step: str,
        provenance: Provenance = Provenance.FORMULA,
    ) -> float:
        value = float(value)
        self.entries.append(
            LedgerEntry(
                name=name,
                value=value,
                formula_id=formula_id,
                proof_step=proof_step,
                provenance=provenance,
            ),
        )
        return value


def resolve_q(n: int, p: float, q: float | None) -> float:
    if p < n:
        sharp = n / (n - p)
        if q is None:
            return sharp
        if not 0 < q <= sharp:
            msg = f"q must lie in (0, n/(n-p)] = (0, {sharp:.6g}] for p < n, got {q}"
            raise LabError.ConfigError(msg)
        return float(q)
    if q is None:
        msg = f"p = {p} >= n = {n} needs an explicit q"
        raise LabError.ConfigError(msg)
    if q <= 0:
        msg = f"q must be positive, got {q}"
        raise LabError.ConfigError(msg)
    return float(q)


def default_green_constant(n: int, kappa: float, vol: float) -> float:
    """C_0 on a flat torus whose background has volume ``vol``."""
    grid = TorusGrid(n=n, N=GREEN_GRID_POINTS[n])
    omega_X = HermitianField.identity(n) * vol ** (1.0 / n)  # noqa: N806
    return l1_green_bound(omega_X, kappa, grid)


def coupled_constants(  # noqa: PLR0913
    n: int,
    gamma: float,
    K_1: float,  # noqa: N803
    K_2: float,  # noqa: N803
    c_theta: float,
    K_3: float | None = None,  # noqa: N803
) -> CoupledConstants:
    if K_2 < 0:
        msg = f"K_2 must be non-negative, got {K_2}"
        raise LabError.ConfigError(msg)
    delta = K_2 / 10
    if 1 + delta * c_theta <= 0:
        msg = f"1 + delta c_theta = {1 + delta * c_theta:.6g} must be positive"
        raise LabError.DomainError(msg)
    return CoupledConstants(
        delta=delta,
        c_theta=c_theta,
        K_1=K_1,
        K_2=K_2,
        K_3=K_3,
        a_mv=max(0.0, c_theta + K_2),
        nu=n * gamma ** (1.0 / n),
    )


def coupled_barrier(coupled: CoupledConstants, n: int, p: float, A: float) -> tuple[float, float]:  # noqa: N803
    """(eps, Lambda) of the coupled test function for the auxiliary mass A_k."""
    epsilon = ((n + p) * (1 + coupled.delta * coupled.c_theta) / (n * coupled.nu)) ** (n / (n + p)) * A ** (
        1.0 / (n + p)
    )
    Lambda = (2 * n * epsilon / (n + p)) ** ((n + p) / p)  # noqa: N806
    return epsilon, Lambda


def absorption_margin(coupled: CoupledConstants) -> float:
    """What is left of the omega-trace coefficient once the barrier and delta theta are absorbed."""
    margin = 0.5 - coupled.delta * coupled.K_2
    if coupled.delta * coupled.K_2 > ABSORPTION_LIMIT:
        logger.warning(
            "delta K_2 = %.4g exceeds %.1f; absorption margin is %.4g",
            coupled.delta * coupled.K_2,
            ABSORPTION_LIMIT,
            margin,
        )
    return margin


def mean_value_epsilon(n: int, a: float, A: float, nu: float) -> float:  # noqa: N803
    """Positive root of ``eps^{n+1} = rho^n A (a + n eps / (n+1))^n``, ``rho = max(1, (n+1)/(n nu))``."""
    if A <= 0 or a < 0:
        msg = f"need A > 0 and a >= 0, got A={A}, a={a}"
        raise LabError.DomainError(msg)
    rho_n = max(1.0, (n + 1) / (n * nu)) ** n
    if a == 0:
        return rho_n * A * (n / (n + 1)) ** n

    def excess(epsilon: float) -> float:
        return epsilon ** (n + 1) - rho_n * A * (a + n * epsilon / (n + 1)) ** n

    high = A ** (1.0 / (n + 1)) * (a + 1)
    while excess(high) <= 0:
        high *= 2
    return float(optimize.bisect(excess, 0.0, high, xtol=1e-12, maxiter=500))


def recursion_constants(n: int, r: float, C_bar: float, c_ratio: float) -> RecursionConstants:  # noqa: N803
    """Starting level s_0 and stopping level S_inf of the recursion with exponent r."""
    if r <= n:
        msg = f"recursion needs r > n, got r={r}, n={n}"
        raise LabError.DomainError(msg)
    delta = 1.0 / n - 1.0 / r
    scale_exponent = n / (r - n)
    log_s_0 = -math.inf
    if C_bar > 0:
        log_s_0 = math.log(2 * C_bar) / delta + scale_exponent * math.log(c_ratio)
    s_0 = _exp(log_s_0)
    return RecursionConstants(
        r=r,
        C_bar=C_bar,
        delta=delta,
        log_s_0=log_s_0,
        s_0=s_0,
        S_inf=s_0 + recursion_increment(delta),
    )


def recursion_increment(delta: float) -> float:
    return 1.0 / (1.0 - 2.0 ** (-delta))


def build_constant_chain(  # noqa: PLR0913, PLR0915
    n: int,
    p: float,
    gamma: float,
    kappa: float,
    c_ratio: float,
    K: float,  # noqa: N803
    vol: float,
    *,
    q: float | None = None,
    C_0: float | None = None,  # noqa: N803
    beta: float | None = None,
    C_X: float | None = None,  # noqa: N803
    alpha_invariant: float | None = None,
    coupled: CoupledConstants | None = None,
) -> ConstantChain:
    """Assemble every explicit constant of the energy, Trudinger and sup-norm estimates."""
    for name, value in (("p", p), ("gamma", gamma), ("kappa", kappa), ("c_ratio", c_ratio), ("vol", vol)):
        if not value > 0:
            msg = f"{name} must be positive, got {value}"
            raise LabError.ConfigError(msg)
    if K < 0:
        msg = f"entropy bound K must be non-negative, got {K}"
        raise LabError.ConfigError(msg)
    ledger = _Ledger()
    q = resolve_q(n, p, q)
    for name, value in (("n", n), ("p", p), ("q", q), ("gamma", gamma), ("kappa", kappa), ("K", K)):
        ledger.record(name, value, "input", "hypotheses", Provenance.CONFIGURED)
    ledger.record("c_ratio", c_ratio, "c_omega^n / V_omega", "hypotheses", Provenance.MEASURED)
    ledger.record("vol", vol, "int omega_X^n", "hypotheses", Provenance.MEASURED)
    a = ledger.record("a", p * q, "a = p q", "barrier")
    b = ledger.record("b", n / (n + a), "b = n / (n + a)", "barrier")
    e_0 = ledger.record(
        "e_0",
        1.0 / (gamma ** (1.0 / (n + a)) * (n * b) ** (n / (n + a))),
        "eps = e_0 A^{1/(n+a)}, e_0 = gamma^{-1/(n+a)} (n b)^{-n/(n+a)}",
        "barrier",
    )
    l_0 = ledger.record(
        "l_0",
        (e_0 * b) ** (1.0 / (1.0 - b)),
        "Lambda = l_0 A^{1/a}, l_0 = (e_0 b)^{1/(1-b)}",
        "barrier",
    )

    C_p = ledger.record(  # noqa: N806
        "C_p_young",
        young_constant(p),
        "sup over u of (u/2)^p v - v (1 + |log v|^p), per e^u",
        "sublevel decay",
        Provenance.SEARCHED,
    )
    if C_0 is None:
        C_0 = ledger.record(  # noqa: N806
            "C_0",
            default_green_constant(n, kappa, vol),
            "n kappa int (G - min G) omega_X^n",
            "l1 bound",
            Provenance.MEASURED,
        )
    else:
        C_0 = ledger.record("C_0", C_0, "supplied", "l1 bound", Provenance.CONFIGURED)  # noqa: N806
    beta = ledger.record(
        "beta",
        0.5 / kappa if beta is None else beta,
        "beta = 0.5 / kappa",
        "alpha invariant",
        Provenance.CONFIGURED,
    )
    C_X = ledger.record(  # noqa: N806
        "C_X",
        2 * vol if C_X is None else C_X,
        "C_X = 2 vol",
        "alpha invariant",
        Provenance.CONFIGURED,
    )
    alpha_invariant = ledger.record(
        "alpha_invariant",
        beta if alpha_invariant is None else alpha_invariant,
        "alpha_invariant = beta",
        "alpha invariant",
        Provenance.CONFIGURED,
    )

    C_1 = ledger.record(  # noqa: N806
        "C_1",
        2**p * (vol + n**p * K + C_p * C_0),
        "2^p (vol + n^p K + C_p C_0)",
        "sublevel decay",
    )
    C_2 = ledger.record(  # noqa: N806
        "C_2",
        e_0 ** ((n + a) * p / n) * max(1.0, 2 ** (p - 1)) * max(1.0, l_0**p),
        "e_0^{(n+a)p/n} max(1, 2^{p-1}) max(1, l_0^p)",
        "energy chain",
    )
    C_3 = ledger.record(  # noqa: N806
        "C_3",
        C_2 * (2 / beta) ** p * (vol + n**p * K + C_p * C_X),
        "C_2 (2/beta)^p (vol + n^p K + C_p C_X)",
        "energy chain",
    )
    theta = n * a / (p * (n + a))
    C_4 = ledger.record("C_4", C_3**theta, "C_3^{na/(p(n+a))}", "energy chain")  # noqa: N806
    C_5 = ledger.record("C_5", C_2**theta, "C_2^{na/(p(n+a))}", "energy chain")  # noqa: N806
    log_s_bar = ledger.record(
        "log_s_bar",
        max(0.0, _power(2 * C_1 * C_5 * c_ratio, 1.0 / p)),
        "max(0, (2 C_1 C_5 c)^{1/p})",
        "energy chain",
    )
    s_bar = ledger.record("s_bar", _exp(log_s_bar), "max(1, exp((2 C_1 C_5 c)^{1/p}))", "energy chain")
    C_6 = ledger.record(  # noqa: N806
        "C_6",
        _power(2 * C_4, (n + a) / n) * vol ** ((n + a) * (1 - theta) / n),
        "(2 C_4)^{(n+a)/n} vol^{(n+a)(1-theta)/n}",
        "energy chain",
    )
    C_7 = ledger.record("C_7", 2**a * vol, "2^a vol", "energy chain")  # noqa: N806
    C_8 = ledger.record("C_8", (2**a + 1) * vol, "(2^a + 1) vol", "energy chain")  # noqa: N806
    C_e = ledger.record(  # noqa: N806
        "C_e",
        2**a * C_6 * c_ratio ** (a / n) + C_8 * _exp(a * log_s_bar),
        "2^a C_6 c^{a/n} + C_8 s_bar^a",
        "energy chain",
    )

    exponent = (n + a) / n
    C_9 = ledger.record("C_9", e_0**exponent * max(1.0, l_0), "e_0^{(n+a)/n} max(1, l_0)", "trudinger")  # noqa: N806
    alpha = ledger.record(
        "alpha",
        0.5 * alpha_invariant / ((2 * C_6) ** (1.0 / n) * C_9 * c_ratio ** ((n + a) / n**2)),
        "0.5 alpha_invariant / ((2 C_6)^{1/n} C_9 c^{(n+a)/n^2})",
        "trudinger",
    )
    level_scale = c_ratio ** ((n + a) / (n * a))
    C_10 = ledger.record(  # noqa: N806
        "C_10",
        (C_9 * alpha * _power(2 * C_6 * c_ratio**exponent, (n + a) / (n * a)) + math.log(max(C_X, 1.0))) / level_scale,
        "(C_9 alpha (2 C_6 c^{(n+a)/n})^{(n+a)/(na)} + log max(C_X, 1)) / c^{(n+a)/(na)}",
        "trudinger",
    )
    alpha_T = ledger.record("alpha_T", alpha * 2 ** (1 - exponent), "alpha 2^{1-(n+a)/n}", "trudinger")  # noqa: N806
    s_bar_power = _exp(exponent * log_s_bar)
    log_C_T = float(  # noqa: N806
        np.logaddexp(math.log(vol) + alpha_T * s_bar_power, C_10 * level_scale + 2 * alpha * s_bar_power),
    )
    if abs(exponent - q) > 1e-12:  # noqa: PLR2004
        log_C_T += alpha_T  # noqa: N806
    log_C_T = ledger.record(  # noqa: N806
        "log_C_T",
        log_C_T,
        "log(vol e^{alpha_T s_bar^e} + e^{C_10 c^{(n+a)/(na)} + 2 alpha s_bar^e}) [+ alpha_T if q < e]",
        "trudinger",
    )
    C_T = ledger.record("C_T", _exp(log_C_T), "exp(log_C_T)", "trudinger")  # noqa: N806

    degiorgi = None
    if a > n:
        delta = 1.0 / n - 1.0 / a
        C_bar = ledger.record(  # noqa: N806
            "C_bar",
            _power(2 * C_4, (n + a) / (n * a)),
            "(2 C_4)^{(n+a)/(na)}",
            "bounded potential",
        )
        B = C_bar * c_ratio ** (1.0 / n)  # noqa: N806
        log_s_0 = ledger.record(
            "log_s_0",
            max(log_s_bar, _power(C_1 * _power(2 * B, 1.0 / delta), 1.0 / p)),
            "max(log s_bar, (C_1 (2 C_bar c^{1/n})^{1/delta})^{1/p})",
            "bounded potential",
        )
        s_0 = ledger.record(
            "s_0",
            _exp(log_s_0),
            "max(s_bar, exp((C_1 (2 C_bar c^{1/n})^{1/delta})^{1/p}))",
            "bounded potential",
        )
        S_inf = ledger.record(  # noqa: N806
            "S_inf",
            s_0 + recursion_increment(delta),
            "s_0 + 1/(1 - 2^{-delta})",
            "bounded potential",
        )
        degiorgi = RecursionConstants(r=a, C_bar=C_bar, delta=delta, log_s_0=log_s_0, s_0=s_0, S_inf=S_inf)

    if coupled is not None:
        ledger.record("delta", coupled.delta, "K_2 / 10", "coupled barrier")
        ledger.record("c_theta", coupled.c_theta, "mean of G theta - Box F", "coupled barrier", Provenance.MEASURED)
        ledger.record("K_1", coupled.K_1, "Ent_p(e^{nF})", "coupled barrier", Provenance.MEASURED)
        ledger.record("K_2", coupled.K_2, "theta >= -K_2 omega", "coupled barrier", Provenance.MEASURED)
        if coupled.K_3 is not None:
            ledger.record("K_3", coupled.K_3, "theta <= K_3 omega", "coupled barrier", Provenance.MEASURED)
        ledger.record("a_mv", coupled.a_mv, "max(0, c_theta + K_2)", "mean value")
        ledger.record("nu", coupled.nu, "n gamma^{1/n}", "coupled barrier")

    chain = ConstantChain(
        n=n,
        p=p,
        q=q,
        a=a,
        b=b,
        gamma=gamma,
        kappa=kappa,
        c_ratio=c_ratio,
        K=K,
        vol=vol,
        e_0=e_0,
        l_0=l_0,
        s_bar=s_bar,
        log_s_bar=log_s_bar,
        C_p_young=C_p,
        C_0=C_0,
        C_1=C_1,
        C_2=C_2,
        C_3=C_3,
        C_4=C_4,
        C_5=C_5,
        C_6=C_6,
        C_7=C_7,
        C_8=C_8,
        C_9=C_9,
        C_10=C_10,
        C_e=C_e,
        alpha=alpha,
        alpha_T=alpha_T,
        log_C_T=log_C_T,
        C_T=C_T,
        beta=beta,
        C_X=C_X,
        alpha_invariant=alpha_invariant,
        coupled=coupled,
        degiorgi=degiorgi,
        ledger=ledger.entries,
    )
    logger.debug("constant chain n=%d p=%g K=%g: C_e=%.4g log C_T=%.4g", n, p, K, C_e, log_C_T)
    return chain
