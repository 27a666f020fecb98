"""Bryant–Salamon G2 and Spin(7) metrics on vector bundles over S^3, S^4 and CP^2.

Everything is evaluated on the fiber over a base point ``p`` where the base
and bundle connection forms vanish.  Frame order: ``omega^0..omega^{n-1}``
horizontal (rescaled base coframe), ``omega^n..omega^{n+m-1}`` vertical.
The fiber coordinate ``y`` has squared norm ``s``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructureError
from .form_derivatives import GradientTerm, HessianTerm
from .riemann import FrameIndexSet, RiemannSample

# F tables: entries[mu][nu] lists (coefficient, i, j) meaning coefficient * w^i ^ w^j (1-based).
_SPINOR = [
    [[], [(-1, 2, 3)], [(1, 1, 3)], [(-1, 1, 2)]],
    [[(1, 2, 3)], [], [(1, 1, 2)], [(1, 1, 3)]],
    [[(-1, 1, 3)], [(-1, 1, 2)], [], [(1, 2, 3)]],
    [[(1, 1, 2)], [(-1, 1, 3)], [(-1, 2, 3)], []],
]
_ASD = [
    [[], [(-1, 1, 4), (1, 2, 3)], [(1, 1, 3), (1, 2, 4)]],
    [[(1, 1, 4), (-1, 2, 3)], [], [(-1, 1, 2), (1, 3, 4)]],
    [[(-1, 1, 3), (-1, 2, 4)], [(1, 1, 2), (-1, 3, 4)], []],
]
_NEG_SPINOR = [
    [[], [(1, 1, 2), (-1, 3, 4)], [(1, 1, 3), (1, 2, 4)], [(1, 1, 4), (-1, 2, 3)]],
    [[(-1, 1, 2), (1, 3, 4)], [], [(-1, 1, 4), (1, 2, 3)], [(1, 1, 3), (1, 2, 4)]],
    [[(-1, 1, 3), (-1, 2, 4)], [(1, 1, 4), (-1, 2, 3)], [], [(-1, 1, 2), (1, 3, 4)]],
    [[(-1, 1, 4), (1, 2, 3)], [(-1, 1, 3), (-1, 2, 4)], [(1, 1, 2), (-1, 3, 4)], []],
]


@dataclass(frozen=True)
class _SpaceData:
    table: list
    n: int
    m: int
    f_scale: float  # F entries are f_scale * kappa * table
    kappa_ratios: tuple[float, float]  # (kappa1, kappa2) / kappa
    alpha_coef: float  # alpha = sqrt(alpha_coef * kappa) (1 + s)^alpha_power
    alpha_power: float
    beta0: float  # beta = beta0 (1 + s)^beta_power
    beta_power: float


_SPACES = {
    "spinor_S3": _SpaceData(_SPINOR, 3, 4, 0.5, (0.25, 0.125), 3.0, 1.0 / 3.0, 2.0, -1.0 / 6.0),
    "asd_S4": _SpaceData(_ASD, 4, 3, 1.0, (0.5, 0.5), 2.0, 0.25, 1.0, -0.25),
    "asd_CP2": _SpaceData(_ASD, 4, 3, 1.0, (0.5, 0.5), 2.0, 0.25, 1.0, -0.25),
    "neg_spinor_S4": _SpaceData(_NEG_SPINOR, 4, 4, 0.5, (0.375, 0.25), 5.0, 0.3, 2.0, -0.2),
}
SPACE_IDS = tuple(_SPACES)


def canonical_space_id(space_id: str) -> str:
    """Case-insensitive lookup of a space identifier."""
    for key in _SPACES:
        if key.lower() == str(space_id).lower():
            return key
    raise StructureError(f"unknown space {space_id!r}; expected one of {', '.join(SPACE_IDS)}")


@dataclass(frozen=True)
class BSSpace:
    """One of the four Bryant–Salamon spaces at base curvature scale ``kappa``."""

    id: str
    n: int
    m: int
    kappa: float
    kappa1: float
    kappa2: float
    alpha0: float
    beta0: float

    @property
    def frame(self) -> FrameIndexSet:
        return FrameIndexSet(self.n, self.m)


def make_space(space_id: str, kappa: float = 1.0) -> BSSpace:
    """Build a :class:`BSSpace`; ``kappa`` must be positive."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    key = canonical_space_id(space_id)
    data = _SPACES[key]
    k1, k2 = (ratio * kappa for ratio in data.kappa_ratios)
    return BSSpace(key, data.n, data.m, float(kappa), k1, k2, float(np.sqrt(data.alpha_coef * kappa)), data.beta0)


@dataclass
class BSRadialState:
    """``alpha``, ``beta`` and their ``s``-derivatives (scalars or arrays)."""

    s: np.ndarray | float
    alpha: np.ndarray | float
    beta: np.ndarray | float
    alpha_p: np.ndarray | float
    beta_p: np.ndarray | float
    alpha_pp: np.ndarray | float


def alpha_beta(space: BSSpace, s) -> BSRadialState:
    """Closed-form coefficients; derivatives from the holonomy ODE system."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("s must be non-negative")
    data = _SPACES[space.id]
    alpha = space.alpha0 * (1.0 + s_arr) ** data.alpha_power
    beta = data.beta0 * (1.0 + s_arr) ** data.beta_power
    alpha_p = space.kappa1 * beta**2 / alpha
    beta_p = -space.kappa2 * beta**3 / alpha**2
    alpha_pp = space.kappa1 * (2.0 * beta * beta_p / alpha - beta**2 * alpha_p / alpha**2)
    return BSRadialState(s_arr, alpha, beta, alpha_p, beta_p, alpha_pp)


def ode_residuals(space: BSSpace, s) -> np.ndarray:
    """Residuals of ``alpha' = kappa1 beta^2/alpha`` and ``beta' = -kappa2 beta^3/alpha^2``.

    Uses the analytic derivatives of the closed forms (power rule), relative
    to ``max(1, |rhs|)``.
    """
    s_arr = np.asarray(s, dtype=float)
    data = _SPACES[space.id]
    st = alpha_beta(space, s_arr)
    dalpha = data.alpha_power * st.alpha / (1.0 + s_arr)
    dbeta = data.beta_power * st.beta / (1.0 + s_arr)
    rhs_a = space.kappa1 * st.beta**2 / st.alpha
    rhs_b = -space.kappa2 * st.beta**3 / st.alpha**2
    return np.maximum(np.abs(dalpha - rhs_a) / np.maximum(1.0, np.abs(rhs_a)), np.abs(dbeta - rhs_b) / np.maximum(1.0, np.abs(rhs_b)))


@dataclass
class RelationReport:
    s: np.ndarray
    ratio_residual: np.ndarray
    derivative_residual: np.ndarray
    ode_residual: np.ndarray
    alpha_p_positive: bool
    beta_condition: bool

    @property
    def max_closed_form(self) -> float:
        return float(max(self.ratio_residual.max(), self.ode_residual.max()))

    @property
    def max_fd(self) -> float:
        return float(self.derivative_residual.max())


def relation_checks(space: BSSpace, grid, h_fd: float = 1e-5) -> RelationReport:
    """Residuals of the ratio law and the ``(beta/alpha^2)'`` identity on a grid of ``s``.

    The ratio law ``alpha^2/beta^2 = (alpha0/beta0)^2 + 2(kappa1+kappa2)s`` is
    checked in closed form; ``(beta/alpha^2)' = -(2kappa1+kappa2) beta^3/alpha^4``
    by central differences of step ``h_fd`` (one-sided at ``s = 0``).
    """
    s = np.asarray(grid, dtype=float)
    st = alpha_beta(space, s)
    ratio = st.alpha**2 / st.beta**2
    expected = (space.alpha0 / space.beta0) ** 2 + 2.0 * (space.kappa1 + space.kappa2) * s
    ratio_res = np.abs(ratio - expected) / np.maximum(1.0, np.abs(expected))

    def quotient(x):
        t = alpha_beta(space, x)
        return t.beta / t.alpha**2

    lo = np.maximum(s - h_fd, 0.0)
    hi = lo + 2.0 * h_fd
    centre = 0.5 * (lo + hi)
    fd = (quotient(hi) - quotient(lo)) / (hi - lo)
    at_centre = alpha_beta(space, centre)
    rhs = -(2.0 * space.kappa1 + space.kappa2) * at_centre.beta**3 / at_centre.alpha**4
    deriv_res = np.abs(fd - rhs) / np.maximum(1.0, np.abs(rhs))
    positive = s > 0
    return RelationReport(
        s=s,
        ratio_residual=ratio_res,
        derivative_residual=deriv_res,
        ode_residual=ode_residuals(space, s),
        alpha_p_positive=bool(np.all(st.alpha_p[positive] > 0)),
        beta_condition=bool(np.all(st.beta[positive] > 2.0 * s[positive] * np.abs(st.beta_p[positive]))),
    )


def f_matrix(space: BSSpace) -> np.ndarray:
    """Constant curvature coefficients ``F[mu, nu, i, j]`` of the bundle connection."""
    data = _SPACES[space.id]
    table = np.zeros((space.m, space.m, space.n, space.n))
    scale = data.f_scale * space.kappa
    for mu in range(space.m):
        for nu in range(space.m):
            for coef, i, j in data.table[mu][nu]:
                table[mu, nu, i - 1, j - 1] += coef * scale
                table[mu, nu, j - 1, i - 1] -= coef * scale
    return table


def induced_bundle_connection(space: BSSpace, base_connection: np.ndarray, table: np.ndarray | None = None) -> np.ndarray:
    """Bundle connection ``A[mu, nu, :] = F[mu, nu, i, j] wbar[i, j, :] / (2 kappa)``."""
    table = f_matrix(space) if table is None else table
    return np.einsum("mnij,ijk->mnk", table, base_connection) / (2.0 * space.kappa)


def nabla_AF_residual(
    space: BSSpace,
    base_connection: np.ndarray | None = None,
    perturbation: tuple[tuple[int, int, int, int], float] | None = None,
) -> float:
    """Largest component of the covariant derivative of ``F``.

    Parameters
    ----------
    space : BSSpace
    base_connection : ndarray, shape (n, n, n), optional
        Base connection 1-forms ``wbar[i, j, :]`` (skew in ``i, j``).  ``None``
        means the geodesic frame, where all connection forms vanish.
    perturbation : ((mu, nu, i, j), delta), optional
        Fault injection: add ``delta`` to one entry of ``F`` (skew-completed)
        while the bundle connection is still induced by the exact table.

    Returns
    -------
    float
        ``max |dF + [A, F] - F(wbar ., .) - F(., wbar .)|``; ``dF = 0`` since
        the entries are constants.
    """
    exact = f_matrix(space)
    table = exact.copy()
    if perturbation is not None:
        (mu, nu, i, j), delta = perturbation
        for a, b, sa in ((mu, nu, 1.0), (nu, mu, -1.0)):
            table[a, b, i, j] += sa * delta
            table[a, b, j, i] -= sa * delta
    n = space.n
    conn = np.zeros((n, n, n)) if base_connection is None else np.asarray(base_connection, dtype=float)
    bundle = induced_bundle_connection(space, conn, exact)
    d_table = np.zeros(table.shape + (n,))
    residual = (
        d_table
        + np.einsum("mgx,gnjk->mnjkx", bundle, table)
        - np.einsum("mgjk,gnx->mnjkx", table, bundle)
        - np.einsum("mnik,ijx->mnjkx", table, conn)
        - np.einsum("mnji,ikx->mnjkx", table, conn)
    )
    return float(np.abs(residual).max())


def base_curvature(space: BSSpace) -> np.ndarray:
    """Base curvature ``Rbar[j, i, k, l]`` in the package convention.

    Round sphere of curvature ``kappa``, or Fubini–Study with
    ``J e1 = e2``, ``J e3 = e4`` and holomorphic sectional curvature ``2 kappa``.
    """
    n = space.n
    eye = np.eye(n)
    if space.id != "asd_CP2":
        return space.kappa * (np.einsum("jk,il->jikl", eye, eye) - np.einsum("jl,ik->jikl", eye, eye))
    const = space.kappa / 2.0
    jmat = np.zeros((4, 4))
    jmat[1, 0] = jmat[3, 2] = 1.0
    jmat[0, 1] = jmat[2, 3] = -1.0
    table = np.zeros((4,) * 4)
    for a, b, c, d in itertools.product(range(4), repeat=4):
        x, y, z, w = eye[c], eye[d], eye[b], eye[a]
        value = (y @ z) * x - (x @ z) * y + ((jmat @ y) @ z) * (jmat @ x) - ((jmat @ x) @ z) * (jmat @ y) + 2.0 * (x @ (jmat @ y)) * (jmat @ z)
        table[a, b, c, d] = const * (value @ w)
    return table


def curvature(space: BSSpace, y) -> RiemannSample:
    """Curvature over the base point, all four blocks closed by symmetry."""
    y = np.asarray(y, dtype=float)
    if y.shape != (space.m,):
        raise StructureError(f"fiber vector must have length {space.m}")
    n, m = space.n, space.m
    k1, k2 = space.kappa1, space.kappa2
    table = f_matrix(space)
    s = float(y @ y)
    st = alpha_beta(space, s)
    al, be = float(st.alpha), float(st.beta)
    q = be**2 / al**4
    dn, dm = np.eye(n), np.eye(m)
    hhhh = (
        base_curvature(space) / al**2
        - 4 * q * k1**2 * s * (np.einsum("jk,il->jikl", dn, dn) - np.einsum("jl,ik->jikl", dn, dn))
        - q
        / 4
        * (
            2 * np.einsum("v,vmij,mgkl,g->jikl", y, table, table, y)
            + np.einsum("v,vmik,mgjl,g->jikl", y, table, table, y)
            - np.einsum("v,vmil,mgjk,g->jikl", y, table, table, y)
        )
    )
    hhvv = (
        -table.transpose(3, 2, 0, 1) / al**2
        + 2 * q * (k1 + k2) * (np.einsum("n,mgij,g->jimn", y, table, y) - np.einsum("m,ngij,g->jimn", y, table, y))
        + q / 4 * (np.einsum("g,mgik,nejk,e->jimn", y, table, table, y) - np.einsum("g,ngik,mejk,e->jimn", y, table, table, y))
    )
    vhvh = (
        -(2 * k1 / al**2 - 4 * q * k1 * k2 * s) * np.einsum("mn,ij->minj", dm, dn)
        + table.transpose(0, 2, 1, 3) / (2 * al**2)
        + 4 * q * k1**2 * np.einsum("m,n,ij->minj", y, y, dn)
        + q * (k1 + k2) * (np.einsum("m,ngij,g->minj", y, table, y) - np.einsum("n,mgij,g->minj", y, table, y))
        + q / 4 * np.einsum("g,ngik,mejk,e->minj", y, table, table, y)
    )
    vvvv = (4 * k2 / al**2 - 4 * q * k2**2 * s) * (np.einsum("mg,ne->mnge", dm, dm) - np.einsum("me,ng->mnge", dm, dm)) + 4 * q * k2 * (
        2 * k1 + k2
    ) * (
        np.einsum("n,g,me->mnge", y, y, dm)
        - np.einsum("n,e,mg->mnge", y, y, dm)
        + np.einsum("m,e,ng->mnge", y, y, dm)
        - np.einsum("m,g,en->mnge", y, y, dm)
    )
    dim = n + m
    h, v = slice(0, n), slice(n, dim)
    full = np.zeros((dim,) * 4)
    full[h, h, h, h] = hhhh
    full[h, h, v, v] = hhvv
    full[v, v, h, h] = hhvv.transpose(2, 3, 0, 1)
    full[v, h, v, h] = vhvh
    full[h, v, v, h] = -vhvh.transpose(1, 0, 2, 3)
    full[v, h, h, v] = -vhvh.transpose(0, 1, 3, 2)
    full[h, v, h, v] = vhvh.transpose(1, 0, 3, 2)
    full[v, v, v, v] = vvvv
    return RiemannSample(full, frame=space.frame)


@dataclass
class ConnectionSample:
    """Levi-Civita connection forms ``conn[a, b, :]`` (``d omega^a = -conn[a, b] ^ omega^b``)."""

    forms: np.ndarray


def connection_sample(space: BSSpace, y) -> ConnectionSample:
    """Connection forms over the base point (base and bundle connections vanish there).

    ``omega^{n+mu}_i = (beta/(2 alpha^2)) F^mu_{nu ij} y^nu omega^j - (2 alpha'/(alpha beta)) y^mu omega^i``;
    ``omega^j_i = (beta/(2 alpha^2)) F^mu_{nu ij} y^nu omega^{n+mu}``;
    ``omega^{n+mu}_{n+nu} = (2 beta'/beta^2)(y^nu omega^{n+mu} - y^mu omega^{n+nu})``.
    """
    y = np.asarray(y, dtype=float)
    n, m = space.n, space.m
    dim = n + m
    table = f_matrix(space)
    st = alpha_beta(space, float(y @ y))
    al, be, ap, bp = (float(v) for v in (st.alpha, st.beta, st.alpha_p, st.beta_p))
    eye = np.eye(dim)
    eh, ev = eye[:n], eye[n:]
    coef = be / (2 * al**2)
    fy = np.einsum("mvij,v->mij", table, y)
    forms = np.zeros((dim, dim, dim))
    mixed = coef * np.einsum("mij,ja->mia", fy, eh) - (2 * ap / (al * be)) * np.einsum("m,ia->mia", y, eh)
    forms[n:, :n] = mixed
    forms[:n, n:] = -mixed.transpose(1, 0, 2)
    forms[:n, :n] = coef * np.einsum("mij,ma->jia", fy, ev)
    forms[n:, n:] = (2 * bp / be**2) * (np.einsum("n,ma->mna", y, ev) - np.einsum("m,na->mna", y, ev))
    return ConnectionSample(forms)


@dataclass
class HessianS:
    """Hessian of ``s`` with its positivity and lower-bound checks."""

    matrix: np.ndarray
    min_eigenvalue: float
    bound_horizontal: float
    bound_vertical: float
    bound_holds: bool


def hessian_from_coefficients(alpha, beta, alpha_p, beta_p, y, n: int) -> np.ndarray:
    """Hessian of ``s`` for a bundle metric with arbitrary coefficient functions.

    Horizontal block ``(4 alpha' s/(alpha beta^2)) I``; vertical block
    ``(2/beta^2 + 4 beta' s/beta^3) I - (8 beta'/beta^3) y y^T``; no mixed block.
    """
    y = np.asarray(y, dtype=float)
    m = y.shape[0]
    s = float(y @ y)
    out = np.zeros((n + m, n + m))
    out[:n, :n] = 4 * alpha_p * s / (alpha * beta**2) * np.eye(n)
    out[n:, n:] = (2 / beta**2 + 4 * beta_p * s / beta**3) * np.eye(m) - 8 * beta_p / beta**3 * np.outer(y, y)
    return out


def hessian_s(space: BSSpace, y) -> HessianS:
    """Hessian of ``s`` and the lower bound it satisfies.

    The bound is ``(4 kappa1 s/alpha^2)`` on horizontal directions and
    ``(2/alpha^2)((alpha0/beta0)^2 + 2 kappa1 s)`` on vertical ones.
    """
    y = np.asarray(y, dtype=float)
    st = alpha_beta(space, float(y @ y))
    al, be, ap, bp = (float(v) for v in (st.alpha, st.beta, st.alpha_p, st.beta_p))
    s = float(y @ y)
    mat = hessian_from_coefficients(al, be, ap, bp, y, space.n)
    hor = 4 * space.kappa1 * s / al**2
    ver = 2 / al**2 * ((space.alpha0 / space.beta0) ** 2 + 2 * space.kappa1 * s)
    bound = np.diag([hor] * space.n + [ver] * space.m)
    slack = np.linalg.eigvalsh(mat - bound).min()
    scale = max(1.0, float(np.abs(mat).max()))
    return HessianS(mat, float(np.linalg.eigvalsh(mat).min()), hor, ver, bool(slack >= -1e-12 * scale))


def beta_weighted_horizontal_bound(space: BSSpace, s: float) -> float:
    """Horizontal coefficient ``4 kappa1 beta s/alpha^3``.

    This beta-weighted form is not a valid lower bound for the Hessian: it
    exceeds the true horizontal entry ``4 kappa1 s/alpha^2`` whenever
    ``beta > alpha``.  Kept so the tests can pin that counterexample.
    """
    st = alpha_beta(space, s)
    return float(4 * space.kappa1 * st.beta * s / st.alpha**3)


# --- derivatives of the calibration form ------------------------------------


def _interior_one(n: int, j: int):
    return (-1) ** j, [k for k in range(n) if k != j]


def _interior_two(n: int, j: int, k: int):
    if j == k:
        return 0, []
    rest = [l for l in range(n) if l not in (j, k)]
    return ((-1) ** (j + k) if k < j else (-1) ** (j + k + 1)), rest


def omega_terms(space: BSSpace, y) -> tuple[list[GradientTerm], list[HessianTerm]]:
    """Gradient and Hessian terms of the base volume form over the base point.

    ``y`` has shape ``(m,)`` or ``(S, m)``; terms then carry a sample axis.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n, m = space.n, space.m
    dim = n + m
    table = f_matrix(space)
    s = np.einsum("sm,sm->s", y, y)
    st = alpha_beta(space, s)
    al, be, ap, bp, app = st.alpha, st.beta, st.alpha_p, st.beta_p, st.alpha_pp
    p = be / (2 * al**2)
    q = 2 * ap / (al * be)
    dp = bp / (2 * al**2) - be * ap / al**3
    dq = 2 * app / (al * be) - 2 * ap**2 / (al**2 * be) - 2 * ap * bp / (al * be**2)
    eye = np.eye(dim)
    eh, ev = eye[:n], eye[n:]
    col = lambda v: v[:, None, None, None]  # noqa: E731
    col5 = lambda v: v[:, None, None, None, None]  # noqa: E731
    fy = np.einsum("mvjk,sv->smjk", table, y)
    w = col(p) * np.einsum("smjk,ka->smja", fy, eh) - col(q) * np.einsum("sm,ja->smja", y, eh)
    pieces = [
        col5(2 / be * dp) * np.einsum("smjk,sg,ga,kb->smjab", fy, y, ev, eh),
        col5(1 / (2 * al**2)) * np.einsum("mvjk,va,kb->mjab", table, ev, eh)[None],
        col5(p) * np.einsum("smjk,sgka,gb->smjab", fy, w, ev),
        -col5(be**2 / (4 * al**4)) * np.einsum("smjk,sgik,ga,ib->smjab", fy, fy, ev, eh),
        -col5(2 / be * dq) * np.einsum("sm,sv,va,jb->smjab", y, y, ev, eh),
        -col5(2 * ap / (al * be**2)) * np.einsum("ma,jb->mjab", ev, eh)[None],
        col5(ap / al**3) * np.einsum("sm,sgkj,ga,kb->smjab", y, fy, ev, eh),
        -col5(q) * np.einsum("sm,svja,vb->smjab", y, w, ev),
        col5(2 * bp / be**2) * (np.einsum("sv,ma,svjb->smjab", y, ev, w) - np.einsum("sm,va,svjb->smjab", y, ev, w)),
        -col5(p) * np.einsum("sgjk,ga,smkb->smjab", fy, ev, w),
    ]
    second = sum(pieces)
    grads: list[GradientTerm] = []
    hess: list[HessianTerm] = []
    for mu in range(m):
        for j in range(n):
            sign, rest = _interior_one(n, j)
            rows = np.vstack([ev[mu], eh[rest]]) if rest else ev[mu][None]
            grads.append(GradientTerm(float(sign), w[:, mu, j], rows))
            hess.append(HessianTerm(float(sign), second[:, mu, j], rows))
    hess.append(HessianTerm(1.0, -np.einsum("smia,smib->sab", w, w), eh.copy()))
    for mu, nu in itertools.product(range(m), repeat=2):
        for j, k in itertools.product(range(n), repeat=2):
            sign, rest = _interior_two(n, j, k)
            if sign == 0:
                continue
            rows = np.vstack([ev[mu], ev[nu]] + ([eh[rest]] if rest else []))
            hess.append(HessianTerm(float(sign), np.einsum("sa,sb->sab", w[:, nu, k], w[:, mu, j]), rows))
    return grads, hess
