"""Linear stability tools for the kinetic scheme and its projective integrators.

Conventions
-----------
For the linear four-velocity model (``A(u) = u``, ``B(u) = u``) a Fourier mode
``f_l(x) = fhat_l exp(i k x)`` evolves under the semi-discrete operator as
``d fhat / dt = Kmat fhat`` with

    Kmat = diag(D) + (m 1^T - I) / eps,

where ``D_l`` is the symbol of ``-gamma_l d_x`` for velocity ``l`` (model
ordering ``-lambda, +lambda, -c, +c``) and ``m`` is the Maxwellian weight
vector ``M(u) = m u``.  With ``alpha + i beta`` the symbol of ``-lambda d_x``
under the upwind stencil and ``i gamma`` minus the symbol of ``c d_x`` under
the centred stencil, ``D = (alpha - i beta, alpha + i beta, i gamma, -i gamma)``.

The auxiliary matrix ``Amat = eps Kmat + I = eps D + m 1^T`` is diagonal plus
rank one; its eigenvalues solve the secular equation
``sum_j m_j / (z - eps D_j) = 1``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from .core import Grid
from .integrate import ButcherTableau, TableauError, get_tableau
from .model import KineticModel, ParameterError
from .transport import STENCILS, SchemeSpec, SemiDiscreteOperator

__all__ = [
    "SymbolSet",
    "SpectrumReport",
    "StabilityRaster",
    "fourier_symbols",
    "symbol_diagonal",
    "linear_maxwellian_weights",
    "bgk_symbol_matrix",
    "secular_roots",
    "analytic_spectrum",
    "dominant_eigenvalue_asymptotic",
    "numerical_jacobian",
    "numerical_spectrum",
    "match_spectra",
    "pfe_amplification",
    "prk_amplification",
    "stability_disks",
    "stability_region",
    "graded_axis",
    "count_components",
    "grid_modes",
]


# ----------------------------------------------------------------------------
# Fourier symbols


@dataclass
class SymbolSet:
    """Real/imaginary parts of the upwind (``alpha``, ``beta``) and centred (``xi``, ``gamma``) symbols."""

    zeta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    xi: np.ndarray
    gamma: np.ndarray
    dx: float
    lam: float
    theta: float
    mu: float
    epsilon: float


def fourier_symbols(
    zeta: np.ndarray | float,
    dx: float,
    lam: float,
    theta: float,
    mu: float,
    epsilon: float,
    hyperbolic_order: int = 3,
    parabolic_order: int = 4,
) -> SymbolSet:
    """Symbols of the transport stencils on the mode ``exp(i zeta x/dx)``.

    ``alpha + i beta`` is the symbol of ``-lam d_x`` (lam > 0) under the upwind
    stencil; ``gamma`` is defined by ``-c d_x -> -i gamma`` under the centred
    stencil with ``c = mu/sqrt(2) + theta/sqrt(eps)``; ``xi`` is its real part
    (zero for centred stencils).  For the order-3 upwind / order-4 centred
    pair this gives

        alpha = -|lam| (3 - 4 cos z + cos 2z) / (6 dx),
        beta  = -lam (8 sin z - sin 2z) / (6 dx),
        gamma = c (8 sin z - sin 2z) / (6 dx).
    """
    if not dx > 0:
        raise ParameterError("dx must be positive")
    z = np.asarray(zeta, dtype=float)
    up = STENCILS[("upwind", int(hyperbolic_order))].symbol(z, dx)
    cen = STENCILS[("centered", int(parabolic_order))].symbol(z, dx)
    hyp = -abs(lam) * up
    # mirrored sign convention: for negative lam the upwind symbol is -conj
    if lam < 0:
        hyp = np.conj(hyp)
    c = mu / math.sqrt(2.0) + theta / math.sqrt(epsilon)
    par = c * cen  # symbol of +c d_x; equals i gamma + xi-part
    return SymbolSet(
        zeta=z,
        alpha=hyp.real,
        beta=hyp.imag,
        xi=-par.real,
        gamma=par.imag,
        dx=float(dx),
        lam=float(lam),
        theta=float(theta),
        mu=float(mu),
        epsilon=float(epsilon),
    )


def symbol_diagonal(symbols: SymbolSet) -> np.ndarray:
    """Diagonal ``D`` in model ordering; shape ``(*zeta.shape, 4)``."""
    a, b, x, g = symbols.alpha, symbols.beta, symbols.xi, symbols.gamma
    return np.stack([a - 1j * b, a + 1j * b, x + 1j * g, x - 1j * g], axis=-1)


def linear_maxwellian_weights(lam: float, theta: float) -> np.ndarray:
    """``m`` with ``M(u) = m u`` for the four-velocity model with ``A = B = id``."""
    t2 = theta * theta
    return 0.5 * np.array([1.0 - 1.0 / lam - 1.0 / t2, 1.0 + 1.0 / lam - 1.0 / t2, 1.0 / t2, 1.0 / t2])


def bgk_symbol_matrix(symbols: SymbolSet, epsilon: float | None = None) -> np.ndarray:
    """``Kmat = diag(D) + (m 1^T - I)/eps`` for each mode; shape ``(*zeta.shape, 4, 4)``."""
    eps = symbols.epsilon if epsilon is None else float(epsilon)
    D = symbol_diagonal(symbols)
    m = linear_maxwellian_weights(symbols.lam, symbols.theta)
    rank_one = np.outer(m, np.ones(4)) - np.eye(4)
    out = np.zeros(D.shape + (4,), dtype=complex)
    out[...] = rank_one / eps
    idx = np.arange(4)
    out[..., idx, idx] += D
    return out


# ----------------------------------------------------------------------------
# secular-equation root finding


def _poly_coeffs(nodes: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Coefficients (highest first) of ``prod_j (z - n_j) - sum_j m_j prod_{i != j} (z - n_i)``."""
    L = nodes.size
    p = np.poly(nodes).astype(complex)
    for j in range(L):
        others = np.delete(nodes, j)
        q = np.poly(others).astype(complex) if others.size else np.array([1.0 + 0j])
        p[1:] -= m[j] * q
    return p


def _aberth(coeffs: np.ndarray, guesses: np.ndarray, max_iter: int = 200) -> tuple[np.ndarray, bool]:
    """Simultaneous Aberth--Ehrlich iteration for all roots of a polynomial."""
    z = guesses.astype(complex).copy()
    dcoeffs = np.polyder(coeffs)
    converged = False
    for _ in range(max_iter):
        pv = np.polyval(coeffs, z)
        dv = np.polyval(dcoeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            corr = ratio / (1.0 - ratio * inv.sum(axis=1))
        if not np.all(np.isfinite(corr)):
            return z, False
        z = z - corr
        scale = np.maximum(np.abs(z), 1e-300)
        if np.all(np.abs(corr) <= 4e-16 * scale):
            converged = True
            break
    return z, converged


def _polish_kappa(kappa: complex, D: np.ndarray, m: np.ndarray, eps: float, iters: int = 8) -> complex:
    """Newton on ``h(k) = sum_j m_j s_j / (1 + eps s_j)``, ``s_j = k - D_j`` (no cancellation near ``z = 1``)."""
    k = complex(kappa)
    for _ in range(iters):
        s = k - D
        den = 1.0 + eps * s
        h = np.sum(m * s / den)
        dh = np.sum(m / den**2)
        step = h / dh
        k -= step
        if abs(step) <= 1e-16 * max(1.0, abs(k)):
            break
    return k


def secular_roots(D: np.ndarray, m: np.ndarray, epsilon: float) -> tuple[np.ndarray, bool]:
    """Eigenvalues of ``diag(D) + (m 1^T - I)/eps`` from the secular equation.

    Returns ``(kappa, converged)`` with the dominant root first.  Roots of
    ``sum_j m_j/(z - eps D_j) = 1`` are found by Aberth iteration started at
    ``z = 1`` and at perturbations of ``eps D_j``; the dominant root is then
    polished directly in ``kappa`` to avoid cancellation in ``(z - 1)/eps``.
    When the iteration fails, a dense eigensolve is used and ``converged`` is
    ``False``.
    """
    D = np.asarray(D, dtype=complex)
    m = np.asarray(m, dtype=float)
    eps = float(epsilon)
    nodes = eps * D
    coeffs = _poly_coeffs(nodes, m)
    L = D.size
    spread = max(float(np.max(np.abs(nodes))), eps)
    guesses = nodes + spread * 0.05 * np.exp(1j * (0.4 + 2.0 * np.pi * np.arange(L) / L))
    guesses[int(np.argmax(m))] = 1.0
    z, ok = _aberth(coeffs, guesses)
    if ok:
        kappa = (z - 1.0) / eps
    else:
        mat = np.diag(D) + (np.outer(m, np.ones(L)) - np.eye(L)) / eps
        kappa = np.linalg.eigvals(mat)
    order = np.argsort(-kappa.real, kind="stable")
    kappa = kappa[order]
    kappa[0] = _polish_kappa(kappa[0], D, m, eps)
    return kappa, ok


# ----------------------------------------------------------------------------
# spectra


@dataclass
class SpectrumReport:
    """Per-mode spectrum with dominant/fast classification and the disk-bound verdict.

    ``eigenvalues`` has shape ``(n_modes, L)`` with the dominant eigenvalue
    in column 0.  ``radius_bound`` is ``C (|xi| + |gamma|)/sqrt(eps)`` per
    mode; ``degenerate`` marks modes where ``|xi| + |gamma|`` vanishes but the
    fast eigenvalues do not coincide with ``-1/eps``, for which containment is
    checked against ``rouche_radius`` instead.
    """

    zeta: np.ndarray
    epsilon: float
    eigenvalues: np.ndarray
    dominant: np.ndarray
    fast: np.ndarray
    fast_cluster_center: float
    C: float
    radius_bound: np.ndarray
    rouche_radius: np.ndarray
    degenerate: np.ndarray
    within_bound: bool
    asymptotic_prediction: np.ndarray
    literal_prediction: np.ndarray
    method: str = "secular"
    converged: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def fast_distance(self) -> np.ndarray:
        return np.abs(self.fast - self.fast_cluster_center)

    def to_rows(self) -> list[tuple[float, float, str]]:
        rows = []
        for k in range(self.eigenvalues.shape[0]):
            rows.append((float(self.dominant[k].real), float(self.dominant[k].imag), "dominant"))
            for ev in self.fast[k]:
                rows.append((float(ev.real), float(ev.imag), "fast"))
        return rows


def grid_modes(n_cells: int) -> np.ndarray:
    """Discrete phases ``zeta_k = 2 pi k / I`` for ``k = 0 .. I-1``."""
    return 2.0 * np.pi * np.arange(n_cells) / n_cells


def _radius_constant(dist: np.ndarray, scale: np.ndarray, eps: float) -> float:
    mask = scale > 1e-12 * max(1.0, float(np.max(scale, initial=0.0)))
    if not np.any(mask):
        return 0.0
    return float(np.max(dist[mask] * math.sqrt(eps) / scale[mask]))


def analytic_spectrum(symbols: SymbolSet, *, C: float | None = None, safety: float = 1.0) -> SpectrumReport:
    """Roots of the secular equation for every mode in ``symbols``.

    ``C`` is the radius constant of the disk bound; when omitted it is fitted
    as ``max (cluster distance) sqrt(eps) / (|xi| + |gamma|)`` over the
    nondegenerate modes (times ``safety``).
    """
    eps = symbols.epsilon
    D_all = np.atleast_2d(symbol_diagonal(symbols).reshape(-1, 4))
    zeta = np.atleast_1d(symbols.zeta).ravel()
    m = linear_maxwellian_weights(symbols.lam, symbols.theta)
    eig = np.empty_like(D_all)
    ok_all = True
    for k in range(D_all.shape[0]):
        eig[k], ok = secular_roots(D_all[k], m, eps)
        ok_all = ok_all and ok
    dominant = eig[:, 0]
    fast = eig[:, 1:]
    center = -1.0 / eps
    dist = np.max(np.abs(fast - center), axis=1)
    scale = np.abs(np.atleast_1d(symbols.xi).ravel()) + np.abs(np.atleast_1d(symbols.gamma).ravel())
    if C is None:
        C = safety * _radius_constant(dist, scale, eps)
    radius = C * scale / math.sqrt(eps)
    rouche = 0.5 * np.abs(D_all.sum(axis=1)) + 1.0
    tiny = 1e-9 * max(1.0, float(np.max(scale, initial=0.0)))
    # rounding floor of the fast eigenvalues: |kappa| ~ 1/eps carries ~1e-16/eps absolute error
    floor = 64.0 * np.finfo(float).eps * abs(center)
    degenerate = (scale <= tiny) & (dist > floor)
    inside = np.where(degenerate, dist <= rouche * (1 + 1e-9), dist <= radius * (1 + 1e-9) + floor)
    pred = dominant_eigenvalue_asymptotic(symbols)
    notes = []
    if not ok_all:
        notes.append("secular iteration did not converge for some modes; dense eigensolver used")
    return SpectrumReport(
        zeta=zeta,
        epsilon=eps,
        eigenvalues=eig,
        dominant=dominant,
        fast=fast,
        fast_cluster_center=center,
        C=float(C),
        radius_bound=radius,
        rouche_radius=rouche,
        degenerate=degenerate,
        within_bound=bool(np.all(inside)),
        asymptotic_prediction=np.atleast_1d(pred["kappa"]).ravel(),
        literal_prediction=np.atleast_1d(pred["kappa_literal"]).ravel(),
        method="secular" if ok_all else "dense",
        converged=ok_all,
        notes=notes,
    )


def dominant_eigenvalue_asymptotic(symbols: SymbolSet) -> dict[str, np.ndarray]:
    """Small-eps expansion of the dominant eigenvalue (centred parabolic stencil, ``xi = 0``).

    Returns a dict with

    * ``kappa``: the two-term expansion ``kappa0 + eps kappa1`` of the
      dominant eigenvalue of ``Kmat``, where, with ``g = sqrt(eps) gamma``,
      ``a_j`` the hyperbolic symbols and ``m_j`` their Maxwellian weights,
      ``kappa0 = sum m_j a_j - g^2/theta^2`` and
      ``kappa1 = sum m_j (kappa0 - a_j)^2 + (kappa0^2 + 3 g^2 kappa0 + g^4)/theta^2``
      and the remainder is O(eps^2);
    * ``z``: the matching eigenvalue ``1 + eps kappa`` of ``Amat``;
    * ``x1``, ``y1``: the leading coefficients ``(1 - 1/theta^2) alpha + xi/(theta^2 sqrt(eps))``
      and ``beta/lam``;
    * ``x2``, ``y2`` and ``kappa_literal = x1 + i y1 + eps (x2 + i y2)``: the
      literal second-order coefficients of the classical derivation, kept for
      comparison (they carry a ``gamma^2/eps`` term and diverge as eps -> 0).
    """
    eps = symbols.epsilon
    lam, theta = symbols.lam, symbols.theta
    t2 = theta * theta
    a, b, xi, gam = symbols.alpha, symbols.beta, symbols.xi, symbols.gamma
    m = linear_maxwellian_weights(lam, theta)
    a_minus = a - 1j * b
    a_plus = a + 1j * b
    g2 = eps * gam * gam
    kappa0 = m[0] * a_minus + m[1] * a_plus - g2 / t2
    kappa1 = m[0] * (kappa0 - a_minus) ** 2 + m[1] * (kappa0 - a_plus) ** 2 + (
        kappa0**2 + 3.0 * g2 * kappa0 + g2 * g2
    ) / t2
    kappa = kappa0 + eps * kappa1
    x1 = (1.0 - 1.0 / t2) * a + xi / (t2 * math.sqrt(eps))
    y1 = b / lam
    x2 = 2.0 * (x1**2 - y1**2) + 2.0 * (1.0 - 1.0 / t2) * (a**2 - b**2) + 2.0 / (eps * t2) * (xi**2 - gam**2)
    y2 = 4.0 * x1 * y1 + 2.0 / lam * a * b
    literal = x1 + 1j * y1 + eps * (x2 + 1j * y2)
    return {
        "kappa": kappa,
        "kappa0": kappa0,
        "kappa1": kappa1,
        "z": 1.0 + eps * kappa,
        "x1": x1,
        "y1": y1,
        "x2": x2,
        "y2": y2,
        "kappa_literal": literal,
        "z_literal": 1.0 + eps * (x1 + 1j * y1) + eps**2 * (x2 + 1j * y2),
    }


# ----------------------------------------------------------------------------
# numerical spectrum of the semi-discrete operator


def numerical_jacobian(rhs, base: np.ndarray, *, rel_step: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian with per-entry step ``rel_step (1 + |f|)``."""
    base = np.asarray(base, dtype=float)
    f0 = rhs(base).ravel()
    n = base.size
    jac = np.empty((n, n))
    flat = base.ravel()
    for j in range(n):
        h = rel_step * (1.0 + abs(flat[j]))
        pert = flat.copy()
        pert[j] += h
        jac[:, j] = (rhs(pert.reshape(base.shape)).ravel() - f0) / h
    return jac


@dataclass
class NumericalSpectrum:
    eigenvalues: np.ndarray
    dominant: np.ndarray
    fast: np.ndarray
    epsilon: float
    jacobian_norm: float
    condition: float | None = None

    def to_rows(self) -> list[tuple[float, float, str]]:
        rows = [(float(e.real), float(e.imag), "dominant") for e in self.dominant]
        rows += [(float(e.real), float(e.imag), "fast") for e in self.fast]
        return rows


def numerical_spectrum(
    model: KineticModel,
    scheme: SchemeSpec,
    grid: Grid,
    base_state: np.ndarray | None = None,
    *,
    boundary: str = "periodic",
    rel_step: float = 1e-7,
) -> NumericalSpectrum:
    """Eigenvalues of the forward-difference Jacobian of the semi-discrete operator.

    Eigenvalues with real part above ``-1/(2 eps)`` are labelled dominant.
    """
    n_unknowns = model.n_velocities * model.n_components * grid.n_cells
    if n_unknowns > 200 * max(model.n_velocities, 4) * model.n_components:
        raise ParameterError(f"{n_unknowns} unknowns is too many for a dense eigensolve")
    op = SemiDiscreteOperator(model, grid, scheme, boundary)
    shape = (model.n_velocities, model.n_components) + grid.shape
    base = np.zeros(shape) if base_state is None else np.asarray(base_state, dtype=float).reshape(shape)
    jac = numerical_jacobian(op, base, rel_step=rel_step)
    try:
        ev = np.linalg.eigvals(jac)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is rare
        cond = float(np.linalg.cond(jac))
        raise RuntimeError(f"eigensolver failed (condition number {cond:.3g})") from exc
    cut = -0.5 / model.epsilon
    return NumericalSpectrum(
        eigenvalues=ev,
        dominant=ev[ev.real > cut],
        fast=ev[ev.real <= cut],
        epsilon=model.epsilon,
        jacobian_norm=float(np.linalg.norm(jac, 2)),
    )


def match_spectra(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Optimal one-to-one matching of two eigenvalue sets; returns ``|a_i - b_pi(i)|``."""
    a = np.ravel(a)
    b = np.ravel(b)
    if a.size != b.size:
        raise ValueError("spectra of different sizes")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c]


# ----------------------------------------------------------------------------
# amplification factors and stability regions


def _extrapolation(Delta_t: float, delta_t: float, K: int) -> float:
    if not delta_t > 0:
        raise ParameterError("delta_t must be positive")
    return (Delta_t - (K + 1) * delta_t) / delta_t


def pfe_amplification(tau, Delta_t: float, delta_t: float, K: int):
    """``sigma(tau) = ((M + 1) tau - M) tau^K`` with ``M = (Delta_t - (K+1) delta_t)/delta_t``.

    This is the outer multiplier of projective forward Euler when each inner
    step multiplies by ``tau``: the last two inner iterates are ``tau^{K+1}``
    and ``tau^K``.
    """
    M = _extrapolation(Delta_t, delta_t, K)
    tau = np.asarray(tau, dtype=complex)
    return ((M + 1.0) * tau - M) * tau**K


def prk_amplification(tau, tableau: ButcherTableau | str | int, Delta_t: float, delta_t: float, K: int):
    """Outer multiplier of a projective Runge--Kutta step on ``y' = lambda y``.

    With ``M_s = (c_s Delta_t - (K+1) delta_t)/delta_t`` and scaled slopes
    ``q_s = delta_t k_s``::

        q_1 = (tau - 1) tau^K
        q_s = (tau - 1) tau^K (tau^{K+1} + M_s sum_l (a_sl / c_s) q_l)
        sigma = tau^{K+1} + M sum_s b_s q_s
    """
    tab = get_tableau(tableau)
    if np.any(tab.c[1:] == 0.0):
        raise TableauError("c_s = 0 beyond the first stage")
    tau = np.asarray(tau, dtype=complex)
    M = _extrapolation(Delta_t, delta_t, K)
    tk = tau**K
    base = tk * tau
    damp = (tau - 1.0) * tk
    q = [damp]
    for s in range(1, tab.stages):
        Ms = (tab.c[s] * Delta_t - (K + 1) * delta_t) / delta_t
        combo = sum((tab.a[s, l] / tab.c[s]) * q[l] for l in range(s))
        q.append(damp * (base + Ms * combo))
    total = sum(tab.b[s] * q[s] for s in range(tab.stages))
    return base + M * total


def stability_disks(ratio: float, K: int) -> tuple[tuple[float, float], tuple[float, float]]:
    """``((centre1, radius1), (centre2, radius2))``: the disks ``D(1 - 1/r, 1/r)`` and ``D(0, r^{-1/K})``."""
    inv = 1.0 / ratio
    return (1.0 - inv, inv), (0.0, inv ** (1.0 / K))


def graded_axis(lo: float, hi: float, n: int, clusters: Sequence[tuple[float, float, int]] = ()) -> np.ndarray:
    """Uniform axis on ``[lo, hi]`` merged with fine uniform sub-axes ``(a, b, n)``."""
    parts = [np.linspace(lo, hi, n)]
    for a, b, k in clusters:
        parts.append(np.linspace(a, b, k))
    return np.unique(np.concatenate(parts))


@dataclass
class StabilityRaster:
    """Boolean stability raster over a (possibly graded) grid of complex ``tau``."""

    re: np.ndarray
    im: np.ndarray
    stable: np.ndarray  # shape (len(im), len(re))
    method: str
    ratio: float
    K: int

    @property
    def n_components(self) -> int:
        return count_components(self.stable)

    def contour_points(self) -> np.ndarray:
        """Stable pixels with at least one unstable 4-neighbour, as complex numbers."""
        s = self.stable
        pad = np.pad(s, 1, constant_values=False)
        interior = pad[1:-1, 1:-1] & pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
        edge = s & ~interior
        iy, ix = np.nonzero(edge)
        return self.re[ix] + 1j * self.im[iy]

    def to_rows(self) -> list[tuple[float, float, int]]:
        R, I = np.meshgrid(self.re, self.im)
        return list(zip(R.ravel().tolist(), I.ravel().tolist(), self.stable.ravel().astype(int).tolist()))


def count_components(mask: np.ndarray) -> int:
    """Number of 4-connected components of a boolean raster."""
    _, n = ndimage.label(mask)
    return int(n)


def stability_region(
    method: str | ButcherTableau,
    ratio: float,
    K: int,
    window: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0),
    resolution: int | tuple[int, int] = 512,
    *,
    re_axis: np.ndarray | None = None,
    im_axis: np.ndarray | None = None,
    tol: float = 1e-12,
) -> StabilityRaster:
    """Raster of ``{tau : |sigma(tau)| <= 1}`` for PFE (``method='pfe'``) or a PRK tableau.

    ``ratio`` is ``Delta_t/delta_t``.  Explicit ``re_axis``/``im_axis``
    override the uniform window; this is needed when the stable disks are
    much smaller than the window (large ratios).
    """
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    if min(resolution) < 64 and (re_axis is None or im_axis is None):
        raise ParameterError("resolution must be at least 64 x 64")
    re = np.linspace(window[0], window[1], resolution[0]) if re_axis is None else np.asarray(re_axis, float)
    im = np.linspace(window[2], window[3], resolution[1]) if im_axis is None else np.asarray(im_axis, float)
    tau = re[None, :] + 1j * im[:, None]
    delta_t = 1.0
    Delta_t = float(ratio)
    name = method if isinstance(method, str) else method.name
    if isinstance(method, str) and method.lower() in ("pfe", "euler"):
        sigma = pfe_amplification(tau, Delta_t, delta_t, K)
        name = "pfe"
    else:
        sigma = prk_amplification(tau, method, Delta_t, delta_t, K)
    stable = np.abs(sigma) <= 1.0 + tol
    return StabilityRaster(re=re, im=im, stable=stable, method=str(name), ratio=float(ratio), K=int(K))


def spectral_gap(report: SpectrumReport) -> float:
    """Smallest real-part distance between the dominant and fast clusters."""
    return float(np.min(report.dominant.real) - np.max(report.fast.real))


__all__ += ["NumericalSpectrum", "spectral_gap"]
