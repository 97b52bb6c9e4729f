"""Balanced two-factor factorial designs with multivariate responses.

Covers the model ``Y_ijk = mu + alpha_i + beta_j + (alphabeta)_ij + eps_ijk``
with ``d``-dimensional normal errors: the orthogonal sum-of-outer-products
(SOP) decomposition, the matrix-variate Beta Type II test statistics for the
three factor hypotheses, the four classical scalar functionals of their
eigenvalues, the exact univariate variance-component F tests for ``d = 1``,
and a simulator for fixed, random, and null effect configurations.

The factor statistics are eigenvalues of

    ``B = (V_S)^{-1/2} S_S (V_S)^{-1/2}``,  ``R_S = Sigma^{-1/2} R Sigma^{-1/2}``,

with ``S`` the factor SOP and ``V`` the residual SOP.  These eigenvalues equal
those of ``S V^{-1}`` and do not depend on the choice of ``Sigma``, which is
why the identity matrix is the default.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import f as f_dist

from .errors import DegenerateDesign, NotPsd, SingularErrorMatrix, UnbalancedDesign
from .rng import RngStream, as_generator
from .symmat import SpdMat, SymMat, assert_pd, conjugate, sym_inv, sym_inv_sqrt, sym_sqrt

__all__ = [
    "DesignTable",
    "SopDecomposition",
    "StatisticFunctional",
    "NoEffect",
    "RandomEffect",
    "FixedEffect",
    "SimulationSpec",
    "DofMap",
    "sop_arrays",
    "compute_sop",
    "test_statistic_eigs",
    "batched_statistic_eigs",
    "scalar_statistic",
    "univariate_f_test",
    "dof_map",
    "simulate_design",
]

FACTORS = ("A", "B", "AB")


@dataclass(frozen=True)
class DesignTable:
    """Fully balanced ``a x b x n`` layout of ``d``-dimensional responses.

    ``responses`` has shape ``(a, b, n, d)``; balance is structural.  Optional
    level labels are carried along for reporting and play no role in the
    arithmetic.
    """

    responses: np.ndarray
    labels_a: tuple[str, ...] | None = None
    labels_b: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        try:
            y = np.array(self.responses, dtype=float)
        except ValueError as exc:
            raise UnbalancedDesign(f"responses do not form a rectangular (a, b, n, d) array: {exc}") from exc
        if y.ndim != 4:
            raise UnbalancedDesign(f"responses must have shape (a, b, n, d), got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValueError("responses must be finite")
        y.setflags(write=False)
        object.__setattr__(self, "responses", y)
        for name, count in (("labels_a", y.shape[0]), ("labels_b", y.shape[1])):
            labels = getattr(self, name)
            if labels is not None:
                labels = tuple(str(v) for v in labels)
                if len(labels) != count:
                    raise ValueError(f"{name} has {len(labels)} entries for {count} levels")
                object.__setattr__(self, name, labels)

    @property
    def levels_a(self) -> int:
        return self.responses.shape[0]

    @property
    def levels_b(self) -> int:
        return self.responses.shape[1]

    @property
    def reps(self) -> int:
        return self.responses.shape[2]

    @property
    def dim(self) -> int:
        return self.responses.shape[3]


@dataclass(frozen=True)
class SopDecomposition:
    """The four effect SOP matrices plus the total; all symmetric PSD.

    Additivity ``sop_a + sop_b + sop_ab + sop_e == sop_total`` holds to
    floating-point accuracy on every instance.
    """

    sop_a: SymMat
    sop_b: SymMat
    sop_ab: SymMat
    sop_e: SymMat
    sop_total: SymMat

    def factor(self, which: str) -> SymMat:
        return {"A": self.sop_a, "B": self.sop_b, "AB": self.sop_ab}[which]


def sop_arrays(y: np.ndarray) -> tuple[np.ndarray, ...]:
    """SOP matrices for responses of shape ``(..., a, b, n, d)``.

    Returns ``(sop_a, sop_b, sop_ab, sop_e, sop_total)``, each of shape
    ``(..., d, d)``.  Leading axes are treated as independent tables, which is
    what makes large simulation batches cheap.  Means are taken first and
    outer products second, so large response magnitudes do not cancel
    catastrophically.
    """
    y = np.asarray(y, dtype=float)
    a, b, n = y.shape[-4], y.shape[-3], y.shape[-2]
    mean_cell = y.mean(axis=-2)
    mean_a = mean_cell.mean(axis=-2)
    mean_b = mean_cell.mean(axis=-3)
    grand = mean_a.mean(axis=-2)

    dev_a = mean_a - grand[..., None, :]
    dev_b = mean_b - grand[..., None, :]
    dev_ab = (
        mean_cell
        - mean_a[..., :, None, :]
        - mean_b[..., None, :, :]
        + grand[..., None, None, :]
    )
    dev_e = y - mean_cell[..., None, :]
    dev_t = y - grand[..., None, None, None, :]

    sop_a = b * n * np.einsum("...iu,...iv->...uv", dev_a, dev_a)
    sop_b = a * n * np.einsum("...ju,...jv->...uv", dev_b, dev_b)
    sop_ab = n * np.einsum("...iju,...ijv->...uv", dev_ab, dev_ab)
    sop_e = np.einsum("...ijku,...ijkv->...uv", dev_e, dev_e)
    sop_total = np.einsum("...ijku,...ijkv->...uv", dev_t, dev_t)
    return sop_a, sop_b, sop_ab, sop_e, sop_total


def compute_sop(table: DesignTable) -> SopDecomposition:
    """Orthogonal SOP decomposition of a balanced design table."""
    if table.reps < 2:
        raise DegenerateDesign("at least two replicates per cell are needed for a residual SOP")
    parts = sop_arrays(table.responses)
    return SopDecomposition(*(SymMat(p) for p in parts))


class StatisticFunctional(str, enum.Enum):
    """Scalar functionals of the Beta Type II eigenvalues.

    ``WILKS`` rejects in the lower tail; the other three reject in the upper
    tail.
    """

    WILKS = "wilks"
    PILLAI = "pillai"
    HOTELLING_LAWLEY = "hotelling-lawley"
    ROY = "roy"

    @property
    def lower_tail(self) -> bool:
        return self is StatisticFunctional.WILKS


def scalar_statistic(eigs: np.ndarray, functional: StatisticFunctional) -> float | np.ndarray:
    """Apply a classical MANOVA functional to non-negative eigenvalues.

    ``eigs`` may be a single eigenvalue list ``(d,)`` or a batch ``(..., d)``;
    the functional reduces the last axis.

    * wilks: ``prod 1 / (1 + lam)``
    * pillai: ``sum lam / (1 + lam)``
    * hotelling-lawley: ``sum lam``
    * roy: ``max lam``
    """
    lam = np.asarray(eigs, dtype=float)
    functional = StatisticFunctional(functional)
    if functional is StatisticFunctional.WILKS:
        out = np.prod(1.0 / (1.0 + lam), axis=-1)
    elif functional is StatisticFunctional.PILLAI:
        out = np.sum(lam / (1.0 + lam), axis=-1)
    elif functional is StatisticFunctional.HOTELLING_LAWLEY:
        out = np.sum(lam, axis=-1)
    else:
        out = np.max(lam, axis=-1)
    return float(out) if out.ndim == 0 else out


def test_statistic_eigs(numerator: SymMat, sop_e: SymMat, sigma: SpdMat | None = None) -> np.ndarray:
    """Eigenvalues (descending) of the Beta Type II statistic matrix.

    Forms ``B = (V_S)^{-1/2} S_S (V_S)^{-1/2}`` with ``S`` the factor SOP,
    ``V`` the residual SOP, and ``R_S`` the conjugation by ``sigma^{-1}``.
    The result equals the eigenvalue list of ``S V^{-1}`` and is invariant to
    the choice of positive definite ``sigma``; ``None`` means the identity.
    Raises :class:`SingularErrorMatrix` when the residual SOP is not positive
    definite (this needs ``a * b * (n - 1) >= d`` observations to hold).
    """
    if sigma is not None:
        if not isinstance(sigma, SpdMat) or sigma.kind != "PD":
            sigma = SpdMat(sigma.array if isinstance(sigma, (SpdMat, SymMat)) else sigma)
        if sigma.kind != "PD":
            raise ValueError("sigma must be positive definite")
        sigma_inv = sym_inv(sigma)
        numerator = conjugate(numerator, sigma_inv)
        sop_e = conjugate(sop_e, sigma_inv)
    if numerator.dim != sop_e.dim:
        raise ValueError("numerator and residual SOP dimensions differ")
    try:
        v = assert_pd(sop_e)
        if v.kind != "PD":
            raise NotPsd("residual SOP is singular")
    except NotPsd as exc:
        raise SingularErrorMatrix(str(exc)) from exc
    w = sym_inv_sqrt(v).array
    b = w @ numerator.array @ w
    eigs = np.linalg.eigvalsh(SymMat(b).array)[::-1]
    return np.maximum(eigs, 0.0)


def batched_statistic_eigs(numerators: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """Identity-sigma statistic eigenvalues for stacks of SOP matrices.

    ``numerators`` and ``residuals`` have shape ``(..., d, d)``; the result is
    ``(..., d)`` descending.  Used by the simulation engines, where running
    ``test_statistic_eigs`` a table at a time would dominate the cost.
    """
    w, v = np.linalg.eigh(residuals)
    if np.any(w <= 0.0):
        raise SingularErrorMatrix("a residual SOP in the batch is singular")
    inv_root = (v * (1.0 / np.sqrt(w))[..., None, :]) @ np.swapaxes(v, -1, -2)
    b = inv_root @ numerators @ inv_root
    eigs = np.linalg.eigvalsh(b)[..., ::-1]
    return np.maximum(eigs, 0.0)


class DofMap(NamedTuple):
    """Degrees of freedom of the four SOP laws in a balanced ``a x b x n`` design."""

    nu_a: int
    nu_b: int
    nu_ab: int
    nu_e: int


def dof_map(a: int, b: int, n: int) -> DofMap:
    """``(a-1, b-1, (a-1)(b-1), ab(n-1))`` with domain validation."""
    a, b, n = int(a), int(b), int(n)
    if a < 2 or b < 2:
        raise ValueError(f"both factors need at least two levels, got a={a}, b={b}")
    if n < 2:
        raise DegenerateDesign(f"at least two replicates per cell are needed, got n={n}")
    return DofMap(a - 1, b - 1, (a - 1) * (b - 1), a * b * (n - 1))


def univariate_f_test(table: DesignTable, which: str) -> tuple[float, float]:
    """Exact variance-component F test for one factor of a ``d = 1`` design.

    ``F = (SOP_X / nu_X) / (SOP_E / nu_E)`` with the upper-tail p-value from
    the ``F(nu_X, nu_E)`` distribution.  In balanced designs this test is
    exact under both the fixed-effects null and the random-effects null.
    """
    if which not in FACTORS:
        raise ValueError(f"which must be one of {FACTORS}, got {which!r}")
    if table.dim != 1:
        raise ValueError(f"the univariate F test needs d = 1, got d = {table.dim}")
    dofs = dof_map(table.levels_a, table.levels_b, table.reps)
    sop = compute_sop(table)
    nu_x = {"A": dofs.nu_a, "B": dofs.nu_b, "AB": dofs.nu_ab}[which]
    num = float(sop.factor(which).array[0, 0])
    den = float(sop.sop_e.array[0, 0])
    f_stat = (num / nu_x) / (den / dofs.nu_e)
    return f_stat, float(f_dist.sf(f_stat, nu_x, dofs.nu_e))


class NoEffect:
    """Marker: the factor contributes nothing to the response."""

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return "NoEffect()"


NO_EFFECT = NoEffect()


@dataclass(frozen=True)
class RandomEffect:
    """Zero-mean normal effects with the given covariance (PSD allowed)."""

    cov: SpdMat

    def __post_init__(self) -> None:
        cov = self.cov if isinstance(self.cov, SpdMat) else SpdMat(self.cov)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True)
class FixedEffect:
    """Explicit effect vectors, required to satisfy the identifiability constraints.

    For a main factor ``values`` has shape ``(levels, d)`` with zero column
    means; for the interaction it has shape ``(a, b, d)`` with zero means over
    each row, each column, and overall (checked to ``1e-12`` relative).
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("fixed-effect values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _check_centered(self, axes: tuple[int, ...]) -> None:
        scale = max(1.0, float(np.max(np.abs(self.values))))
        for ax in axes:
            if np.max(np.abs(self.values.mean(axis=ax))) > 1e-12 * scale:
                raise ValueError("fixed-effect vectors must average to zero over each factor index")


Effect = NoEffect | RandomEffect | FixedEffect


@dataclass(frozen=True)
class SimulationSpec:
    """Generator configuration for a balanced two-factor design.

    The three effect slots each take :data:`NO_EFFECT`, a
    :class:`RandomEffect`, or a :class:`FixedEffect`; errors are always iid
    ``N_d(0, error_scale)``.
    """

    levels_a: int
    levels_b: int
    reps: int
    dim: int
    error_scale: SpdMat
    effect_a: Effect = NO_EFFECT
    effect_b: Effect = NO_EFFECT
    effect_ab: Effect = NO_EFFECT

    def __post_init__(self) -> None:
        a, b, n, d = (int(getattr(self, k)) for k in ("levels_a", "levels_b", "reps", "dim"))
        if min(a, b) < 2 or n < 1 or d < 1:
            raise ValueError("need a, b >= 2 and n, d >= 1")
        scale = self.error_scale if isinstance(self.error_scale, SpdMat) else SpdMat(self.error_scale)
        if scale.kind != "PD" or scale.dim != d:
            raise ValueError(f"error_scale must be a {d}x{d} positive definite matrix")
        object.__setattr__(self, "error_scale", scale)
        for name, shape, axes in (
            ("effect_a", (a, d), (0,)),
            ("effect_b", (b, d), (0,)),
            ("effect_ab", (a, b, d), (0, 1)),
        ):
            eff = getattr(self, name)
            if isinstance(eff, FixedEffect):
                if eff.values.shape != shape:
                    raise ValueError(f"{name} values must have shape {shape}, got {eff.values.shape}")
                eff._check_centered(axes)
            elif isinstance(eff, RandomEffect):
                if eff.cov.dim != d:
                    raise ValueError(f"{name} covariance must be {d}x{d}")
            elif not isinstance(eff, NoEffect):
                raise TypeError(f"{name} must be NoEffect, RandomEffect, or FixedEffect")

    @property
    def is_null(self) -> bool:
        """True when no factor contributes anything to the response."""
        for eff in (self.effect_a, self.effect_b, self.effect_ab):
            if isinstance(eff, RandomEffect) and np.any(eff.cov.array):
                return False
            if isinstance(eff, FixedEffect) and np.any(eff.values):
                return False
        return True


def _effect_values(eff: Effect, shape: tuple[int, ...], dim: int, gen: np.random.Generator, size: int) -> np.ndarray:
    """Effect vectors of shape ``(size, *shape, dim)``."""
    if isinstance(eff, NoEffect):
        return np.zeros((size, *shape, dim))
    if isinstance(eff, FixedEffect):
        return np.broadcast_to(eff.values, (size, *shape, dim))
    root = sym_sqrt(eff.cov).array
    return gen.standard_normal((size, *shape, dim)) @ root


def simulate_design(
    spec: SimulationSpec,
    rng: RngStream | np.random.Generator | int,
    size: int | None = None,
) -> DesignTable | np.ndarray:
    """Generate balanced response tables from the two-factor effects model.

    Returns a :class:`DesignTable` for ``size=None``, otherwise a raw
    ``(size, a, b, n, d)`` array of independent tables.  Random effects are
    drawn iid without identifiability constraints per table, as the model
    prescribes; fixed effects must carry the constraints themselves.
    """
    gen = as_generator(rng)
    a, b, n, d = spec.levels_a, spec.levels_b, spec.reps, spec.dim
    m = 1 if size is None else int(size)
    alpha = _effect_values(spec.effect_a, (a,), d, gen, m)
    beta = _effect_values(spec.effect_b, (b,), d, gen, m)
    gamma = _effect_values(spec.effect_ab, (a, b), d, gen, m)
    eps = gen.standard_normal((m, a, b, n, d)) @ sym_sqrt(spec.error_scale).array
    y = (
        alpha[:, :, None, None, :]
        + beta[:, None, :, None, :]
        + gamma[:, :, :, None, :]
        + eps
    )
    if size is None:
        return DesignTable(y[0])
    return y
