"""Transforms between the multiterminal and remote layouts.

Compressing correlated observations ``Y = X + N`` (multiterminal) and
estimating the hidden part ``X`` from rate-limited looks at ``Y`` (remote)
are two views of one problem. The bridge is the MMSE estimator
``A~ = Sigma_X (Sigma_X + Sigma_N)^-1`` and the covariance offset
``B = Sigma_N + Sigma_N Sigma_X^-1 Sigma_N``:

* an observation-side error covariance ``Sigma_d`` maps to the hidden-side
  error covariance ``A~ (Sigma_d + B) A~^T``;
* the distortion weight and budget map to ``Gamma A~^-1`` and
  ``D + tr(Gamma B Gamma^T)`` (per-coordinate caps shift by the diagonal).

Every mt-prefixed quantity in :mod:`rdregion.regions` can therefore be
recomputed through the transformed remote problem; the two routes are kept
separate so they can be cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInput
from .problems import (
    DistortionCriterion,
    MatrixCrit,
    MultiterminalProblem,
    RemoteProblem,
    SumCrit,
    VectorCrit,
)
from .regions import RegionSpec, region_inner, region_outer
from .waterfill import waterfill_det

__all__ = [
    "TransformData",
    "transform_data",
    "dual_remote",
    "dual_criterion",
    "transform_covariance",
    "mt_det_level",
    "mt_region_inner_transformed",
    "mt_region_outer_transformed",
]


@dataclass(frozen=True)
class TransformData:
    """Matrices linking the multiterminal and remote views of a problem.

    Attributes
    ----------
    estimator : (L, L) ndarray
        ``A~ = Sigma_X (Sigma_X + Sigma_N)^-1``, the MMSE map from Y to X.
    posterior : (L, L) ndarray
        ``(Sigma_X^-1 + Sigma_N^-1)^-1``, the error of that estimate.
    offset : (L, L) ndarray
        ``B = Sigma_N + Sigma_N Sigma_X^-1 Sigma_N``.
    offset_weighted : (L, L) ndarray
        ``Gamma B Gamma^T``.
    offset_diag : (L,) ndarray
        Diagonal of ``offset_weighted`` (per-coordinate budget shifts).
    offset_trace : float
        Trace of ``offset_weighted`` (sum budget shift).
    """

    estimator: np.ndarray
    posterior: np.ndarray
    offset: np.ndarray
    offset_weighted: np.ndarray
    offset_diag: np.ndarray
    offset_trace: float


def transform_data(mp: MultiterminalProblem) -> TransformData:
    """Estimator, posterior and offsets of the layout transform."""
    sigma_x = mp.implied_sigma_x
    sigma_n = np.diag(mp.split_sigma_n)
    estimator = sigma_x @ linalg.inv_sym(mp.sigma_y)
    posterior = linalg.inv_sym(
        linalg.inv_sym(sigma_x) + np.diag(1.0 / mp.split_sigma_n)
    )
    offset = linalg.as_symmetric(sigma_n + sigma_n @ linalg.inv_sym(sigma_x) @ sigma_n)
    weighted = linalg.as_symmetric(mp.gamma @ offset @ mp.gamma.T)
    return TransformData(
        estimator=estimator,
        posterior=posterior,
        offset=offset,
        offset_weighted=weighted,
        offset_diag=np.diag(weighted).copy(),
        offset_trace=float(np.trace(weighted)),
    )


def dual_remote(mp: MultiterminalProblem) -> RemoteProblem:
    """Remote problem whose bounds reproduce the multiterminal ones.

    The hidden source is the implied ``Sigma_X``, observed through the
    identity channel with the split noises; the distortion weight becomes
    ``Gamma A~^-1`` so that weighted distortions line up after the budget
    shift from :func:`dual_criterion`.
    """
    data = transform_data(mp)
    return RemoteProblem(
        sigma_x=mp.implied_sigma_x,
        a_mat=np.eye(mp.l),
        noise_vars=mp.split_sigma_n,
        gamma=mp.gamma @ np.linalg.inv(data.estimator),
    )


def dual_criterion(
    mp: MultiterminalProblem, criterion: DistortionCriterion
) -> DistortionCriterion:
    """Map an observation-side distortion criterion to the remote view."""
    data = transform_data(mp)
    if isinstance(criterion, SumCrit):
        return SumCrit(criterion.d + data.offset_trace)
    if isinstance(criterion, VectorCrit):
        if criterion.d_vec.shape[0] != mp.l:
            raise InvalidInput(f"expected {mp.l} distortion caps")
        return VectorCrit(criterion.d_vec + data.offset_diag)
    if isinstance(criterion, MatrixCrit):
        if criterion.target.shape != (mp.l, mp.l):
            raise InvalidInput("matrix distortion target has the wrong shape")
        mapped = data.estimator @ (criterion.target + data.offset) @ data.estimator.T
        return MatrixCrit(linalg.as_symmetric(mapped))
    raise InvalidInput(f"unknown criterion type {type(criterion).__name__}")


def transform_covariance(mp: MultiterminalProblem, sigma_d) -> np.ndarray:
    """Hidden-side error covariance ``A~ (Sigma_d + B) A~^T``."""
    data = transform_data(mp)
    sigma_d = linalg.as_symmetric(sigma_d)
    if sigma_d.shape != data.offset.shape:
        raise InvalidInput("covariance has the wrong shape")
    return linalg.as_symmetric(
        data.estimator @ (sigma_d + data.offset) @ data.estimator.T
    )


def mt_det_level(mp: MultiterminalProblem, criterion: DistortionCriterion, r) -> float:
    """Offset determinant level ``max det(Sigma_d + B)`` for the outer bound.

    Computed through the transform: the remote-side level of the dual
    problem divided by ``det(A~)^2``. Feeds
    :func:`rdregion.regions.mt_rate_bound_outer`.
    """
    data = transform_data(mp)
    level = waterfill_det(dual_remote(mp), dual_criterion(mp, criterion), r)
    return float(level / np.linalg.det(data.estimator) ** 2)


def mt_region_inner_transformed(mp: MultiterminalProblem, r) -> RegionSpec:
    """Inner region of a multiterminal problem via the remote transform.

    Same floors as :func:`rdregion.regions.mt_region_inner`, computed on
    the dual remote problem; keeping both routes allows cross-validation.
    """
    return region_inner(dual_remote(mp), r)


def mt_region_outer_transformed(
    mp: MultiterminalProblem, criterion: DistortionCriterion, r
) -> RegionSpec:
    """Outer region of a multiterminal problem via the remote transform."""
    dual = dual_remote(mp)
    level = waterfill_det(dual, dual_criterion(mp, criterion), r)
    return region_outer(dual, r, level)
