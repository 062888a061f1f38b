"""Random projection ensemble QDA.

One classifier = B independent d x p random matrices, each paired with a
QDA model fitted in its projected d-dimensional space.  Scores aggregate
by averaging the per-class log scores over members, which reproduces every
pairwise averaged discriminant simultaneously; classification is argmax of
the averaged scores.

Member b's matrix is generated from the derived seed mix(master_seed, b)
(b = 1..B), so fitting and scoring are independent of processing order.
If a member's projected covariance is singular (possible under sparse
matrices with, say, an all-zero row), that member redraws its matrix from
mix(master_seed, b, attempt) for attempt = 1, 2, ... up to
``max_regen_retries`` before failing loudly.

A known-parameter (population) mode constructs each member's projected
model from exact moments: projected mean R mu_k and projected covariance
R Sigma_k R', with Sigma_k applied columnwise through a structured handle
so the ambient covariance is never materialized.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import qda
from .dataset import Dataset
from .errors import (
    DimensionMismatch,
    MemberDegenerate,
    NotPositiveDefinite,
    ReducedDimTooLarge,
    SingularCovariance,
)
from .linalg import cholesky
from .randproj import ProjectionFamily, ProjectionMatrix, generate, project, project_many
from .rng import mix

DEFAULT_ENSEMBLE_SIZE = 200
DEFAULT_DIM_CAP = 10


@dataclass(frozen=True)
class RpeConfig:
    """Ensemble hyperparameters.

    ``d = None`` defers to :func:`default_reduced_dim` at fit time.
    """

    B: int = DEFAULT_ENSEMBLE_SIZE
    d: int | None = None
    family: ProjectionFamily = ProjectionFamily.STANDARD_NORMAL
    master_seed: int = 0
    ridge: float = 0.0
    max_regen_retries: int = 100


@dataclass(frozen=True)
class ProjectionMember:
    """One random matrix and the QDA model fitted through it."""

    matrix: ProjectionMatrix
    model: qda.QdaModel


@dataclass(frozen=True)
class RpeModel:
    """Trained ensemble: config (with d resolved) plus B members."""

    config: RpeConfig
    p: int
    class_labels: tuple
    members: tuple


def default_reduced_dim(p: int, n_min: int | None = None) -> int:
    """min(n_min - 1, ceil(log p), 10), dropping n_min when unknown."""
    candidates = [math.ceil(math.log(p)), DEFAULT_DIM_CAP]
    if n_min is not None:
        candidates.append(n_min - 1)
    return max(1, min(candidates))


def member_seed(master_seed: int, b: int, attempt: int = 0) -> int:
    """Seed of member b's matrix; attempt > 0 selects redraw seeds."""
    if attempt == 0:
        return mix(master_seed, b)
    return mix(master_seed, b, attempt)


def _fit_member(matrix, projected_rows, groups_idx, n_total, ridge):
    groups = [(label, projected_rows[idx]) for label, idx in groups_idx]
    return qda.fit_grouped(groups, n_total, ridge)


def rpe_fit(data: Dataset, config: RpeConfig) -> RpeModel:
    """Fit the ensemble on labeled data.

    For each member the training rows are projected once (d x p cost per
    row) and a d-dimensional QDA is fitted on the projected rows, which
    equals using the projected estimators R mu_hat and R Sigma_hat R'
    without ever forming the p x p covariance.
    """
    labels = data.class_labels
    if len(labels) < 2:
        raise ValueError("need at least 2 classes")
    groups_idx = [(label, data.class_indices(label)) for label in labels]
    n_min = min(len(idx) for _, idx in groups_idx)
    d = config.d if config.d is not None else default_reduced_dim(data.p, n_min)
    if d >= n_min:
        raise ReducedDimTooLarge(
            f"reduced dimension {d} needs every class size above it "
            f"(smallest class has {n_min} samples)")
    resolved = replace(config, d=d)

    matrices = [generate(config.family, d, data.p, member_seed(config.master_seed, b))
                for b in range(1, config.B + 1)]
    projected = project_many(matrices, data.features)

    members = []
    for i, b in enumerate(range(1, config.B + 1)):
        matrix, rows = matrices[i], projected[i]
        attempt = 0
        while True:
            try:
                model = _fit_member(matrix, rows, groups_idx, data.n, config.ridge)
                break
            except SingularCovariance as exc:
                attempt += 1
                if attempt > config.max_regen_retries:
                    raise MemberDegenerate(
                        b, f"member {b}: projected covariance still singular "
                           f"after {config.max_regen_retries} redraws ({exc})") from exc
                matrix = generate(config.family, d, data.p,
                                  member_seed(config.master_seed, b, attempt))
                rows = project(matrix, data.features)
        members.append(ProjectionMember(matrix=matrix, model=model))
    return RpeModel(config=resolved, p=data.p,
                    class_labels=tuple(labels), members=tuple(members))


def rpe_scores_rows(model: RpeModel, z_rows: np.ndarray) -> np.ndarray:
    """Averaged per-class scores for each row of an (m, p) array.

    Member contributions accumulate in member-index order, making the
    floating-point result independent of any parallel schedule.
    """
    z_rows = np.asarray(z_rows, dtype=np.float64)
    if z_rows.ndim != 2 or z_rows.shape[1] != model.p:
        raise DimensionMismatch(
            f"rows of shape {z_rows.shape} against model with p={model.p}")
    projected = project_many([m.matrix for m in model.members], z_rows)
    acc = np.zeros((z_rows.shape[0], len(model.class_labels)))
    for i, member in enumerate(model.members):
        acc += qda.class_scores_rows(member.model, projected[i])
    return acc / len(model.members)


def rpe_scores(model: RpeModel, z: np.ndarray) -> np.ndarray:
    """Averaged per-class scores at a single ambient point."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.p,):
        raise DimensionMismatch(
            f"point of shape {z.shape} against model with p={model.p}")
    return rpe_scores_rows(model, z[None, :])[0]


def rpe_classify(model: RpeModel, z: np.ndarray) -> str:
    """Label with the highest averaged score (earliest label wins ties)."""
    return model.class_labels[int(np.argmax(rpe_scores(model, z)))]


def rpe_predict_rows(model: RpeModel, z_rows: np.ndarray) -> list:
    scores = rpe_scores_rows(model, z_rows)
    return [model.class_labels[j] for j in np.argmax(scores, axis=1)]


def _population_member_model(populations, matrix, ridge):
    classes = []
    for k, (prior, mean, cov) in enumerate(populations, start=1):
        mean = np.asarray(mean, dtype=np.float64)
        mu_d = project(matrix, mean)
        rt = matrix.to_dense().T
        projected_cov = project(matrix, cov.matvec(rt).T)
        projected_cov = (projected_cov + projected_cov.T) / 2.0
        if ridge > 0.0:
            projected_cov = projected_cov + ridge * np.eye(matrix.d)
        factor = cholesky(projected_cov)
        classes.append(qda.GaussianClassModel(
            label=str(k), prior=prior, log_prior=math.log(prior),
            mean=mu_d, cov_factor=factor))
    return qda.QdaModel(classes=tuple(classes))


def population_members(populations, p: int, config: RpeConfig):
    """Yield (b, matrix, projected model) for population-mode members,
    applying the same derived-seed redraw policy as the sample fit."""
    d = config.d if config.d is not None else default_reduced_dim(p)
    for b in range(1, config.B + 1):
        attempt = 0
        while True:
            matrix = generate(config.family, d, p,
                              member_seed(config.master_seed, b, attempt))
            try:
                model = _population_member_model(populations, matrix, config.ridge)
                break
            except NotPositiveDefinite as exc:
                attempt += 1
                if attempt > config.max_regen_retries:
                    raise MemberDegenerate(
                        b, f"member {b}: projected population covariance "
                           f"singular after {config.max_regen_retries} redraws") from exc
        yield b, matrix, model


def population_rpe_scores(populations, p: int, config: RpeConfig,
                          z_rows: np.ndarray) -> np.ndarray:
    """Averaged per-class scores under known parameters for each row of
    ``z_rows``; members stream one at a time, so memory stays O(d * p)
    regardless of B."""
    z_rows = np.asarray(z_rows, dtype=np.float64)
    single = z_rows.ndim == 1
    if single:
        z_rows = z_rows[None, :]
    if z_rows.shape[1] != p:
        raise DimensionMismatch(
            f"rows of shape {z_rows.shape} against populations with p={p}")
    acc = np.zeros((z_rows.shape[0], len(populations)))
    count = 0
    for _, matrix, model in population_members(populations, p, config):
        acc += qda.class_scores_rows(model, project(matrix, z_rows))
        count += 1
    acc /= count
    return acc[0] if single else acc
