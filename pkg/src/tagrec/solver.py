"""ADMM training of the tag-space encoder.

Minimizes

    ||X + X dm(b) - X E D^T||_F^2 + l1 ||E D^T - dm(b)||_F^2 + l2 ||E||_F^2
    s.t.  diag(E D^T) = b

by alternating exact minimizations over E and b with a dual ascent step on
the multipliers g. The E step is a Sylvester-type solve done in the
eigenbases of X^T X and D^T D, so each iteration is two dense multiplies
and an elementwise product; both eigendecompositions are computed once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .data import TagMatrix
from .errors import NumericalError, ValidationError
from .linalg import SparseBinaryMatrix, SymEig, gram, sym_eig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparams:
    """Solver hyperparameters.

    ``lam2`` must be strictly positive: it keeps every entry of the
    spectral kernel finite even where an eigenvalue product vanishes.
    """

    lam1: float = 1.0
    lam2: float = 1.0
    rho: float = 1.0
    max_iterations: int = 500
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.lam1 < 0:
            raise ValidationError("lam1 must be nonnegative")
        if self.lam2 <= 0:
            raise ValidationError("lam2 must be strictly positive")
        if self.rho <= 0:
            raise ValidationError("rho must be strictly positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")


@dataclass(frozen=True)
class Precomputation:
    """Quantities reused by every iteration: Gram matrices, their
    eigendecompositions and the spectral kernel of the E update."""

    xtx: np.ndarray  # n x n
    xtx_diag: np.ndarray
    d: np.ndarray  # n x t decoder (tags + popularity column)
    dtd: np.ndarray  # t x t
    eig_items: SymEig  # (U, mu) of X^T X
    eig_tags: SymEig  # (V, eta) of D^T D
    kernel: np.ndarray  # n x t, 1 / (eta_j (mu_i + lam1) + lam2)
    hp: Hyperparams


@dataclass
class AdmmState:
    e: np.ndarray  # n x t
    beta: np.ndarray  # n
    gamma: np.ndarray  # n
    iteration: int = 0
    primal_residual: float = np.inf


@dataclass(frozen=True)
class ConvergenceReport:
    iterations: int
    converged: bool
    primal_residual: float
    objective: float


@dataclass(frozen=True)
class EncoderModel:
    """Learned item x tag encoder with its training metadata."""

    e: np.ndarray
    vocabulary: tuple[tuple[str, str], ...]
    hyperparams: Hyperparams
    convergence: ConvergenceReport

    @property
    def n_items(self) -> int:
        return self.e.shape[0]

    @property
    def n_tags(self) -> int:
        return self.e.shape[1]


def _as_dense_decoder(d) -> np.ndarray:
    if isinstance(d, TagMatrix):
        return d.dense()
    return np.asarray(d, dtype=np.float64)


def precompute(x, d, hp: Hyperparams) -> Precomputation:
    """Build the per-training-run invariants from X and the decoder D."""
    return precompute_from_gram(gram(x), d, hp)


def precompute_from_gram(xtx: np.ndarray, d, hp: Hyperparams) -> Precomputation:
    """Variant of :func:`precompute` taking a ready-made X^T X."""
    d = _as_dense_decoder(d)
    xtx = np.asarray(xtx, dtype=np.float64)
    if xtx.shape[0] != xtx.shape[1]:
        raise ValidationError("X^T X must be square")
    if xtx.shape[0] != d.shape[0]:
        raise ValidationError(f"X has {xtx.shape[0]} items but D has {d.shape[0]} rows")
    eig_items = sym_eig(xtx)
    eig_tags = sym_eig(gram(d))
    denom = np.outer(eig_items.values + hp.lam1, eig_tags.values) + hp.lam2
    if not np.all(denom > 0) or not np.all(np.isfinite(denom)):
        raise NumericalError("spectral kernel has nonpositive or nonfinite entries")
    return Precomputation(
        xtx=xtx,
        xtx_diag=np.diag(xtx).copy(),
        d=d,
        dtd=gram(d),
        eig_items=eig_items,
        eig_tags=eig_tags,
        kernel=1.0 / denom,
        hp=hp,
    )


def decoder_diag(e: np.ndarray, d: np.ndarray) -> np.ndarray:
    """diag(E D^T) without forming the n x n product."""
    return np.einsum("ij,ij->i", e, d)


def update_e(
    state: AdmmState, pre: Precomputation, residual_tol: float = 1e-8
) -> np.ndarray:
    """Exact minimization over E via the two-sided eigenbasis transform.

    The result solves (X^T X + l1 I) E D^T D + l2 E = RHS with
    RHS = (X^T X dm(1+b) + rho dm(g+b) + l1 dm(b)) D; the relative residual
    of that system is verified against ``residual_tol``.
    """
    hp = pre.hp
    rhs_left = pre.xtx * (1.0 + state.beta)[None, :]
    diag_add = hp.rho * (state.gamma + state.beta) + hp.lam1 * state.beta
    rhs_left = rhs_left + np.diag(diag_add)
    rhs = rhs_left @ pre.d
    u, v = pre.eig_items.vectors, pre.eig_tags.vectors
    f = u.T @ rhs @ v
    e = u @ (f * pre.kernel) @ v.T

    lhs = pre.xtx @ e @ pre.dtd + hp.lam1 * (e @ pre.dtd) + hp.lam2 * e
    denom = max(1.0, float(np.linalg.norm(rhs)))
    rel = float(np.linalg.norm(lhs - rhs)) / denom
    if rel > residual_tol:
        mu, eta = pre.eig_items.values, pre.eig_tags.values
        raise NumericalError(
            f"E-update residual {rel:.3e} > {residual_tol:.1e} "
            f"(mu range [{mu.min():.3e}, {mu.max():.3e}], "
            f"eta range [{eta.min():.3e}, {eta.max():.3e}])"
        )
    return e


def update_beta(state: AdmmState, pre: Precomputation) -> np.ndarray:
    """Closed-form minimization over b (elementwise)."""
    hp = pre.hp
    ed_diag = decoder_diag(state.e, pre.d)
    xtx_e_diag = np.einsum("ij,ij->i", pre.xtx @ state.e, pre.d)
    num = (xtx_e_diag - pre.xtx_diag) - hp.rho * state.gamma + (hp.lam1 + hp.rho) * ed_diag
    den = pre.xtx_diag + hp.lam1 + 2.0 * hp.rho
    beta = num / den
    if not np.all(np.isfinite(beta)):
        raise NumericalError("nonfinite values in beta update")
    return beta


def update_gamma(state: AdmmState, pre: Precomputation) -> np.ndarray:
    """Dual ascent on the diagonal constraint.

    The multiplier moves along b - diag(E D^T): this is the orientation
    consistent with the signs of the E and beta updates (the opposite step
    makes the iteration diverge).
    """
    gamma = state.gamma + state.beta - decoder_diag(state.e, pre.d)
    if not np.all(np.isfinite(gamma)):
        raise NumericalError("nonfinite values in gamma update")
    return gamma


def objective(e: np.ndarray, beta: np.ndarray, x, d, hp: Hyperparams) -> float:
    """Training loss at (E, b) with b substituted for the suppressed diagonal."""
    return objective_from_gram(e, beta, gram(x), d, hp)


def objective_from_gram(
    e: np.ndarray, beta: np.ndarray, xtx: np.ndarray, d, hp: Hyperparams
) -> float:
    """Training loss evaluated from X^T X only.

    The data term ||X A||_F^2 with A = I + dm(b) - E D^T equals
    tr(A^T X^T X A), so X itself is never needed.
    """
    d = _as_dense_decoder(d)
    a = -(e @ d.T)
    a[np.diag_indices_from(a)] += 1.0 + beta
    data_term = float(np.einsum("ij,ij->", a, xtx @ a))
    penalty = e @ d.T
    penalty[np.diag_indices_from(penalty)] -= beta
    return float(
        data_term + hp.lam1 * np.sum(penalty**2) + hp.lam2 * np.sum(e**2)
    )


def objective_gradient_e(e: np.ndarray, beta: np.ndarray, x, d, hp: Hyperparams) -> np.ndarray:
    """Analytic gradient of :func:`objective` with respect to E."""
    d = _as_dense_decoder(d)
    xd = x.to_dense() if isinstance(x, SparseBinaryMatrix) else np.asarray(x, dtype=np.float64)
    resid = xd + xd * beta[None, :] - xd @ e @ d.T
    penalty = e @ d.T - np.diag(beta)
    return -2.0 * xd.T @ resid @ d + 2.0 * hp.lam1 * penalty @ d + 2.0 * hp.lam2 * e


def train(
    x,
    decoder,
    hp: Hyperparams,
    xtx: np.ndarray | None = None,
    residual_tol: float = 1e-8,
) -> EncoderModel:
    """Run ADMM from the zero start until the primal residual and the dual
    step both fall below ``hp.tolerance`` or ``hp.max_iterations`` is hit.

    ``decoder`` is a :class:`~tagrec.data.TagMatrix` or a dense array.
    Passing ``xtx`` skips the Gram product (the rest of the run only ever
    touches X^T X, so cost is independent of the user count).
    """
    d = _as_dense_decoder(decoder)
    pre = precompute_from_gram(xtx, d, hp) if xtx is not None else precompute(x, d, hp)
    n, t = d.shape
    state = AdmmState(
        e=np.zeros((n, t)), beta=np.zeros(n), gamma=np.zeros(n)
    )
    converged = False
    for k in range(hp.max_iterations):
        state.e = update_e(state, pre, residual_tol=residual_tol)
        state.beta = update_beta(state, pre)
        new_gamma = update_gamma(state, pre)
        dual_step = float(np.max(np.abs(new_gamma - state.gamma), initial=0.0))
        state.gamma = new_gamma
        state.iteration = k + 1
        state.primal_residual = float(
            np.max(np.abs(decoder_diag(state.e, pre.d) - state.beta), initial=0.0)
        )
        if state.primal_residual <= hp.tolerance and dual_step <= hp.tolerance:
            converged = True
            break
    if not converged:
        log.warning(
            "ADMM did not converge in %d iterations (primal residual %.3e)",
            hp.max_iterations,
            state.primal_residual,
        )
    obj = objective_from_gram(state.e, state.beta, pre.xtx, d, hp)
    vocabulary = decoder.vocabulary if isinstance(decoder, TagMatrix) else tuple(
        ("tag", str(j)) for j in range(t)
    )
    report = ConvergenceReport(
        iterations=state.iteration,
        converged=converged,
        primal_residual=state.primal_residual,
        objective=float(obj),
    )
    return EncoderModel(
        e=state.e, vocabulary=vocabulary, hyperparams=hp, convergence=report
    )
