"""Limiting covariances of SGD iterates and a Monte-Carlo check against them.

Convention: with ``H`` the (positive definite) Hessian at the optimum and
``Sigma`` the asymptotic covariance of the gradient noise, the scaled error
``(theta_t - theta*) / sqrt(gamma_t)`` has limiting covariance ``V`` with

    Sigma = H V + V H'                     (gamma_t = t^-alpha, alpha < 1)
    Sigma = (H - I/2) V + V (H - I/2)'     (alpha = 1)

and Polyak-Ruppert averages have ``V' = H^-1 Sigma H^-T``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .avcov import AsymCov

RESIDUAL_TOL = 1e-9


class CltError(ValueError):
    pass


@dataclass(frozen=True)
class CltSpec:
    H: np.ndarray
    Sigma: np.ndarray
    alpha: float = 0.9
    averaged: bool = False
    constant_step: bool = False

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        S = self.Sigma.sigma if isinstance(self.Sigma, AsymCov) else self.Sigma
        S = np.atleast_2d(np.asarray(S, dtype=float))
        if H.shape != S.shape or H.shape[0] != H.shape[1]:
            raise CltError(f"shape mismatch: H {H.shape}, Sigma {S.shape}")
        if np.max(np.abs(H - H.T)) > 1e-10 * max(1.0, np.abs(H).max()):
            raise CltError("H must be symmetric")
        if not self.constant_step and not 0.5 < self.alpha <= 1.0:
            raise CltError("alpha must lie in (1/2, 1]")
        object.__setattr__(self, "H", (H + H.T) / 2)
        object.__setattr__(self, "Sigma", (S + S.T) / 2)

    @property
    def d(self) -> int:
        return self.H.shape[0]


@dataclass
class CltCovariance:
    V: np.ndarray
    regime: str
    alpha: float | None = None
    residual: float = 0.0

    def trace(self) -> float:
        return float(np.trace(self.V))

    def save(self, path: str | Path) -> None:
        path = Path(path)
        np.savetxt(path, self.V, delimiter=",", fmt="%.17g")
        meta = {"regime": self.regime, "alpha": self.alpha, "residual": self.residual}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))


def solve_lyapunov(spec: CltSpec) -> CltCovariance:
    """Non-averaged limit covariance, solved in the eigenbasis of ``H``."""
    lam, Q = np.linalg.eigh(spec.H)
    shift = 1.0 if spec.alpha == 1.0 else 0.0
    denom = lam[:, None] + lam[None, :] - shift
    if np.min(denom) <= 1e-12:
        raise CltError("spec is not Hurwitz: lambda_i + lambda_j too small"
                       + (" (alpha = 1 needs H - I/2 positive definite)" if shift else ""))
    S = Q.T @ spec.Sigma @ Q
    V = Q @ (S / denom) @ Q.T
    V = (V + V.T) / 2
    K = spec.H - 0.5 * shift * np.eye(spec.d)
    res = float(np.linalg.norm(K @ V + V @ K.T - spec.Sigma))
    if res > RESIDUAL_TOL * max(1.0, np.linalg.norm(spec.Sigma)):
        raise CltError(f"Lyapunov residual {res:.3g} exceeds tolerance")
    return CltCovariance(V, "decaying_nonaveraged", spec.alpha, res)


def averaged_covariance(spec: CltSpec) -> CltCovariance:
    """``V' = H^-1 Sigma H^-T`` for averaged iterates (decaying or constant step)."""
    if np.linalg.cond(spec.H) > 1e12:
        raise CltError("H is singular")
    A = np.linalg.solve(spec.H, spec.Sigma)
    V = np.linalg.solve(spec.H, A.T).T
    V = (V + V.T) / 2
    res = float(np.linalg.norm(spec.H @ V @ spec.H.T - spec.Sigma))
    regime = "constant_averaged" if spec.constant_step else "decaying_averaged"
    return CltCovariance(V, regime, None if spec.constant_step else spec.alpha, res)


def limit_covariance(spec: CltSpec) -> CltCovariance:
    return averaged_covariance(spec) if spec.averaged or spec.constant_step else solve_lyapunov(spec)


@dataclass
class CltReport:
    empirical: np.ndarray
    V: np.ndarray
    rel_frobenius: float
    z_scores: np.ndarray
    coverage: np.ndarray
    scaled_mse: float
    replicas: int
    directions: np.ndarray = field(repr=False, default=None)

    def summary(self) -> dict:
        return {"rel_frobenius": self.rel_frobenius, "scaled_mse": self.scaled_mse,
                "trace_V": float(np.trace(self.V)), "replicas": self.replicas,
                "max_abs_z": float(np.max(np.abs(self.z_scores))),
                "coverage": self.coverage.tolist()}


def empirical_clt_check(thetas, theta_star, gamma_t: float, cov: CltCovariance,
                        n_directions: int = 10, seed: int = 0) -> CltReport:
    """Compare an ensemble of final iterates with the predicted covariance.

    ``thetas`` is ``R x d``. The ensemble second moment of
    ``(theta - theta*) / sqrt(gamma_t)`` is set against ``V``; per-coordinate
    z-scores use the Gaussian standard error ``V_ii sqrt(2/R)``. Coverage is the
    fraction of replicas within ``+-2 sqrt(gamma_t w'Vw)`` along each of
    ``n_directions`` random unit vectors ``w``.
    """
    th = np.atleast_2d(np.asarray(thetas, dtype=float))
    if th.shape[0] == 1 and np.ndim(thetas) == 1:
        th = th.T
    R = th.shape[0]
    if R < 30:
        raise CltError(f"R = {R} replicas is underpowered (need >= 30)")
    err = (th - np.asarray(theta_star, dtype=float)) / np.sqrt(gamma_t)
    emp = err.T @ err / R
    V = np.atleast_2d(cov.V)
    nv = np.linalg.norm(V)
    rel = float(np.linalg.norm(emp - V) / nv) if nv > 0 else float(np.linalg.norm(emp))
    dv = np.diag(V)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (np.diag(emp) - dv) / (dv * np.sqrt(2.0 / R))
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(n_directions, V.shape[0]))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    half = 2.0 * np.sqrt(np.einsum("kd,de,ke->k", W, V, W))
    coverage = np.mean(np.abs(err @ W.T) <= half[None, :], axis=0)
    return CltReport(emp, V, rel, z, coverage, float(np.trace(emp)), R, W)


def constant_step_average(values, gamma: float, A: float = 1.0, theta0: float = 0.0) -> float:
    """Polyak-Ruppert average of ``theta_k = theta_{k-1} - gamma (A theta_{k-1} - values_k)``.

    Scalar linear iteration run as a first-order IIR filter; returns the mean of
    ``theta_1..theta_t``.
    """
    x = np.asarray(values, dtype=float)
    rho = 1.0 - gamma * A
    if not -1.0 < rho < 1.0:
        raise CltError("gamma * A must lie in (0, 2) for a stable iteration")
    theta, _ = lfilter([gamma], [1.0, -rho], x, zi=[rho * theta0])
    return float(theta.mean())
