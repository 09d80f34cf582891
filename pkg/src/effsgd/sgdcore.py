"""Objective models and SGD-type update rules, vectorised over replicas.

Iterates are stored as ``R x d`` arrays, one row per independent replica,
and every update consumes one index (or batch) per replica.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

BOX_HALF_WIDTH = 10.0


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class StepSchedule:
    """``gamma_t = t^-alpha`` (``kind="poly"``) or a constant ``gamma``."""

    kind: str = "poly"
    alpha: float = 0.9
    gamma: float | None = None

    def __post_init__(self):
        if self.kind == "poly":
            if not 0.5 < self.alpha <= 1.0:
                raise ModelError("alpha must lie in (1/2, 1]")
        elif self.kind == "constant":
            if self.gamma is None or self.gamma <= 0:
                raise ModelError("constant schedule needs gamma > 0")
        else:
            raise ModelError(f"unknown schedule {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.gamma)
        return t ** (-self.alpha)


class ObjectiveModel:
    """``f(theta) = (1/n) sum_i F(theta, i)`` with a known minimiser and Hessian."""

    name = "objective"

    def __init__(self, n: int, d: int):
        self.n, self.d = int(n), int(d)
        self.theta_star = np.zeros(self.d)
        self.hessian = np.eye(self.d)
        self.box = (np.full(self.d, -np.inf), np.full(self.d, np.inf))

    def _finish(self, theta_star, hessian, half_width=BOX_HALF_WIDTH):
        self.theta_star = np.asarray(theta_star, dtype=float).reshape(self.d)
        self.hessian = np.atleast_2d(np.asarray(hessian, dtype=float))
        self.box = (self.theta_star - half_width, self.theta_star + half_width)

    def value(self, theta, i: int) -> float:
        raise NotImplementedError

    def grads(self, thetas: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Gradients ``grad F(thetas[r], idx[r])``, shape ``R x d``."""
        raise NotImplementedError

    def grad_table(self, theta) -> np.ndarray:
        """All component gradients at one point, shape ``n x d``."""
        theta = np.asarray(theta, dtype=float).reshape(1, self.d)
        return self.grads(np.repeat(theta, self.n, axis=0), np.arange(self.n))

    def f(self, theta) -> float:
        return float(np.mean([self.value(theta, i) for i in range(self.n)]))

    def full_grad(self, theta) -> np.ndarray:
        return self.grad_table(theta).mean(axis=0)

    def project(self, thetas: np.ndarray) -> np.ndarray:
        return np.clip(thetas, self.box[0], self.box[1])


class QuadraticScalar(ObjectiveModel):
    """``F(theta, i) = (theta - b_i)^2 / 2``."""

    name = "quadratic_scalar"

    def __init__(self, b):
        b = np.asarray(b, dtype=float).ravel()
        super().__init__(b.size, 1)
        self.b = b
        self._finish([b.mean()], [[1.0]])

    def value(self, theta, i):
        return 0.5 * float((np.ravel(theta)[0] - self.b[i]) ** 2)

    def grads(self, thetas, idx):
        return thetas - self.b[idx][:, None]


def make_quadratic_scalar(b) -> QuadraticScalar:
    return QuadraticScalar(b)


class LogisticRidge(ObjectiveModel):
    """``F(theta, i) = log(1 + exp(-y_i x_i'theta)) + |theta|^2 / 2``."""

    name = "logistic_ridge"

    def __init__(self, X, y, tol: float = 1e-10, max_iter: int = 200):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if not np.all(np.isfinite(X)):
            raise ModelError("features must be finite")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ModelError("labels must be +-1")
        super().__init__(*X.shape)
        self.X, self.y = X, y
        theta = newton_solve(self._grad_f, self._hess_f, np.zeros(self.d), self.f, tol, max_iter)
        self._finish(theta, self._hess_f(theta))

    def value(self, theta, i):
        theta = np.ravel(theta)
        return float(np.logaddexp(0.0, -self.y[i] * self.X[i] @ theta) + 0.5 * theta @ theta)

    def f(self, theta):
        theta = np.ravel(theta)
        return float(np.mean(np.logaddexp(0.0, -self.y * (self.X @ theta))) + 0.5 * theta @ theta)

    def _grad_f(self, theta):
        s = expit(-self.y * (self.X @ theta))
        return -(self.X.T @ (self.y * s)) / self.n + theta

    def _hess_f(self, theta):
        p = expit(self.X @ theta)
        w = p * (1 - p)
        return (self.X.T * w) @ self.X / self.n + np.eye(self.d)

    def grads(self, thetas, idx):
        x = self.X[idx]
        yy = self.y[idx]
        s = expit(-yy * np.einsum("rd,rd->r", x, thetas))
        return -(yy * s)[:, None] * x + thetas


def newton_solve(grad, hess, x0, fun, tol=1e-10, max_iter=200) -> np.ndarray:
    """Damped Newton with Armijo backtracking."""
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(max_iter):
        g = grad(x)
        if np.linalg.norm(g) <= tol:
            return x
        step = np.linalg.solve(hess(x), g)
        fx, s = fun(x), 1.0
        while fun(x - s * step) > fx - 1e-4 * s * (g @ step) and s > 1e-10:
            s *= 0.5
        x = x - s * step
    if np.linalg.norm(grad(x)) <= tol:
        return x
    raise ModelError(f"Newton did not converge in {max_iter} iterations")


def make_logistic_ridge(X, y) -> LogisticRidge:
    return LogisticRidge(X, y)


def synthetic_logistic_data(n: int, p: int = 108, flip: float = 0.1, seed: int = 0):
    """Unit-norm Gaussian features, labels from a planted direction with random flips."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    w = rng.normal(size=p)
    w *= 3.0 / np.linalg.norm(w)
    y = np.where(X @ w >= 0, 1.0, -1.0)
    y[rng.random(n) < flip] *= -1
    return X, y


class SumNonconvex(ObjectiveModel):
    """``F(theta, i) = theta'(a_i a_i' + D_i) theta + b'theta`` with ``sum_i D_i = 0``.

    The aggregate is the convex quadratic with Hessian ``H = (2/n) sum a_i a_i'``,
    so ``theta* = -H^-1 b``; single components may be indefinite.
    """

    name = "sum_nonconvex"

    def __init__(self, a, D, b):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        super().__init__(*a.shape)
        self.a, self.D, self.b = a, np.asarray(D, dtype=float), np.asarray(b, dtype=float)
        self.M = np.einsum("ni,nj->nij", a, a) + self.D
        H = 2.0 * (a.T @ a) / self.n
        if np.linalg.cond(H) > 1e12:
            raise ModelError("sum of a_i a_i' is singular")
        self._finish(-np.linalg.solve(H, self.b), H)

    def value(self, theta, i):
        theta = np.ravel(theta)
        return float(theta @ self.M[i] @ theta + self.b @ theta)

    def grads(self, thetas, idx):
        return 2.0 * np.einsum("rij,rj->ri", self.M[idx], thetas) + self.b

    def indefinite_components(self) -> np.ndarray:
        return np.flatnonzero(np.linalg.eigvalsh(self.M)[:, 0] < 0)


def make_sum_nonconvex(n: int, p: int = 10, seed: int = 0, level: float = 1.1,
                       max_tries: int = 100) -> SumNonconvex:
    """Random instance; each diagonal slot gets ``+level`` on half the components, ``-level`` on the rest."""
    if n % 2:
        raise ModelError("n must be even to split the diagonal perturbations")
    if n < p:
        raise ModelError(f"sum of {n} rank-one terms cannot be invertible in dimension {p}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        a = rng.random((n, p))
        b = rng.random(p)
        signs = np.empty((n, p))
        for j in range(p):
            col = np.full(n, -level)
            col[rng.permutation(n)[: n // 2]] = level
            signs[:, j] = col
        D = np.zeros((n, p, p))
        D[:, np.arange(p), np.arange(p)] = signs
        try:
            return SumNonconvex(a, D, b)
        except ModelError:
            continue
    raise ModelError("could not draw an invertible instance")


def solve_theta_star(model: ObjectiveModel) -> tuple[np.ndarray, np.ndarray]:
    return model.theta_star.copy(), model.hessian.copy()


# -- update rules ------------------------------------------------------------

def stochastic_grad(model: ObjectiveModel, thetas, x, weights=None) -> np.ndarray:
    """``grad G`` for index input (``R``) or batch input (``R x S``, ``-1`` padded).

    ``weights`` holds ``1/(n pi_i)`` for reweighted single-index inputs.
    Batches use ``v(B) = 1_B / |B|`` (uniform batch law).
    """
    x = np.asarray(x)
    if x.ndim == 1:
        g = model.grads(thetas, x)
        if weights is not None:
            g = g * weights[x][:, None]
        return g
    R, S = x.shape
    valid = x >= 0
    rep = np.repeat(thetas, S, axis=0)
    g = model.grads(rep, np.where(valid, x, 0).ravel()).reshape(R, S, -1)
    g = g * valid[:, :, None]
    return g.sum(axis=1) / valid.sum(axis=1)[:, None]


def sgd_step(thetas, x, gamma, model: ObjectiveModel, weights=None) -> np.ndarray:
    """``theta <- Proj(theta - gamma grad G(theta, x))``."""
    return model.project(thetas - gamma * stochastic_grad(model, thetas, x, weights))


@dataclass
class NesterovState:
    theta: np.ndarray
    u: np.ndarray

    @classmethod
    def start(cls, theta0):
        return cls(theta0.copy(), theta0.copy())


def nasgd_step(state: NesterovState, x, gamma, model: ObjectiveModel,
               weights=None, beta: float = 0.5) -> NesterovState:
    if not 0.0 <= beta < 1.0:
        raise ModelError("beta must lie in [0, 1)")
    theta = model.project(state.u - gamma * stochastic_grad(model, state.u, x, weights))
    return NesterovState(theta, theta + beta * (theta - state.theta))


@dataclass
class AdamState:
    theta: np.ndarray
    m: np.ndarray
    v: np.ndarray
    k: int = 0

    @classmethod
    def start(cls, theta0):
        return cls(theta0.copy(), np.zeros_like(theta0), np.zeros_like(theta0), 0)


def adam_step(state: AdamState, x, gamma, model: ObjectiveModel, weights=None,
              a1: float = 0.9, a2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """Bias-corrected moment update; ``k`` counts updates already applied."""
    g = stochastic_grad(model, state.theta, x, weights)
    k = state.k + 1
    m = a1 * state.m + (1 - a1) * g
    v = a2 * state.v + (1 - a2) * g * g
    mh = m / (1 - a1 ** k)
    vh = v / (1 - a2 ** k)
    theta = model.project(state.theta - gamma * mh / (np.sqrt(vh) + eps))
    return AdamState(theta, m, v, k)
