"""
Model logistyczno-normalny z losowym wyrazem wolnym eksperta.

MODEL:
═══════════════════════════════════════════════════════════════════

    logit P(Y_ij = 1 | β_j, b_i) = β_j + b_i,    b_i ~ N(0, σ²)

    β_j - efekt stały klastra j
    b_i - efekt losowy eksperta i (całkowany, nigdy nie estymowany)
    σ²  - wariancja między ekspertami, parametryzowana przez
          log_sigma:  σ² = exp(2·log_sigma)

WIARYGODNOŚĆ BRZEGOWA (z wagami częstości ω_i):
═══════════════════════════════════════════════════════════════════

    ℓ(β, σ) = Σ_i ω_i · log ∫ Π_{j∈Λ_i} π_ij^y (1-π_ij)^(1-y) φ(b|0,σ²) db

    π_ij = logistic(β_j + b). Waga ω_i działa jak WYKŁADNIK wkładu
    eksperta - dokładnie jak ω_i-krotna replikacja jego wektora ocen.
    Bez wag ω_i = 1.

OBLICZENIA:
═══════════════════════════════════════════════════════════════════

    1. Węzły efektu losowego b_iq (n_experts × Q):
       • zwykła reguła:      b_q = σ√2·x_q (te same dla każdego eksperta)
       • reguła adaptacyjna: b_iq = b̂_i + √2·κ·s_i·x_q, gdzie b̂_i to moda
         warunkowa, s_i = 1/√(-h''(b̂_i)) lokalna skala, a κ = ADAPTIVE_SPREAD
         rozciąga węzły na ogony (ekspert z jedną oceną mniejszościową ma
         ogon wykładniczy, dłuższy niż wynika z krzywizny w modzie)
    2. Log-wiarygodność wpisu w węźle: y·η - log(1+e^η), η = β_j + b_iq
    3. Suma po wpisach eksperta (np.add.reduceat po segmentach)
    4. logsumexp po węzłach - iloczyny tysięcy ocen nie mają underflow
    5. Suma ważona po ekspertach w ustalonej kolejności (bit-stabilna)

POCHODNE:
    Gradient i hesjan liczone analitycznie przez różniczkowanie pod
    sumą kwadratury. Przy regule adaptacyjnej centra b̂_i i skale s_i
    są traktowane jako stałe w bieżącym punkcie.

Wektor parametrów ma układ (β w kolejności data.cluster_index, log_sigma).
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import sparse
from scipy.special import expit, logsumexp

from ..core.errors import InvalidArgumentError, ModelMismatchError, NumericOverflowError
from .quadrature import QuadratureRule
from .ratings import RatingsTable

# Rozciągnięcie węzłów adaptacyjnych względem skali Laplace'a. Przy κ ≤ 1.6
# odstęp węzłów w centrum nadal rozdziela gęstość a posteriori
ADAPTIVE_SPREAD = 1.25


@dataclass(frozen=True)
class ModelParams:
    """
    Parametry modelu.

    Attributes:
        beta (Dict[int, float]): cluster_id -> β_j
        log_sigma (float): log σ (bez ograniczeń)

    Example:
        >>> params = ModelParams(beta={1: 0.5, 2: -1.0}, log_sigma=0.0)
        >>> params.sigma2
        1.0
    """
    beta: Dict[int, float]
    log_sigma: float

    def __post_init__(self):
        sigma2 = float(np.exp(2.0 * self.log_sigma)) if np.isfinite(self.log_sigma) else float("nan")
        if not (np.isfinite(sigma2) and sigma2 > 0.0):
            raise InvalidArgumentError(
                f"log_sigma={self.log_sigma} gives sigma2 outside (0, inf)"
            )

    @property
    def sigma2(self) -> float:
        """σ² = exp(2·log_sigma)."""
        return float(np.exp(2.0 * self.log_sigma))

    def beta_vector(self, cluster_index) -> np.ndarray:
        """
        β w kolejności podanego indeksu klastrów.

        Raises:
            ModelMismatchError: Brak β dla któregoś klastra
        """
        missing = [int(c) for c in cluster_index if int(c) not in self.beta]
        if missing:
            raise ModelMismatchError(
                f"No beta for rated cluster(s) {missing[:10]}"
                + (" ..." if len(missing) > 10 else "")
            )
        return np.array([self.beta[int(c)] for c in cluster_index], dtype=float)

    def to_vector(self, cluster_index) -> np.ndarray:
        """Wektor (β..., log_sigma)."""
        return np.append(self.beta_vector(cluster_index), self.log_sigma)

    @classmethod
    def from_vector(cls, cluster_index, vector: np.ndarray) -> "ModelParams":
        """Odwrotność to_vector()."""
        vector = np.asarray(vector, dtype=float)
        return cls(
            beta={int(c): float(v) for c, v in zip(cluster_index, vector[:-1])},
            log_sigma=float(vector[-1]),
        )


@dataclass
class LikelihoodTerms:
    """
    Wartość log-wiarygodności z (opcjonalnie) pochodnymi.

    Attributes:
        loglik (float): ℓ
        gradient (Optional[np.ndarray]): ∂ℓ/∂(β, log_sigma)
        hessian (Optional[np.ndarray]): ∂²ℓ (symetryczny)
    """
    loglik: float
    gradient: Optional[np.ndarray] = None
    hessian: Optional[np.ndarray] = None


@dataclass
class _NodeLayout:
    """Węzły efektu losowego i ich zależność od log_sigma."""
    b: np.ndarray           # (n, Q)
    log_w: np.ndarray       # (n, Q)
    b_tau: np.ndarray       # ∂b/∂τ
    b_tautau: np.ndarray    # ∂²b/∂τ²
    lw_tau: np.ndarray      # ∂log_w/∂τ
    lw_tautau: np.ndarray   # ∂²log_w/∂τ²
    extra: Dict[str, np.ndarray] = field(default_factory=dict)


# ═══════════════════════════════════════════════════════════════════════════
# API PUBLICZNE
# ═══════════════════════════════════════════════════════════════════════════

def log_likelihood(params: ModelParams, data: RatingsTable, rule: QuadratureRule) -> float:
    """
    Brzegowa log-wiarygodność ℓ(β, σ) z wagami ω_i.

    Raises:
        ModelMismatchError: Brak β dla ocenianego klastra
        NumericOverflowError: Wartość nieskończona / NaN
    """
    beta = params.beta_vector(data.cluster_index)
    return evaluate(beta, params.log_sigma, data, rule, order=0).loglik


def log_likelihood_gradient(params: ModelParams, data: RatingsTable, rule: QuadratureRule) -> np.ndarray:
    """
    Analityczny gradient ℓ względem (β w kolejności cluster_index, log_sigma).
    """
    beta = params.beta_vector(data.cluster_index)
    return evaluate(beta, params.log_sigma, data, rule, order=1).gradient


def log_likelihood_hessian(params: ModelParams, data: RatingsTable, rule: QuadratureRule) -> np.ndarray:
    """
    Analityczny hesjan ℓ (macierz obserwowanej informacji ze znakiem minus).
    """
    beta = params.beta_vector(data.cluster_index)
    return evaluate(beta, params.log_sigma, data, rule, order=2).hessian


def numeric_hessian(
    params: ModelParams,
    data: RatingsTable,
    rule: QuadratureRule,
    step: float = 1e-5,
) -> np.ndarray:
    """
    Hesjan z różnic centralnych analitycznego gradientu.

    Służy do kontroli log_likelihood_hessian (selfcheck, testy).
    """
    theta = params.to_vector(data.cluster_index)
    p = len(theta)
    hess = np.zeros((p, p))
    for k in range(p):
        up, down = theta.copy(), theta.copy()
        up[k] += step
        down[k] -= step
        g_up = evaluate(up[:-1], up[-1], data, rule, order=1).gradient
        g_down = evaluate(down[:-1], down[-1], data, rule, order=1).gradient
        hess[:, k] = (g_up - g_down) / (2.0 * step)
    return 0.5 * (hess + hess.T)


def bernoulli_log_likelihood(params: ModelParams, data: RatingsTable) -> float:
    """
    Log-wiarygodność niezależnych prób Bernoulliego z p_ij = logistic(β_j).

    Granica ℓ przy log_sigma -> -∞.
    """
    beta = params.beta_vector(data.cluster_index)
    eta = beta[data.cluster_pos]
    terms = data.ratings * eta - np.logaddexp(0.0, eta)
    per_expert = np.add.reduceat(terms, data.expert_starts) if data.n_entries else np.zeros(0)
    return float(np.dot(data.weight_vector, per_expert))


# ═══════════════════════════════════════════════════════════════════════════
# RDZEŃ OBLICZENIOWY
# ═══════════════════════════════════════════════════════════════════════════

def evaluate(
    beta: np.ndarray,
    log_sigma: float,
    data: RatingsTable,
    rule: QuadratureRule,
    order: int = 0,
) -> LikelihoodTerms:
    """
    Liczy ℓ i pochodne do rzędu `order` (0, 1 albo 2).

    Args:
        beta: β w kolejności data.cluster_index
        log_sigma: log σ
        data: Tabela ocen
        rule: Reguła kwadratury
        order: 0 = wartość, 1 = + gradient, 2 = + hesjan
    """
    beta = np.asarray(beta, dtype=float)
    n_clusters = data.n_clusters
    if len(beta) != n_clusters:
        raise ModelMismatchError(f"Expected {n_clusters} betas, got {len(beta)}")

    if data.n_entries == 0:
        return LikelihoodTerms(
            loglik=0.0,
            gradient=np.zeros(n_clusters + 1) if order >= 1 else None,
            hessian=np.zeros((n_clusters + 1, n_clusters + 1)) if order >= 2 else None,
        )

    sigma2 = float(np.exp(2.0 * log_sigma))
    if not (np.isfinite(sigma2) and sigma2 > 0.0):
        raise NumericOverflowError(f"log_sigma={log_sigma} gives sigma2={sigma2}")

    y = data.ratings.astype(float)[:, None]
    omega = data.weight_vector
    e_pos, c_pos, starts = data.expert_pos, data.cluster_pos, data.expert_starts

    layout = _node_layout(beta, log_sigma, data, rule)

    with np.errstate(over="ignore", invalid="ignore"):
        eta = beta[c_pos][:, None] + layout.b[e_pos]                   # (M, Q)
        node_ll = y * eta - np.logaddexp(0.0, eta)
        a = np.add.reduceat(node_ll, starts, axis=0) + layout.log_w     # (n, Q)
        log_int = logsumexp(a, axis=1)                                   # (n,)
        loglik = float(np.dot(omega, log_int))

    if not np.isfinite(loglik):
        raise NumericOverflowError(
            f"Non-finite log-likelihood at log_sigma={log_sigma:.4g}, "
            f"max|beta|={float(np.max(np.abs(beta))):.4g}"
        )
    if order == 0:
        return LikelihoodTerms(loglik=loglik)

    # ─────────────────────────────────────────────────────────────────────
    # GRADIENT
    # ─────────────────────────────────────────────────────────────────────
    post = np.exp(a - log_int[:, None])                 # wagi a posteriori węzłów
    s = expit(eta)
    resid = y - s                                        # ∂ll/∂η
    post_e = post[e_pos]
    g_entry = np.sum(post_e * resid, axis=1)             # ∂log_int_i/∂β_j dla wpisu
    w_entry = omega[e_pos]
    grad_beta = np.bincount(c_pos, weights=w_entry * g_entry, minlength=n_clusters)

    resid_sum = np.add.reduceat(resid, starts, axis=0)   # E_iq
    d_tau = resid_sum * layout.b_tau + layout.lw_tau     # ∂A/∂τ
    t_expert = np.sum(post * d_tau, axis=1)
    grad_tau = float(np.dot(omega, t_expert))

    gradient = np.append(grad_beta, grad_tau)
    if not np.all(np.isfinite(gradient)):
        raise NumericOverflowError("Non-finite gradient")
    if order == 1:
        return LikelihoodTerms(loglik=loglik, gradient=gradient)

    # ─────────────────────────────────────────────────────────────────────
    # HESJAN
    # ─────────────────────────────────────────────────────────────────────
    n_experts, n_nodes = post.shape
    v = s * (1.0 - s)                                    # -∂²ll/∂η²

    diag_part = -np.bincount(c_pos, weights=w_entry * np.sum(post_e * v, axis=1),
                             minlength=n_clusters)

    # Σ_i ω_i Σ_q π_iq R_ijq R_ikq  przez rzadkie Zᵀ·diag(ω π)·Z
    rows = (e_pos[:, None] * n_nodes + np.arange(n_nodes)[None, :]).ravel()
    cols = np.repeat(c_pos, n_nodes)
    z = sparse.csr_matrix((resid.ravel(), (rows, cols)), shape=(n_experts * n_nodes, n_clusters))
    node_weight = (omega[:, None] * post).ravel()
    cross_nodes = (z.T @ z.multiply(node_weight[:, None]).tocsr()).toarray()

    # Σ_i ω_i g_ij g_ik
    g_mat = sparse.csr_matrix((g_entry, (e_pos, c_pos)), shape=(n_experts, n_clusters))
    cross_mean = (g_mat.T @ g_mat.multiply(omega[:, None]).tocsr()).toarray()

    h_bb = cross_nodes - cross_mean
    h_bb[np.diag_indices(n_clusters)] += diag_part

    b_tau_e = layout.b_tau[e_pos]
    h_entry = np.sum(post_e * (-v * b_tau_e + resid * d_tau[e_pos]), axis=1) - g_entry * t_expert[e_pos]
    h_bt = np.bincount(c_pos, weights=w_entry * h_entry, minlength=n_clusters)

    v_sum = np.add.reduceat(v, starts, axis=0)           # V_iq
    d2_tau = resid_sum * layout.b_tautau - v_sum * layout.b_tau ** 2 + layout.lw_tautau
    h_tt = float(np.dot(omega, np.sum(post * (d2_tau + d_tau ** 2), axis=1) - t_expert ** 2))

    hessian = np.empty((n_clusters + 1, n_clusters + 1))
    hessian[:n_clusters, :n_clusters] = h_bb
    hessian[:n_clusters, n_clusters] = h_bt
    hessian[n_clusters, :n_clusters] = h_bt
    hessian[n_clusters, n_clusters] = h_tt
    hessian = 0.5 * (hessian + hessian.T)

    if not np.all(np.isfinite(hessian)):
        raise NumericOverflowError("Non-finite Hessian")
    return LikelihoodTerms(loglik=loglik, gradient=gradient, hessian=hessian)


# ═══════════════════════════════════════════════════════════════════════════
# WĘZŁY
# ═══════════════════════════════════════════════════════════════════════════

def _node_layout(beta: np.ndarray, log_sigma: float, data: RatingsTable, rule: QuadratureRule) -> _NodeLayout:
    """Buduje węzły efektu losowego dla zwykłej albo adaptacyjnej reguły."""
    n = data.n_experts
    x = rule.nodes[None, :]
    sigma = float(np.exp(log_sigma))

    if not rule.adaptive:
        b = np.broadcast_to(sigma * np.sqrt(2.0) * x, (n, rule.order))
        zeros = np.zeros((1, rule.order))
        return _NodeLayout(
            b=b,
            log_w=np.broadcast_to(rule.log_weights[None, :], (n, rule.order)),
            b_tau=b,
            b_tautau=b,
            lw_tau=zeros,
            lw_tautau=zeros,
        )

    mode, scale = conditional_modes(beta, log_sigma, data)
    spread = ADAPTIVE_SPREAD * scale
    b = mode[:, None] + np.sqrt(2.0) * spread[:, None] * x
    sigma2 = sigma * sigma
    log_phi = -0.5 * np.log(2.0 * np.pi) - log_sigma - b ** 2 / (2.0 * sigma2)
    log_w = (np.log(rule.weights)[None, :] + x ** 2
             + np.log(np.sqrt(2.0) * spread)[:, None] + log_phi)
    # centra stałe: b nie zależy od τ; indeksowane po wpisach, więc pełny kształt
    zeros = np.zeros((n, rule.order))
    return _NodeLayout(
        b=b,
        log_w=log_w,
        b_tau=zeros,
        b_tautau=zeros,
        lw_tau=-1.0 + b ** 2 / sigma2,
        lw_tautau=-2.0 * b ** 2 / sigma2,
        extra={"mode": mode, "scale": scale},
    )


def conditional_modes(
    beta: np.ndarray,
    log_sigma: float,
    data: RatingsTable,
    max_iter: int = 50,
    tol: float = 1e-10,
):
    """
    Moda i skala rozkładu warunkowego b_i | y_i dla każdego eksperta.

    Maksymalizuje wklęsłą funkcję
        h_i(b) = Σ_{j∈Λ_i} [y·(β_j+b) - log(1+e^(β_j+b))] - b²/(2σ²)
    metodą Newtona (wektorowo dla wszystkich ekspertów).

    Returns:
        (mode, scale): scale_i = 1/√(-h_i''(mode_i))
    """
    sigma2 = float(np.exp(2.0 * log_sigma))
    y = data.ratings.astype(float)
    base = np.asarray(beta, dtype=float)[data.cluster_pos]
    mode = np.zeros(data.n_experts)
    curvature = np.full(data.n_experts, 1.0 / sigma2)

    for _ in range(max_iter):
        s = expit(base + mode[data.expert_pos])
        h1 = np.add.reduceat(y - s, data.expert_starts) - mode / sigma2
        curvature = np.add.reduceat(s * (1.0 - s), data.expert_starts) + 1.0 / sigma2
        step = np.clip(h1 / curvature, -5.0, 5.0)
        mode = mode + step
        if np.max(np.abs(step)) < tol:
            break

    s = expit(base + mode[data.expert_pos])
    curvature = np.add.reduceat(s * (1.0 - s), data.expert_starts) + 1.0 / sigma2
    return mode, 1.0 / np.sqrt(curvature)
