"""Concrete system families: diffusive network, Kuramoto with inertia, scalar linear."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba as nb
import numpy as np

from behavtune.trajectory import SystemFamily


# --------------------------------------------------------------------------
# graphs


def barabasi_albert(n: int, m: int = 2, seed: int = 0) -> np.ndarray:
    """Preferential-attachment graph as a symmetric 0/1 adjacency matrix.

    Starts from a clique on m + 1 nodes; every later node links to m distinct
    existing nodes drawn with probability proportional to their degree.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    A = np.zeros((n, n), dtype=float)
    A[: m + 1, : m + 1] = 1.0
    np.fill_diagonal(A, 0.0)
    for new in range(m + 1, n):
        deg = A[:new, :new].sum(axis=1)
        targets: list[int] = []
        while len(targets) < m:
            w = deg.copy()
            w[targets] = 0.0
            targets.append(int(rng.choice(new, p=w / w.sum())))
        A[new, targets] = 1.0
        A[targets, new] = 1.0
    return A


def check_adjacency(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency must be symmetric")
    if np.any(np.diag(A) != 0):
        raise ValueError("adjacency must have zero diagonal")
    if not np.all((A == 0) | (A == 1)):
        raise ValueError("adjacency entries must be 0 or 1")
    return A


def is_connected(A) -> bool:
    n = A.shape[0]
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for w in np.flatnonzero(A[v]):
            if int(w) not in seen:
                seen.add(int(w))
                frontier.append(int(w))
    return len(seen) == n


# --------------------------------------------------------------------------
# shared output map: o = i - x_1


@nb.njit(nogil=True, cache=True)
def _out_input_minus_first(x, u, p, c):
    return u - x[0]


@nb.njit(nogil=True, cache=True)
def _out_sens_input_minus_first(x, u, p, c, S, out):
    for j in range(S.shape[1]):
        out[j] = -S[0, j]


def _zeros_init(n):
    def init(p):
        return np.zeros(n)
    return init


# --------------------------------------------------------------------------
# diffusive network:
#   dx_n = -x_n - p_n x_n^3 + sum_m A_nm (x_n - x_m) + [n == 1] (x_n - i)
# consts: flattened adjacency


@nb.njit(nogil=True, cache=True)
def _diffusive_rhs(x, u, p, c, t, out):
    n = x.shape[0]
    for a in range(n):
        s = -x[a] - p[a] * x[a] ** 3
        for b in range(n):
            w = c[a * n + b]
            if w != 0.0:
                s += w * (x[a] - x[b])
        if a == 0:
            s += x[0] - u
        out[a] = s


@nb.njit(nogil=True, cache=True)
def _diffusive_sens(x, u, p, c, t, S, out):
    n = x.shape[0]
    P = S.shape[1]
    for a in range(n):
        d = -1.0 - 3.0 * p[a] * x[a] ** 2
        if a == 0:
            d += 1.0
        for b in range(n):
            d += c[a * n + b]
        for j in range(P):
            out[a, j] = d * S[a, j]
        for b in range(n):
            w = c[a * n + b]
            if w != 0.0:
                for j in range(P):
                    out[a, j] -= w * S[b, j]
        if P > 0:
            out[a, a] -= x[a] ** 3


def make_diffusive(adjacency) -> SystemFamily:
    A = check_adjacency(adjacency)
    n = A.shape[0]
    return SystemFamily(
        name=f"diffusive{n}",
        state_dim=n,
        param_dim=n,
        rhs=_diffusive_rhs,
        sens=_diffusive_sens,
        output=_out_input_minus_first,
        output_sens=_out_sens_input_minus_first,
        init_fn=_zeros_init(n),
        consts=A.ravel(),
        positive=(True,) * n,
        default_params=np.ones(n),
        meta={"kind": "diffusive", "n": n, "adjacency": A.astype(int).tolist()},
    )


def two_node_graph() -> np.ndarray:
    return np.array([[0.0, 1.0], [1.0, 0.0]])


# --------------------------------------------------------------------------
# Kuramoto oscillators with inertia, state [phi_1..phi_N, dphi_1..dphi_N]:
#   ddphi_n = Omega_n - p_n dphi_n - K sum_{m != n} p_nm sin(phi_n - phi_m) + [n == 1] i
# params: [damping (N), tunable pair couplings (unordered pairs, row-major),
#          optionally Omega (N)]
# consts: [K, omega_flag, Omega (N), pair index into coupling block or -1]


@nb.njit(nogil=True, cache=True)
def _kuramoto_coupling(p, c, n, pair):
    idx = c[2 + n + pair]
    if idx < 0.0:
        return 1.0, -1
    return p[n + int(idx)], n + int(idx)


@nb.njit(nogil=True, cache=True)
def _pair_index(n, a, b):
    # row-major index of unordered pair (a < b)
    return a * n - a * (a + 1) // 2 + (b - a - 1)


@nb.njit(nogil=True, cache=True)
def _kuramoto_omega(p, c, n, a):
    if c[1] != 0.0:
        return p[p.shape[0] - n + a], p.shape[0] - n + a
    return c[2 + a], -1


@nb.njit(nogil=True, cache=True)
def _kuramoto_rhs(x, u, p, c, t, out):
    n = x.shape[0] // 2
    K = c[0]
    for a in range(n):
        out[a] = x[n + a]
    for a in range(n):
        om, _ = _kuramoto_omega(p, c, n, a)
        s = om - p[a] * x[n + a]
        for b in range(n):
            if b == a:
                continue
            lo = min(a, b)
            hi = max(a, b)
            w, _ = _kuramoto_coupling(p, c, n, _pair_index(n, lo, hi))
            s -= K * w * np.sin(x[a] - x[b])
        if a == 0:
            s += u
        out[n + a] = s


@nb.njit(nogil=True, cache=True)
def _kuramoto_sens(x, u, p, c, t, S, out):
    n = x.shape[0] // 2
    P = S.shape[1]
    K = c[0]
    for a in range(n):
        for j in range(P):
            out[a, j] = S[n + a, j]
    for a in range(n):
        r = n + a
        for j in range(P):
            out[r, j] = -p[a] * S[r, j]
        if P == 0:
            continue
        out[r, a] -= x[r]
        _, oi = _kuramoto_omega(p, c, n, a)
        if oi >= 0:
            out[r, oi] += 1.0
        for b in range(n):
            if b == a:
                continue
            lo = min(a, b)
            hi = max(a, b)
            w, wi = _kuramoto_coupling(p, c, n, _pair_index(n, lo, hi))
            d = x[a] - x[b]
            g = K * w * np.cos(d)
            for j in range(P):
                out[r, j] -= g * (S[a, j] - S[b, j])
            if wi >= 0:
                out[r, wi] -= K * np.sin(d)


def kuramoto_frequencies(n: int, seed: int) -> np.ndarray:
    """Gaussian frequencies with Omega_1 = 0 and zero mean, exactly.

    Nodes 2..n get standard normal draws, shifted by their own mean.
    """
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    om = np.zeros(n)
    if n > 1:
        draws = rng.normal(0.0, 1.0, size=n - 1)
        om[1:] = draws - draws.mean()
    return om


@dataclass
class KuramotoConfig:
    n: int
    omegas: np.ndarray = None
    coupling: float = 1.0
    spread: float = 1.0
    # "all": every unordered pair tunable; "interior": only pairs among nodes
    # 2..N-1 are tunable, the rest are fixed at 1
    tunable_pairs: str = "all"
    tunable_omega: bool = False
    omega_seed: Optional[int] = None

    def __post_init__(self):
        if self.omegas is None:
            self.omegas = (kuramoto_frequencies(self.n, self.omega_seed)
                           if self.omega_seed is not None else np.zeros(self.n))
        self.omegas = np.asarray(self.omegas, dtype=float)
        if self.omegas.shape != (self.n,):
            raise ValueError("omegas must have length n")
        if self.tunable_pairs not in ("all", "interior"):
            raise ValueError("tunable_pairs must be 'all' or 'interior'")

    @property
    def scaled_omegas(self) -> np.ndarray:
        return self.spread * self.omegas


def make_kuramoto(cfg: KuramotoConfig) -> SystemFamily:
    n = cfg.n
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    pair_idx = []
    k = 0
    for a, b in pairs:
        interior = 0 < a and b < n - 1
        if cfg.tunable_pairs == "all" or interior:
            pair_idx.append(float(k))
            k += 1
        else:
            pair_idx.append(-1.0)
    n_coup = k
    consts = np.concatenate([[cfg.coupling, 1.0 if cfg.tunable_omega else 0.0],
                             cfg.scaled_omegas, pair_idx])
    positive = (True,) * (n + n_coup) + ((False,) * n if cfg.tunable_omega else ())
    default = np.ones(n + n_coup)
    if cfg.tunable_omega:
        default = np.concatenate([default, cfg.scaled_omegas])
    return SystemFamily(
        name=f"kuramoto{n}",
        state_dim=2 * n,
        param_dim=len(positive),
        rhs=_kuramoto_rhs,
        sens=_kuramoto_sens,
        output=_out_input_minus_first,
        output_sens=_out_sens_input_minus_first,
        init_fn=_zeros_init(2 * n),
        consts=consts,
        positive=positive,
        default_params=default,
        meta={"kind": "kuramoto", "n": n, "coupling": cfg.coupling,
              "spread": cfg.spread, "omegas": cfg.omegas.tolist(),
              "tunable_pairs": cfg.tunable_pairs, "tunable_omega": cfg.tunable_omega},
    )


# --------------------------------------------------------------------------
# scalar linear test system: dx = -a x + i, o = i - x, x(0) = 0


@nb.njit(nogil=True, cache=True)
def _linear_rhs(x, u, p, c, t, out):
    out[0] = -p[0] * x[0] + u


@nb.njit(nogil=True, cache=True)
def _linear_sens(x, u, p, c, t, S, out):
    for j in range(S.shape[1]):
        out[0, j] = -p[0] * S[0, j]
    if S.shape[1] > 0:
        out[0, 0] -= x[0]


def make_scalar_linear(a: float = 1.0) -> SystemFamily:
    """Scalar linear family parametrized by its decay rate; ``a`` is the default."""
    if not a > 0:
        raise ValueError("decay rate must be positive")
    return SystemFamily(
        name="scalar_linear",
        state_dim=1,
        param_dim=1,
        rhs=_linear_rhs,
        sens=_linear_sens,
        output=_out_input_minus_first,
        output_sens=_out_sens_input_minus_first,
        init_fn=_zeros_init(1),
        consts=np.zeros(1),
        positive=(True,),
        default_params=np.array([float(a)]),
        meta={"kind": "scalar-linear"},
    )


def random_initial_params(system: SystemFamily, seed: int, low: float = 0.1,
                          high: float = 10.0) -> np.ndarray:
    """Log-uniform guess on [low, high] for positive coordinates.

    Unconstrained coordinates keep the family's default value.
    """
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    draws = np.exp(rng.uniform(np.log(low), np.log(high), size=system.param_dim))
    pos = np.asarray(system.positive, dtype=bool)
    return np.where(pos, draws, system.default_params)
