"""Fixed-step RK4 kernels with optional forward sensitivities.

Model functions are numba-compiled callables with the signatures

    rhs(x, u, p, c, t, out)            -> writes f(x, u, p) into out
    sens(x, u, p, c, t, S, out)        -> writes df/dx @ S + df/dp into out
    output(x, u, p, c)                 -> scalar output
    output_sens(x, u, p, c, S, out)    -> writes dg/dx @ S + dg/dp into out

where ``c`` is a float array of model constants (graph, frequencies, ...).
The sensitivity matrix ``S`` has shape (state_dim, n_params); with
n_params == 0 the kernel reduces to a plain state integration, and the state
arithmetic is the same in both cases.
"""

import numpy as np
import numba as nb


@nb.njit(nogil=True, cache=True)
def _all_finite(x, S):
    for a in range(x.shape[0]):
        if not np.isfinite(x[a]):
            return False
    for a in range(S.shape[0]):
        for j in range(S.shape[1]):
            if not np.isfinite(S[a, j]):
                return False
    return True


@nb.njit(nogil=True)
def rk4_run(rhs, sens, output, output_sens, x0, S0, u, p, c, t0, dt, n_steps,
            xs, o, dO):
    """Integrate n_steps of classical RK4.

    ``u`` holds the input at half-step resolution: u[2k] = i(t_k),
    u[2k + 1] = i(t_k + dt/2). ``xs`` is either (n_steps + 1, n) to record
    states or (0, n) to skip recording. Returns -1 on success, otherwise
    the index of the first step that produced a non-finite value.
    """
    n = x0.shape[0]
    P = S0.shape[1]
    record = xs.shape[0] > 0
    x = x0.copy()
    S = S0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    xt = np.empty(n)
    K1 = np.empty((n, P))
    K2 = np.empty((n, P))
    K3 = np.empty((n, P))
    K4 = np.empty((n, P))
    St = np.empty((n, P))
    row = np.empty(P)
    h2 = 0.5 * dt
    h6 = dt / 6.0

    if record:
        xs[0, :] = x
    o[0] = output(x, u[0], p, c)
    output_sens(x, u[0], p, c, S, row)
    dO[0, :] = row

    for k in range(n_steps):
        t = t0 + k * dt
        tm = t0 + (k + 0.5) * dt
        te = t0 + (k + 1) * dt
        um = u[2 * k + 1]
        ue = u[2 * k + 2]

        rhs(x, u[2 * k], p, c, t, k1)
        sens(x, u[2 * k], p, c, t, S, K1)
        for a in range(n):
            xt[a] = x[a] + h2 * k1[a]
            for j in range(P):
                St[a, j] = S[a, j] + h2 * K1[a, j]

        rhs(xt, um, p, c, tm, k2)
        sens(xt, um, p, c, tm, St, K2)
        for a in range(n):
            xt[a] = x[a] + h2 * k2[a]
            for j in range(P):
                St[a, j] = S[a, j] + h2 * K2[a, j]

        rhs(xt, um, p, c, tm, k3)
        sens(xt, um, p, c, tm, St, K3)
        for a in range(n):
            xt[a] = x[a] + dt * k3[a]
            for j in range(P):
                St[a, j] = S[a, j] + dt * K3[a, j]

        rhs(xt, ue, p, c, te, k4)
        sens(xt, ue, p, c, te, St, K4)
        for a in range(n):
            x[a] = x[a] + h6 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
            for j in range(P):
                S[a, j] = S[a, j] + h6 * (K1[a, j] + 2.0 * K2[a, j]
                                          + 2.0 * K3[a, j] + K4[a, j])

        if not _all_finite(x, S):
            return k
        if record:
            xs[k + 1, :] = x
        o[k + 1] = output(x, ue, p, c)
        output_sens(x, ue, p, c, S, row)
        dO[k + 1, :] = row
    return -1
