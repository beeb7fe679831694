"""Numba kernels for likelihood evaluation and Newton fitting.

Rows with identical terminal-node membership in both components share one
linear predictor, so the data collapse to a small table of cells x response
categories.  Everything here operates on that collapsed form, which makes a
single candidate-model fit cost microseconds; split scans and permutation
nulls run millions of such fits.

Free-parameter layout, with k response categories, m_loc location splits
and m_sc scale splits:

    theta = [b01, delta_2..delta_{k-1}, beta_1..beta_{m_loc}, gamma_1..gamma_{m_sc}]

where the r-th threshold is b01 + sum_{s<=r} exp(delta_s), keeping the
thresholds strictly increasing for every finite theta.
"""

import math

import numpy as np
from numba import njit

_INVALID = -1e308

# Fit termination codes.
STATUS_GRAD = 0
STATUS_LL_CHANGE = 1
STATUS_STALL = 2
STATUS_MAX_ITER = 3


@njit(cache=True)
def _cdf(eta, link_id):
    if link_id == 0:
        if eta >= 0.0:
            z = math.exp(-eta)
            return 1.0 / (1.0 + z)
        z = math.exp(eta)
        return z / (1.0 + z)
    # erfc form avoids cancellation in the lower tail.
    if eta < 0.0:
        return 0.5 * math.erfc(-eta / 1.4142135623730951)
    return 1.0 - 0.5 * math.erfc(eta / 1.4142135623730951)


@njit(cache=True)
def _sf(eta, link_id):
    if link_id == 0:
        return _cdf(-eta, 0)
    if eta < 0.0:
        return 1.0 - 0.5 * math.erfc(-eta / 1.4142135623730951)
    return 0.5 * math.erfc(eta / 1.4142135623730951)


@njit(cache=True)
def _pdf(eta, link_id):
    if link_id == 0:
        p = _cdf(eta, 0)
        return p * (1.0 - p)
    return math.exp(-0.5 * eta * eta) / 2.5066282746310002


@njit(cache=True)
def loglik_grad(theta, counts, L, S, k, link_id, grad):
    """Collapsed log-likelihood; fills ``grad`` with its analytic gradient.

    Returns a sentinel below -1e307 when a populated cell's probability
    underflows (degenerate parameters).
    """
    C = counts.shape[0]
    m_loc = L.shape[1]
    m_sc = S.shape[1]
    km1 = k - 1
    m = km1 + m_loc + m_sc

    thr = np.empty(km1)
    thr[0] = theta[0]
    for r in range(1, km1):
        thr[r] = thr[r - 1] + math.exp(theta[r])
    for i in range(m):
        grad[i] = 0.0

    eta = np.empty(km1)
    F = np.empty(km1)
    ratio = np.empty(k)
    w = np.empty(km1)
    ll = 0.0
    for c in range(C):
        tot = 0.0
        for r in range(k):
            tot += counts[c, r]
        if tot == 0.0:
            continue
        loc = 0.0
        for s in range(m_loc):
            loc += L[c, s] * theta[km1 + s]
        sc = 0.0
        for s in range(m_sc):
            sc += S[c, s] * theta[km1 + m_loc + s]
        inv = math.exp(-sc)
        for r in range(km1):
            e = (thr[r] - loc) * inv
            eta[r] = e
            F[r] = _cdf(e, link_id)
        for r in range(k):
            # Difference on the survival side when both etas are positive,
            # to avoid cancellation between two cdf values near 1.
            if r >= 1 and eta[r - 1] > 0.0:
                lo_s = _sf(eta[r - 1], link_id)
                hi_s = _sf(eta[r], link_id) if r < km1 else 0.0
                pi = lo_s - hi_s
            else:
                hi_f = F[r] if r < km1 else 1.0
                lo_f = F[r - 1] if r >= 1 else 0.0
                pi = hi_f - lo_f
            if counts[c, r] > 0.0:
                if pi <= 1e-300:
                    return _INVALID
                ll += counts[c, r] * math.log(pi)
                ratio[r] = counts[c, r] / pi
            else:
                ratio[r] = 0.0
        wsum = 0.0
        wetasum = 0.0
        for r in range(km1):
            w[r] = _pdf(eta[r], link_id) * (ratio[r] - ratio[r + 1])
            wsum += w[r]
            wetasum += w[r] * eta[r]
        grad[0] += wsum * inv
        suf = 0.0
        for r in range(km1 - 1, 0, -1):
            suf += w[r]
            grad[r] += math.exp(theta[r]) * suf * inv
        for s in range(m_loc):
            if L[c, s] != 0.0:
                grad[km1 + s] -= L[c, s] * wsum * inv
        for s in range(m_sc):
            if S[c, s] != 0.0:
                grad[km1 + m_loc + s] -= S[c, s] * wetasum
    return ll


@njit(cache=True)
def _cholesky(A, Lo):
    """In-place Cholesky A = Lo Lo^T; returns False when A is not PD."""
    m = A.shape[0]
    for i in range(m):
        for j in range(i + 1):
            s = A[i, j]
            for t in range(j):
                s -= Lo[i, t] * Lo[j, t]
            if i == j:
                if s <= 0.0:
                    return False
                Lo[i, i] = math.sqrt(s)
            else:
                Lo[i, j] = s / Lo[j, j]
    return True


@njit(cache=True)
def _chol_solve(Lo, b, out):
    m = Lo.shape[0]
    for i in range(m):
        s = b[i]
        for t in range(i):
            s -= Lo[i, t] * out[t]
        out[i] = s / Lo[i, i]
    for i in range(m - 1, -1, -1):
        s = out[i]
        for t in range(i + 1, m):
            s -= Lo[t, i] * out[t]
        out[i] = s / Lo[i, i]


@njit(cache=True)
def newton_fit(theta0, counts, L, S, k, link_id, lower, upper,
               max_iter, rel_tol, grad_tol):
    """Damped Newton ascent with box clamping and backtracking.

    The Hessian comes from central differences of the analytic gradient;
    non-positive-definite curvature is handled by escalating a ridge, and a
    plain gradient step is the fallback when the Newton step fails.  Steps
    are only accepted when they increase the log-likelihood, so the warm
    start is an ascent floor.

    Returns ``(theta, loglik, iterations, status)``.
    """
    m = len(theta0)
    theta = theta0.copy()
    for i in range(m):
        if theta[i] < lower[i]:
            theta[i] = lower[i]
        if theta[i] > upper[i]:
            theta[i] = upper[i]
    g = np.empty(m)
    gp = np.empty(m)
    gm = np.empty(m)
    d = np.empty(m)
    trial = np.empty(m)
    H = np.empty((m, m))
    A = np.empty((m, m))
    Lo = np.empty((m, m))

    ll = loglik_grad(theta, counts, L, S, k, link_id, g)
    status = STATUS_MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        gmax = 0.0
        for i in range(m):
            a = abs(g[i])
            if a > gmax:
                gmax = a
        if gmax <= grad_tol:
            status = STATUS_GRAD
            break

        for i in range(m):
            h = 1e-6 * (1.0 + abs(theta[i]))
            ti = theta[i]
            theta[i] = ti + h
            loglik_grad(theta, counts, L, S, k, link_id, gp)
            theta[i] = ti - h
            loglik_grad(theta, counts, L, S, k, link_id, gm)
            theta[i] = ti
            for j in range(m):
                H[j, i] = (gp[j] - gm[j]) / (2.0 * h)
        for i in range(m):
            for j in range(i + 1, m):
                v = 0.5 * (H[i, j] + H[j, i])
                H[i, j] = v
                H[j, i] = v

        # Solve (-H + lam I) d = g with lam escalated until PD.
        lam = 0.0
        solved = False
        for attempt in range(40):
            for i in range(m):
                for j in range(m):
                    A[i, j] = -H[i, j]
                A[i, i] += lam
            if _cholesky(A, Lo):
                _chol_solve(Lo, g, d)
                solved = True
                break
            lam = 1e-8 if lam == 0.0 else lam * 10.0
        if not solved:
            for i in range(m):
                d[i] = g[i]

        accepted = False
        for direction in range(2):
            dot = 0.0
            for i in range(m):
                dot += d[i] * g[i]
            if dot <= 0.0:
                for i in range(m):
                    d[i] = g[i]
                continue
            t = 1.0
            for ls in range(60):
                for i in range(m):
                    v = theta[i] + t * d[i]
                    if v < lower[i]:
                        v = lower[i]
                    if v > upper[i]:
                        v = upper[i]
                    trial[i] = v
                nll = loglik_grad(trial, counts, L, S, k, link_id, gp)
                if nll > _INVALID * 1e-1 and nll >= ll + 1e-4 * t * dot:
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                break
            # Newton step failed the line search: retry with the gradient.
            for i in range(m):
                d[i] = g[i]
        if not accepted:
            status = STATUS_STALL
            break

        improvement = nll - ll
        for i in range(m):
            theta[i] = trial[i]
            g[i] = gp[i]
        ll = nll
        if improvement <= rel_tol * (1.0 + abs(ll)):
            status = STATUS_LL_CHANGE
            break
    return theta, ll, it, status


@njit(cache=True)
def scan_thresholds(theta_warm, base_counts, left_counts, in_cell_idx,
                    L_cand, S_cand, k, link_id, lower, upper,
                    max_iter, rel_tol, grad_tol,
                    out_ll, out_theta, out_status):
    """Fit one candidate model per threshold of a split scan.

    Cells 0..C0-1 are the current model's cells (A-cells reduced to their
    "> c" remainder); cells C0..C0+nA-1 are the "<= c" subcells of the
    cells intersecting the node being split, in ``in_cell_idx`` order.
    ``left_counts[t, a, r]`` holds the left-side response counts of A-cell
    ``a`` at threshold index ``t``.  ``L_cand`` / ``S_cand`` already carry
    the candidate increment column; ``theta_warm`` has its entry at 0.
    """
    T = left_counts.shape[0]
    nA = left_counts.shape[1]
    C0 = base_counts.shape[0]
    counts = np.empty((C0 + nA, k))
    for c in range(C0):
        for r in range(k):
            counts[c, r] = base_counts[c, r]
    for t in range(T):
        for a in range(nA):
            c = in_cell_idx[a]
            for r in range(k):
                lc = left_counts[t, a, r]
                counts[c, r] = base_counts[c, r] - lc
                counts[C0 + a, r] = lc
        theta, ll, _, status = newton_fit(
            theta_warm, counts, L_cand, S_cand, k, link_id, lower, upper,
            max_iter, rel_tol, grad_tol,
        )
        out_ll[t] = ll
        out_status[t] = status
        for i in range(len(theta)):
            out_theta[t, i] = theta[i]
