"""Pure-Python (numpy) versions of the compiled kernels.

Same signatures and contracts as ``_kernels``; selected automatically when
the extension is not built.
"""
import math

import numpy as np

MAX_SWEEPS = 64


def eigh(a):
    w, v = np.linalg.eigh(np.asarray(a, dtype=np.complex128))
    return w, v


def jacobi_eigh(a):
    """Cyclic complex Jacobi; slow, kept for parity with the compiled kernel."""
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro2 = float(np.sum(np.abs(a) ** 2))
    for _ in range(MAX_SWEEPS):
        off2 = float(np.sum(np.abs(np.triu(a, 1)) ** 2))
        if off2 <= 1e-26 * fro2 or off2 < 1e-300:
            break
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = abs(a[p, q])
                app, aqq = a[p, p].real, a[q, q].real
                if mag < 1e-300 or mag < 1e-17 * (abs(app) + abs(aqq)):
                    continue
                rotated += 1
                theta = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ph = a[p, q] / mag
                rot = np.array([[c * ph, s * ph], [-s, c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p], a[q, q] = a[p, p].real, a[q, q].real
                v[:, idx] = v[:, idx] @ rot
        if rotated == 0:
            break
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def expi(h, s):
    w, v = eigh(h)
    return (v * np.exp(1j * w * s)) @ v.conj().T


def mean_error_sq(coeffs, basis, time, meter, observable, states):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] != basis.shape[0]:
        raise ValueError("coefficient count does not match basis")
    h = np.tensordot(coeffs, basis, axes=1)
    u = expi(h, time)
    # rows of ``states`` are the vectors nu
    evolved = (u @ (meter @ (u.conj().T @ states.T))).T
    r = evolved - states @ observable.T
    return float(np.sum(np.abs(r) ** 2) / states.shape[0])


def coordinate_search(x0, basis, time, meter, observable, states, budget, initial_step, min_step):
    """Derivative-free coordinate search with step halving (see ``_kernels``)."""
    x = np.array(x0, dtype=np.float64, copy=True)
    f = mean_error_sq(x, basis, time, meter, observable, states)
    evals = 1
    step = initial_step
    while evals < budget and step > min_step:
        improved = False
        for i in range(x.shape[0]):
            for sign in (1.0, -1.0):
                if evals >= budget:
                    break
                y = x.copy()
                y[i] += sign * step
                fy = mean_error_sq(y, basis, time, meter, observable, states)
                evals += 1
                if fy < f:
                    x, f, improved = y, fy, True
                    break
        if not improved:
            step *= 0.5
    return f, x, evals
