"""Closed-form single-step propagation of the neuron and adjoint dynamics.

Membrane/current pair between events:

    tau_m dV/dt = -V + I        tau_s dI/dt = -I

and the adjoint pair in backward time (lv = dl_V/dV, held constant over a step):

    tau_m lam_V' = -lam_V - lv  tau_s lam_I' = -lam_I + lam_V

Both systems are linear, so one timestep is propagated exactly by the
coefficients below instead of an Euler approximation. With lv = 0 the
adjoint pair evolves like (V, I) with the roles of tau_m and tau_s swapped.
"""

from __future__ import annotations

import math

import numpy as np


def decay_coeffs(tau_m: float, tau_s: float, dt: float) -> tuple[float, float, float]:
    """Coefficients (alpha, beta, gamma) for the exact forward step.

    V <- V * alpha + I * gamma ; I <- I * beta, where I is the current at the
    start of the step.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    alpha = math.exp(-dt / tau_m)
    beta = math.exp(-dt / tau_s)
    if tau_s == tau_m:
        gamma = (dt / tau_m) * alpha
    else:
        gamma = (tau_s / (tau_s - tau_m)) * (beta - alpha)
    return alpha, beta, gamma


def adjoint_coeffs(tau_m: float, tau_s: float, dt: float) -> tuple[float, float, float]:
    """Coefficients (alpha, beta, gamma_a) for the exact backward step.

    lam_I <- lam_I * beta + lam_V * gamma_a (+ lv terms), tau roles swapped
    relative to the forward pair.
    """
    alpha = math.exp(-dt / tau_m)
    beta = math.exp(-dt / tau_s)
    if tau_s == tau_m:
        gamma_a = (dt / tau_s) * beta
    else:
        gamma_a = (tau_m / (tau_m - tau_s)) * (alpha - beta)
    return alpha, beta, gamma_a


def integral_coeffs(tau_m: float, tau_s: float, dt: float) -> tuple[float, float]:
    """Coefficients (cv, ci) with integral of V over one step = cv*V0 + ci*I0."""
    alpha = math.exp(-dt / tau_m)
    beta = math.exp(-dt / tau_s)
    cv = tau_m * (1.0 - alpha)
    if tau_s == tau_m:
        # int_0^dt (t/tau) e^{-t/tau} dt = tau - (tau + dt) e^{-dt/tau}
        ci = tau_m - (tau_m + dt) * alpha
    else:
        ci = (tau_s / (tau_s - tau_m)) * (tau_s * (1.0 - beta) - tau_m * (1.0 - alpha))
    return cv, ci


def step_state(v, i, tau_m: float, tau_s: float, dt: float):
    """Propagate (V, I) forward by one exact step. Arrays or scalars."""
    alpha, beta, gamma = decay_coeffs(tau_m, tau_s, dt)
    v_new = v * alpha + i * gamma
    i_new = i * beta
    return v_new, i_new


def adjoint_step(lam_v, lam_i, lv_grad, tau_m: float, tau_s: float, dt: float):
    """Propagate (lam_V, lam_I) one exact step backward in time.

    lv_grad is dl_V/dV per neuron, treated as constant over the step. The
    stationary point is lam_V = lam_I = -lv_grad.
    """
    alpha, beta, gamma_a = adjoint_coeffs(tau_m, tau_s, dt)
    lam_v_new = lam_v * alpha - (1.0 - alpha) * lv_grad
    lam_i_new = lam_i * beta + (lam_v + lv_grad) * gamma_a - (1.0 - beta) * lv_grad
    return lam_v_new, lam_i_new


def epsp_kernel(t, w: float, tau_m: float, tau_s: float):
    """Closed-form V(t) response to a current jump of size w at t = 0.

    Handy as an independent check of the stepped propagation.
    """
    t = np.asarray(t, dtype=float)
    if tau_s == tau_m:
        v = w * (t / tau_m) * np.exp(-t / tau_m)
    else:
        v = w * (tau_s / (tau_s - tau_m)) * (np.exp(-t / tau_s) - np.exp(-t / tau_m))
    return np.where(t >= 0, v, 0.0)
