"""Straight-line reference implementations used as test oracles.

Plain Python loops and ``math`` only; nothing here calls into the package
except to read weight values.
"""

import math


def forward(weights, biases, x, rho_scale):
    h = [float(v) for v in x]
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, biases)):
        z = []
        for r in range(len(w)):
            acc = float(b[r])
            for c in range(len(h)):
                acc += float(w[r][c]) * h[c]
            z.append(acc)
        h = [math.tanh(v) for v in z] if k < last else z
    if math.isfinite(rho_scale):
        return [rho_scale * math.tanh(v) for v in h]
    return h


def one_tick(weights, biases, rho_scale, baseline, tau, dt, e, u_prev=0.0, rho0=(0, 0, 0)):
    """First tick from a fresh controller: prev error equals e, integral starts at 0."""
    delta = e - u_prev
    rho = forward(weights, biases, [e, u_prev, delta, *rho0], rho_scale)
    kp, ki, kd = (max(0.0, k0 + r * delta / dt) for k0, r in zip(baseline, rho))
    integral = e * dt
    derivative = 0.0
    return kp * e + ki / tau * integral + tau * kd * derivative, rho, (kp, ki, kd)
