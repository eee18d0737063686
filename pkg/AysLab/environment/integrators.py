"""Fixed-step classical Runge-Kutta integration.

The AYS environment advances one action interval (one year) with `integrate`,
and the Lorenz system is kept here as an accuracy fixture for the same stepper.
"""
import numpy as np


def rk4_step(derivative, state, h):
    k1 = derivative(state)
    k2 = derivative(state + 0.5 * h * k1)
    k3 = derivative(state + 0.5 * h * k2)
    k4 = derivative(state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(derivative, state, duration, substeps, check=None):
    """Advance `state` by `duration` in `substeps` equal RK4 steps.

    `check(state, substep)` is called after every substep and may raise to stop
    the integration.
    """
    state = np.asarray(state, dtype=np.float64)
    h = duration / substeps
    for substep in range(substeps):
        state = rk4_step(derivative, state, h)
        if check is not None:
            check(state, substep)
    return state


def lorenz_derivatives(state, sigma=10.0, rho=28.0, beta=8.0 / 3.0):
    x, y, z = state
    return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])
