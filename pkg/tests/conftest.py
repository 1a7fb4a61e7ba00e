"""Shared draw helpers and a small oracle-grade RK4 stepper.

The RK4 here is deliberately independent of sjdyn.runner so that
integration cross-checks compare two separate implementations.
"""

import numpy as np

from sjdyn.algebra import BallCoefficients, ComplexCoefficients, RealCoefficients
from sjdyn.geometry import BallPoint


def draw_complex(rng, scale=1.0):
    """Complex number with modulus uniform in [0, scale]."""
    r = rng.uniform(0.0, scale)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return complex(r * np.cos(phi), r * np.sin(phi))


def draw_scalar_coeffs(rng, scale=1.0):
    return ComplexCoefficients(
        eps_a=draw_complex(rng, scale),
        eps_0=rng.uniform(-scale, scale),
        eps_plus=draw_complex(rng, scale),
    )


def draw_real_coeffs(rng, scale=1.0):
    return RealCoefficients(
        nu1=rng.uniform(-scale, scale),
        nu2=rng.uniform(-scale, scale),
        veps0=rng.uniform(-scale, scale),
        veps1=rng.uniform(-scale, scale),
        veps2=rng.uniform(-scale, scale),
    )


def draw_ball_coeffs(rng, n, scale=1.0):
    eps = np.array([draw_complex(rng, scale) for _ in range(n)])
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    eps0 = 0.5 * scale * (A + A.conj().T)
    eps_plus = 0.5 * scale * (B + B.T)
    return BallCoefficients(n=n, eps=eps, eps0=eps0, eps_plus=eps_plus)


def draw_ball_point(rng, n, radius=0.4):
    """Symmetric W with spectral norm <= radius (margin >= 1 - radius^2)."""
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    S = 0.5 * (A + A.T)
    norm = np.linalg.norm(S, 2)
    if norm > 0:
        S = S * (radius * rng.uniform(0.3, 1.0) / norm)
    return BallPoint(W=S)


def rk4(f, y0, t0, t1, steps):
    """Fixed-step classical RK4 for dy/dt = f(t, y); returns y(t1)."""
    y = np.asarray(y0, dtype=complex).copy()
    h = (t1 - t0) / steps
    t = t0
    for _ in range(steps):
        k1 = np.asarray(f(t, y))
        k2 = np.asarray(f(t + 0.5 * h, y + 0.5 * h * k1))
        k3 = np.asarray(f(t + 0.5 * h, y + 0.5 * h * k2))
        k4 = np.asarray(f(t + h, y + h * k3))
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def rk4_path(f, y0, t0, t1, steps, sample_every):
    """Like rk4 but also returns (times, samples) every `sample_every` steps."""
    y = np.asarray(y0, dtype=complex).copy()
    h = (t1 - t0) / steps
    t = t0
    times = [t]
    samples = [y.copy()]
    for i in range(steps):
        k1 = np.asarray(f(t, y))
        k2 = np.asarray(f(t + 0.5 * h, y + 0.5 * h * k1))
        k3 = np.asarray(f(t + 0.5 * h, y + 0.5 * h * k2))
        k4 = np.asarray(f(t + h, y + h * k3))
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        if (i + 1) % sample_every == 0:
            times.append(t)
            samples.append(y.copy())
    return np.array(times), np.array(samples)
