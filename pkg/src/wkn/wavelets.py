"""Closed-form wavelet families and their dictionaries.

A dictionary atom is ``psi_us(t) = psi((t - u) / s) / sqrt(s)`` with
translation u and scale s > 0.  Each family provides the mother wavelet,
its time derivative, and the analytic partials of the atom with respect to
u and s, which drive the learnable filter-bank layer.

All evaluation functions broadcast over numpy arrays.
"""

import numpy as np

__all__ = ["WaveletFamily", "get_family", "FAMILY_NAMES"]


class WaveletFamily:
    """Base class: dictionary machinery on top of a concrete mother wavelet."""

    name = ""

    def mother(self, t):
        raise NotImplementedError

    def mother_derivative(self, t):
        raise NotImplementedError

    @staticmethod
    def _check_scale(s):
        if not np.all(np.asarray(s) > 0):
            raise ValueError("scale must be positive")

    def dictionary(self, t, u, s):
        """Atom value psi((t - u)/s) / sqrt(s)."""
        self._check_scale(s)
        t, u, s = np.asarray(t, dtype=np.float64), np.asarray(u), np.asarray(s)
        return self.mother((t - u) / s) / np.sqrt(s)

    def dictionary_grad(self, t, u, s):
        """Partials of the atom w.r.t. u and s, returned as (d_du, d_ds).

        With tau = (t - u)/s:
            d/du = -psi'(tau) / s^(3/2)
            d/ds = -psi(tau) / (2 s^(3/2)) - tau * psi'(tau) / s^(3/2)
        """
        self._check_scale(s)
        t, u, s = np.asarray(t, dtype=np.float64), np.asarray(u), np.asarray(s)
        tau = (t - u) / s
        inv = 1.0 / (s * np.sqrt(s))
        dpsi = self.mother_derivative(tau)
        d_du = -inv * dpsi
        d_ds = -0.5 * inv * self.mother(tau) - inv * tau * dpsi
        return d_du, d_ds


class Morlet(WaveletFamily):
    """Real Morlet: C * exp(-t^2/2) * cos(carrier * t)."""

    name = "morlet"
    carrier = 5.0
    norm = 1.0

    def mother(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.norm * np.exp(-0.5 * t * t) * np.cos(self.carrier * t)

    def mother_derivative(self, t):
        t = np.asarray(t, dtype=np.float64)
        g = np.exp(-0.5 * t * t)
        w = self.carrier
        return self.norm * g * (-t * np.cos(w * t) - w * np.sin(w * t))


class MexicanHat(WaveletFamily):
    """Second Gaussian derivative, L2-normalized: k * (1 - t^2) * exp(-t^2/2)."""

    name = "mexhat"
    norm = 2.0 / (np.sqrt(3.0) * np.pi**0.25)

    def mother(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.norm * (1.0 - t * t) * np.exp(-0.5 * t * t)

    def mother_derivative(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.norm * (t * t - 3.0) * t * np.exp(-0.5 * t * t)


class Laplace(WaveletFamily):
    """Unilateral damped sinusoid: A * exp(-zeta/sqrt(1-zeta^2) * omega * t)
    * sin(omega * t) for t >= 0, identically 0 for t < 0.

    The derivative at the support boundary t = 0 is defined as 0.
    """

    name = "laplace"
    zeta = 0.03
    omega = 2.0 * np.pi
    amplitude = 1.0

    @property
    def decay(self):
        return self.zeta / np.sqrt(1.0 - self.zeta**2) * self.omega

    def mother(self, t):
        t = np.asarray(t, dtype=np.float64)
        tt = np.maximum(t, 0.0)
        val = self.amplitude * np.exp(-self.decay * tt) * np.sin(self.omega * tt)
        return np.where(t >= 0, val, 0.0)

    def mother_derivative(self, t):
        t = np.asarray(t, dtype=np.float64)
        tt = np.maximum(t, 0.0)
        e = self.amplitude * np.exp(-self.decay * tt)
        val = e * (self.omega * np.cos(self.omega * tt) - self.decay * np.sin(self.omega * tt))
        return np.where(t > 0, val, 0.0)


class Sine(WaveletFamily):
    """Plain sine carrier, embedded in the same (u, s) parameterization."""

    name = "sin"

    def mother(self, t):
        return np.sin(np.asarray(t, dtype=np.float64))

    def mother_derivative(self, t):
        return np.cos(np.asarray(t, dtype=np.float64))


_FAMILIES = {f.name: f for f in (Morlet(), MexicanHat(), Laplace(), Sine())}
FAMILY_NAMES = tuple(_FAMILIES)


def get_family(name):
    """Look up a wavelet family by name ('morlet', 'mexhat', 'laplace', 'sin')."""
    try:
        return _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown wavelet family {name!r}; choose from {FAMILY_NAMES}") from None
