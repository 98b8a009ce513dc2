"""
Description: How a complex (possibly vector valued) quotient z enters an
Orlicz energy.

    split:  f(|Re z|) + f(|Im z|)
    tilde:  f(|z|)

``weight`` returns dE/dRe z + i dE/dIm z for E = f(norm) given the ratio
f'(t) / t, so that the gradient of sum E(L u) with respect to the real and
imaginary parts of u is L^H applied to the weights.
"""

import numpy as np


def _norm(x, axis):
    if axis is None:
        return np.abs(x)
    return np.sqrt(np.sum(x * x, axis=axis))


def _ratio_at(ratio, t):
    """ratio(t) where t > 0 and 0 where t = 0 (g(0) = 0 for every family)."""
    positive = t > 0
    safe = np.where(positive, t, 1.0)
    return np.where(positive, ratio(safe), 0.0)


class Modulus:
    def __init__(self, tilde):
        self.tilde = bool(tilde)

    def norms(self, z, axis=None):
        """The real arguments handed to G; axis sums vector components."""
        if self.tilde:
            if axis is None:
                return (np.abs(z),)
            return (np.sqrt(np.sum(np.abs(z) ** 2, axis=axis)),)
        return (_norm(z.real, axis), _norm(z.imag, axis))

    def energy(self, z, f, axis=None):
        norms = self.norms(z, axis)
        total = f(norms[0])
        for t in norms[1:]:
            total = total + f(t)
        return total

    def weight(self, z, ratio, axis=None):
        if self.tilde:
            (t,) = self.norms(z, axis)
            factor = _ratio_at(ratio, t)
            return (factor if axis is None else np.expand_dims(factor, axis)) * z
        t_re, t_im = self.norms(z, axis)
        f_re = _ratio_at(ratio, t_re)
        f_im = _ratio_at(ratio, t_im)
        if axis is not None:
            f_re = np.expand_dims(f_re, axis)
            f_im = np.expand_dims(f_im, axis)
        return f_re * z.real + 1j * (f_im * z.imag)


SPLIT = Modulus(tilde=False)
TILDE = Modulus(tilde=True)


def gauge_invariant_tilde(F):
    """
    The ``tilde`` flag under which energies of F are unchanged by constant
    gauge shifts. |D| is the only gauge invariant of a quotient, so the split
    form qualifies only for quadratic F.
    """
    return not F.quadratic


def g_ratio(F):
    """f = G: f'(t) / t = g(t) / t."""
    return lambda t: F.g(t) / t


def log_primitive_term(F, kappa):
    """
    f(t) = Phi(kappa t) with Phi(b) = integral_0^b G(tau) dtau / tau.

    Returns (f, ratio) with ratio(t) = f'(t) / t = G(kappa t) / t^2; kappa may
    be an array broadcasting against t.
    """

    def f(t):
        return F.log_primitive(kappa * t)

    def ratio(t):
        return F.G(kappa * t) / (t * t)

    return f, ratio
