"""
Description: The fractional magnetic modular

    I_{s,G}^A(u) = double integral of G(|Re D_s^A u(x, y)|) + G(|Im D_s^A u(x, y)|)
                   dx dy / |x - y|^n

of a zero-extended grid field, and its gradient with respect to the node
values.

The integral is split on the active box B (the support of u widened by
near_cells + 1 nodes):

    pairs        x, y in B, |i - j|_inf > near_cells: midpoint rule with
                 weight h^{2n} / |x_i - x_j|^n over all ordered pairs;
    near field   |i - j|_inf <= near_cells: Taylor model D ~ -r^{1-s} w . V
                 with V the covariant central difference, integrated in r in
                 closed form through the log-primitive Phi of G;
    exterior in  x in B, y outside: D = u(x) / r^s, closed form in r;
    exterior out x outside, y in B: carries the phase e^{i theta(x, y)};
                 equal to "exterior in" whenever the energy does not see
                 phases (A = 0, the modulus form or a quadratic G), otherwise
                 integrated radially up to R_max with the tail bounded in
                 the error estimate.

Pair blocks are summed in a fixed order so the result does not depend on the
number of worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from fields.potentials import MagneticPotential

from .config import ModularReport, QuadratureConfig
from .geometry import radial_rule, rectangle_rule
from .local import box_points, central_operators
from .modulus import SPLIT, TILDE, g_ratio, log_primitive_term
from .quotient import check_order

logger = logging.getLogger(__name__)

RADIAL_NODES = 8
EXTERIOR_CHUNK = 32


def _phase_bound(A, grid, R_max):
    """Upper bound of d theta / dr along the exterior rays."""
    if A.kind == "shear":
        reach = grid.L * math.sqrt(grid.n) + R_max
        return float(np.linalg.norm(A.offset)) + float(np.linalg.norm(A.matrix, 2)) * reach
    return A.sup_norm


class FractionalQuadrature:
    """
    Discretization of I_{s,G}^A on a fixed index box of a grid.

    Args:
        grid: the grid.
        A: magnetic potential.
        s: order in (0, 1).
        box: index ranges ((lo, hi), ...) per axis.
        cfg: QuadratureConfig.
        tilde: use G(|D|) instead of G(|Re D|) + G(|Im D|).
        candidates: box indices that may carry nonzero values (all when None);
            only they enter the radial exterior quadrature.
        cache: keep pair geometry between evaluations (for repeated solves).
    """

    def __init__(self, grid, A, s, box, cfg=None, tilde=False, candidates=None, cache=False):
        self.grid = grid
        self.A = A
        self.s = check_order(s)
        self.box = tuple(tuple(int(v) for v in b) for b in box)
        self.cfg = cfg or QuadratureConfig.from_settings()
        self.tilde = bool(tilde)
        self.modulus = TILDE if tilde else SPLIT
        self.cache = cache

        h = grid.h
        P = box_points(grid, self.box)
        self.shape = P.shape[:-1]
        self.X = P.reshape(-1, grid.n)
        self.M = self.X.shape[0]
        self.lower = np.array([grid.axis[lo] for lo, _ in self.box]) - 0.5 * h
        self.upper = np.array([grid.axis[hi] for _, hi in self.box]) + 0.5 * h
        self.K = int(self.cfg.near_cells)
        nodes = self.cfg.angular_nodes

        block = int(self.cfg.reduction_block)
        self.blocks = [slice(k, min(k + block, self.M)) for k in range(0, self.M, block)]
        self._pair_cache = {}

        reach = (self.K + 0.5) * h
        near_lo = np.maximum(self.X - reach, self.lower)
        near_hi = np.minimum(self.X + reach, self.upper)
        self.near_dirs, self.near_w, near_rho = rectangle_rule(self.X, near_lo, near_hi, nodes)
        self.near_kappa = near_rho ** (1.0 - self.s)
        self.central = central_operators(grid, A, self.box)
        self.central_adjoint = [C.conj().T.tocsr() for C in self.central]

        self.ext_dirs, self.ext_w, self.ext_rho = rectangle_rule(
            self.X, self.lower, self.upper, nodes
        )
        self.ext_kappa = self.ext_rho ** (-self.s)

        self.mirror = A.is_zero() or self.tilde
        self.R_max = self.cfg.radius_for(grid)
        self.candidates = None if candidates is None else np.asarray(candidates, dtype=int)
        self._radial_cache = {}
        self._radial_rule = None
        logger.debug(
            f"Fractional quadrature s={self.s}: {self.M} box nodes, {len(self.blocks)} "
            f"pair blocks, near_cells={self.K}, mirror={self.mirror}"
        )

    # box <-> grid

    def restrict(self, values):
        index = tuple(slice(lo, hi + 1) for lo, hi in self.box)
        return np.asarray(values, dtype=complex)[index].ravel()

    def extend(self, box_values):
        out = np.zeros(self.grid.shape, dtype=complex)
        index = tuple(slice(lo, hi + 1) for lo, hi in self.box)
        out[index] = np.asarray(box_values).reshape(self.shape)
        return out

    # pairs

    def _pair_geometry(self, k):
        if k in self._pair_cache:
            return self._pair_cache[k]
        rows = self.blocks[k]
        h, n = self.grid.h, self.grid.n
        x = self.X[rows, None, :]
        y = self.X[None, :, :]
        diff = x - y
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        far = np.rint(np.max(np.abs(diff), axis=-1) / h) > self.K
        safe = np.where(far, r, 1.0)
        weight = np.where(far, h ** (2 * n) / safe**n, 0.0)
        kernel = np.where(far, safe ** (-self.s), 0.0)
        phase = np.exp(1j * self.A.link_phase(x, y))
        geometry = (weight, kernel, phase)
        if self.cache:
            self._pair_cache[k] = geometry
        return geometry

    def _pair_block(self, k, U, F, ratio):
        weight, kernel, phase = self._pair_geometry(k)
        rows = self.blocks[k]
        D = (U[rows, None] - phase * U[None, :]) * kernel
        energy = float(np.sum(weight * self.modulus.energy(D, F.G)))
        if ratio is None:
            return energy, None
        Wk = weight * kernel * self.modulus.weight(D, ratio)
        grad = -np.sum(np.conj(phase) * Wk, axis=0)
        grad[rows] += np.sum(Wk, axis=1)
        return energy, grad

    def _pairs(self, U, F, ratio):
        def work(k):
            return self._pair_block(k, U, F, ratio)

        workers = int(self.cfg.workers)
        if workers > 1 and len(self.blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(work, range(len(self.blocks))))
        else:
            results = [work(k) for k in range(len(self.blocks))]

        energy = math.fsum(e for e, _ in results)
        if ratio is None:
            return energy, None
        grad = np.zeros(self.M, dtype=complex)
        for _, g in results:
            grad += g
        return energy, grad

    # near field

    def _near(self, U, F, want_grad):
        V = np.stack([C @ U for C in self.central], axis=-1)
        Z = np.einsum("mqd,md->mq", self.near_dirs, V)
        f, ratio = log_primitive_term(F, self.near_kappa)
        scale = self.grid.cell_volume / (1.0 - self.s)
        energy = scale * float(np.sum(self.near_w * self.modulus.energy(Z, f)))
        if not want_grad:
            return energy, None
        W = scale * self.near_w * self.modulus.weight(Z, ratio)
        gV = np.einsum("mqd,mq->md", self.near_dirs, W)
        grad = sum(CH @ gV[:, d] for d, CH in enumerate(self.central_adjoint))
        return energy, grad

    # exterior

    def _exterior_in(self, U, F, want_grad):
        Uq = np.broadcast_to(U[:, None], self.ext_kappa.shape)
        f, ratio = log_primitive_term(F, self.ext_kappa)
        scale = self.grid.cell_volume / self.s
        energy = scale * float(np.sum(self.ext_w * self.modulus.energy(Uq, f)))
        if not want_grad:
            return energy, None
        grad = scale * np.sum(self.ext_w * self.modulus.weight(Uq, ratio), axis=1)
        return energy, grad

    def _exterior_bound(self, U, F):
        """Upper bound of the x-outside half by twice the modulus closed form."""
        Uq = np.abs(np.broadcast_to(U[:, None], self.ext_kappa.shape))
        scale = 2.0 * self.grid.cell_volume / self.s
        return scale * float(np.sum(self.ext_w * F.log_primitive(self.ext_kappa * Uq)))

    def phase_blind(self, F):
        """True when the x-outside half equals the x-inside half for F."""
        return self.mirror or F.quadratic

    def _radial_nodes(self):
        if self._radial_rule is None:
            bound = _phase_bound(self.A, self.grid, self.R_max)
            cap = math.pi / (2.0 * bound) if bound > 0 else math.inf
            self._radial_rule = radial_rule(self.grid.h, self.R_max, cap, RADIAL_NODES)
        return self._radial_rule

    def _radial_geometry(self, start, nodes):
        if start in self._radial_cache:
            return self._radial_cache[start]
        dirs = self.ext_dirs[nodes]
        rho = self.ext_rho[nodes]
        t, wt = self._radial_nodes()
        r = rho[:, :, None] + t[None, None, :]
        y = self.X[nodes][:, None, None, :]
        x = y + r[..., None] * dirs[:, :, None, :]
        theta = self.A.link_phase(x, y)
        coef = -np.exp(1j * theta) * r ** (-self.s)
        measure = self.ext_w[nodes][:, :, None] * wt[None, None, :] / r
        end = rho + self.R_max
        geometry = (coef, measure, end)
        if self.cache and self.candidates is not None:
            self._radial_cache[start] = geometry
        return geometry

    def _exterior_out(self, U, F, ratio):
        """Radial quadrature of the phase-carrying half; returns (energy, grad, tail)."""
        if self.candidates is None:
            active = np.flatnonzero(U)
        else:
            active = self.candidates
        energies, tails = [], []
        grad = np.zeros(self.M, dtype=complex) if ratio is not None else None
        h_n = self.grid.cell_volume
        for start in range(0, active.size, EXTERIOR_CHUNK):
            nodes = active[start : start + EXTERIOR_CHUNK]
            coef, measure, end = self._radial_geometry(start, nodes)
            Z = coef * U[nodes][:, None, None]
            energies.append(h_n * float(np.sum(measure * self.modulus.energy(Z, F.G))))
            tail_arg = np.abs(U[nodes])[:, None] * end ** (-self.s)
            tails.append(
                2.0 * h_n / self.s * float(np.sum(self.ext_w[nodes] * F.log_primitive(tail_arg)))
            )
            if ratio is not None:
                W = measure * np.conj(coef) * self.modulus.weight(Z, ratio)
                grad[nodes] += h_n * np.sum(W, axis=(1, 2))
        return math.fsum(energies), grad, math.fsum(tails)

    # public

    def evaluate(self, F, U, want_grad=False):
        """
        Returns:
            tuple: (value, gradient over the box nodes or None, error_estimate,
            parts dict).
        """
        U = np.asarray(U, dtype=complex)
        ratio = g_ratio(F) if want_grad else None
        parts = {}
        error = 0.0
        grad = np.zeros(self.M, dtype=complex) if want_grad else None

        value, g = self._pairs(U, F, ratio)
        parts["pairs"] = value
        if want_grad:
            grad += g

        near, g = self._near(U, F, want_grad)
        parts["near"] = near
        if self.cfg.shell_policy == "taylor":
            value += near
            if want_grad:
                grad += g
        else:
            error += near

        ext_in, g_in = self._exterior_in(U, F, want_grad)
        parts["exterior_in"] = ext_in
        value += ext_in
        if want_grad:
            grad += g_in

        if self.phase_blind(F):
            parts["exterior_out"] = ext_in
            value += ext_in
            if want_grad:
                grad += g_in
        elif self.cfg.exterior == "bound":
            parts["exterior_out"] = 0.0
            error += self._exterior_bound(U, F)
        else:
            ext_out, g_out, tail = self._exterior_out(U, F, ratio)
            parts["exterior_out"] = ext_out
            value += ext_out
            error += tail
            if want_grad:
                grad += g_out

        return value, grad, error, parts

    def row_integrals(self, F, U, index):
        """
        For the box node ``index`` returns the pair

            (integral G(|Re D(x, y)|) dy / |x - y|^n,
             integral G(|Im D(x, y)|) dy / |x - y|^n)

        with the same near-field and exterior treatment as ``evaluate``.
        """
        U = np.asarray(U, dtype=complex)
        h, n = self.grid.h, self.grid.n
        x = self.X[index]
        diff = x[None, :] - self.X
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        far = np.rint(np.max(np.abs(diff), axis=-1) / h) > self.K
        safe = np.where(far, r, 1.0)
        weight = np.where(far, h**n / safe**n, 0.0)
        phase = np.exp(1j * self.A.link_phase(x[None, :], self.X))
        D = (U[index] - phase * U) * np.where(far, safe ** (-self.s), 0.0)
        re = float(np.sum(weight * F.G(np.abs(D.real))))
        im = float(np.sum(weight * F.G(np.abs(D.imag))))

        if self.cfg.shell_policy == "taylor":
            V = np.array([(C @ U)[index] for C in self.central])
            Z = self.near_dirs[index] @ V
            kappa = self.near_kappa[index]
            w = self.near_w[index] / (1.0 - self.s)
            re += float(np.sum(w * F.log_primitive(kappa * np.abs(Z.real))))
            im += float(np.sum(w * F.log_primitive(kappa * np.abs(Z.imag))))

        kappa = self.ext_kappa[index]
        w = self.ext_w[index] / self.s
        re += float(np.sum(w * F.log_primitive(kappa * abs(U[index].real))))
        im += float(np.sum(w * F.log_primitive(kappa * abs(U[index].imag))))
        return re, im


def active_box(u, cfg):
    """Support box of u widened by near_cells + 1 nodes."""
    return u.support_box(margin=int(cfg.near_cells) + 1)


def modular_IsGA(F, u, A, s, cfg=None, tilde=False):
    """
    I_{s,G}^A(u) (or the modulus form with ``tilde``).

    Raises:
        DomainError: s is not in (0, 1).
    """
    s = check_order(s)
    cfg = cfg or QuadratureConfig.from_settings()
    kind = ("tilde_" if tilde else "") + ("IsG" if A.is_zero() else "IsGA")
    if u.is_zero():
        return ModularReport(kind=kind, value=0.0, s=s, shell_policy=cfg.shell_policy)
    quadrature = FractionalQuadrature(u.grid, A, s, active_box(u, cfg), cfg, tilde=tilde)
    value, _, error, parts = quadrature.evaluate(F, quadrature.restrict(u.values))
    logger.debug(f"{kind}({u.label}, s={s}) = {value!r} (+- {error:.2e}) parts={parts}")
    return ModularReport(
        kind=kind,
        value=value,
        s=s,
        shell_policy=cfg.shell_policy,
        error_estimate=error,
        parts=parts,
    )


def modular_IsG(F, u, s, cfg=None, tilde=False):
    """I_{s,G}(u), the A = 0 form."""
    return modular_IsGA(F, u, MagneticPotential.zero(u.grid.n), s, cfg, tilde=tilde)
