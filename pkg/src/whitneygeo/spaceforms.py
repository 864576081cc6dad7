"""Chart models of the six ambient spaces.

Three Kaehler models (flat complex space, the projective space normalized to
holomorphic sectional curvature +4 in its affine chart, the hyperbolic ball
normalized to -4) and three Sasakian models (the standard contact structure
on R^{2n+1}, the unit sphere with a homothetic deformation, and the Bergman
ball times a line).  Every model exposes

* the metric as chart arrays up to second derivatives (``metric_jets``),
* the structure tensors (J, or phi/xi/eta) up to first derivatives,
* Christoffel symbols and the curvature tensor derived from the metric,
* a closed-form curvature expression (``curvature_oracle``) used as an
  independent cross-check,
* a randomized ``self_test`` that must pass before any submanifold
  computation downstream is trusted.

All evaluation is batched: ``points`` has shape ``(B, chart_dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from functools import partial

# planned pairwise contractions: the multi-operand chain-rule einsums
# are hopeless without this
_einsum = partial(np.einsum, optimize=True)

from . import jets
from .jets import Jet, constant, derivative, seed_variables

__all__ = [
    "AmbientFields",
    "AmbientPoint",
    "DomainError",
    "ModelValidationError",
    "make_model",
    "christoffel_from_metric",
    "christoffel_derivative",
    "riemann_from_metric",
]


class DomainError(ValueError):
    """A chart coordinate left the model's declared domain."""


class ModelValidationError(RuntimeError):
    """A model failed its mandatory curvature/structure self-test."""


@dataclass
class AmbientFields:
    """Chart-level field data at a batch of points."""

    G0: np.ndarray  # (B, m, m)
    G1: np.ndarray  # (B, m, m, m)  last axis: d/dq^sigma
    G2: np.ndarray  # (B, m, m, m, m)
    # complex models
    J0: np.ndarray | None = None
    J1: np.ndarray | None = None
    # Sasakian models
    Phi0: np.ndarray | None = None
    Phi1: np.ndarray | None = None
    Xi0: np.ndarray | None = None
    Xi1: np.ndarray | None = None
    Eta0: np.ndarray | None = None
    Eta1: np.ndarray | None = None


@dataclass
class AmbientPoint:
    """A chart point attached to its model, with domain validation."""

    model: "BaseModel"
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if self.coords.shape[-1] != self.model.chart_dim:
            raise DomainError(
                f"expected {self.model.chart_dim} chart coordinates, "
                f"got {self.coords.shape[-1]}"
            )
        self.model.check_in_chart(np.atleast_2d(self.coords))


# ---------------------------------------------------------------------------
# jet-stacking helpers
# ---------------------------------------------------------------------------

def _as_jet(entry, like: Jet) -> Jet:
    if isinstance(entry, Jet):
        return entry
    return constant(np.broadcast_to(np.asarray(entry, float), like.batch_shape), like.num_vars, like.order)


def _stack_matrix(entries, like: Jet, order: int):
    """Stack an m x m nested list of jets into (B,m,m[,m[,m]]) arrays."""
    m = len(entries)
    b = like.batch_shape
    v = like.num_vars
    out0 = np.empty(b + (m, m))
    out1 = np.empty(b + (m, m, v)) if order >= 1 else None
    out2 = np.empty(b + (m, m, v, v)) if order >= 2 else None
    for i in range(m):
        for j in range(m):
            e = _as_jet(entries[i][j], like)
            out0[..., i, j] = e.val
            if order >= 1:
                out1[..., i, j, :] = e.d1
            if order >= 2:
                out2[..., i, j, :, :] = e.d2
    return out0, out1, out2


def _stack_vector(entries, like: Jet, order: int):
    m = len(entries)
    b = like.batch_shape
    v = like.num_vars
    out0 = np.empty(b + (m,))
    out1 = np.empty(b + (m, v)) if order >= 1 else None
    for i in range(m):
        e = _as_jet(entries[i], like)
        out0[..., i] = e.val
        if order >= 1:
            out1[..., i, :] = e.d1
    return out0, out1


# ---------------------------------------------------------------------------
# metric -> connection -> curvature (chart arrays)
# ---------------------------------------------------------------------------

def _metric_bracket(G1):
    """bracket[b, rho, nu, lam] = d_nu g_{rho lam} + d_lam g_{rho nu} - d_rho g_{nu lam}.

    ``G1[b, r, l, n]`` holds ``d_n g_{rl}``.
    """
    d_nu = _einsum("brln->brnl", G1)
    d_lam = G1  # already [rho, nu, lam]
    d_rho = _einsum("bnlr->brnl", G1)
    return d_nu + d_lam - d_rho


def christoffel_from_metric(G0, G1):
    """Levi-Civita symbols Gamma^mu_{nu lambda} from metric first derivatives."""
    Ginv = np.linalg.inv(G0)
    return 0.5 * _einsum("bmr,brnl->bmnl", Ginv, _metric_bracket(G1))


def christoffel_derivative(G0, G1, G2):
    """d_sigma Gamma^mu_{nu lambda}; ``G2[b, r, l, n, s] = d_s d_n g_{rl}``."""
    Ginv = np.linalg.inv(G0)
    dGinv = -_einsum("bmp,bpqs,bqn->bmns", Ginv, G1, Ginv)
    dbracket = G2 + _einsum("brlns->brnls", G2) - _einsum("bnlrs->brnls", G2)
    return 0.5 * (
        _einsum("bmrs,brnl->bmnls", dGinv, _metric_bracket(G1))
        + _einsum("bmr,brnls->bmnls", Ginv, dbracket)
    )


def riemann_from_metric(G0, G1, G2):
    """R^rho_{sigma mu nu} with R(X, Y)Z = R^rho_{sigma mu nu} X^mu Y^nu Z^sigma.

    Curvature convention: R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
    - nabla_{[X, Y]} Z.
    """
    gamma = christoffel_from_metric(G0, G1)
    dgamma = christoffel_derivative(G0, G1, G2)
    t1 = _einsum("brnsm->brsmn", dgamma)  # d_mu Gamma^rho_{nu sigma}
    t2 = _einsum("brmsn->brsmn", dgamma)  # d_nu Gamma^rho_{mu sigma}
    q1 = _einsum("brml,blns->brsmn", gamma, gamma)
    q2 = _einsum("brnl,blms->brsmn", gamma, gamma)
    return t1 - t2 + q1 - q2


# ---------------------------------------------------------------------------
# model classes
# ---------------------------------------------------------------------------

class BaseModel:
    """Shared chart-evaluation machinery for all six models."""

    kind: str = ""
    is_sasakian: bool = False
    chart_dim: int = 0

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"model dimension n must be >= 2, got {n}")
        self.n = n
        self._self_test_report: dict | None = None

    # subclasses fill these ---------------------------------------------------

    def metric_entries(self, coords):
        """Metric components as an m x m nested list of jets/constants."""
        raise NotImplementedError

    def check_in_chart(self, points: np.ndarray) -> None:
        """Raise :class:`DomainError` if any point leaves the chart domain."""

    # shared evaluation --------------------------------------------------------

    def _seed(self, points, order):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.chart_dim:
            raise DomainError(
                f"{self.kind}: expected chart dim {self.chart_dim}, got {pts.shape[-1]}"
            )
        self.check_in_chart(pts)
        return seed_variables(pts, order, batch=True)

    # extra seed order consumed by the model's own chart machinery (e.g. an
    # embedding derivative)
    _metric_seed_extra = 0

    def metric_jets(self, points, order: int = 2):
        """Metric value and chart derivatives: arrays G0, G1, G2."""
        seeds = self._seed(points, order + self._metric_seed_extra)
        entries = self.metric_entries(seeds)
        like = next(
            (e for row in entries for e in row if isinstance(e, Jet)), None
        )
        if like is None:  # fully constant metric
            like = jets._drop(seeds[0]) if self._metric_seed_extra else seeds[0]
        G0, G1, G2 = _stack_matrix(entries, like, order)
        self._assert_spd(G0)
        return G0, G1, G2

    def _assert_spd(self, G0):
        try:
            np.linalg.cholesky(G0)
        except np.linalg.LinAlgError:
            eigs = np.linalg.eigvalsh(G0)
            bad = int(np.argmin(eigs[..., 0]))
            raise ModelValidationError(
                f"{self.kind}: metric not positive definite at batch index {bad} "
                f"(min eigenvalue {eigs[bad, 0]:.3e})"
            ) from None

    def fields_at(self, points) -> AmbientFields:
        raise NotImplementedError

    def christoffel_at(self, points):
        G0, G1, _ = self.metric_jets(points, order=1)
        return christoffel_from_metric(G0, G1)

    def riemann_at(self, points):
        G0, G1, G2 = self.metric_jets(points, order=2)
        return riemann_from_metric(G0, G1, G2)

    def curvature_oracle(self, points, X, Y, Z):
        raise NotImplementedError

    # self-test ----------------------------------------------------------------

    def self_test(self, seed: int = 1234, num_points: int = 50, strict: bool = True):
        """Randomized structure/curvature validation; cached after first run.

        Returns a dict mapping check name to residual; the special key
        ``ok`` reports whether every residual is within its tolerance.
        """
        if self._self_test_report is not None:
            return self._self_test_report
        rng = np.random.default_rng(seed)
        pts = self.random_chart_points(rng, num_points)
        report = self._run_self_test(pts, rng)
        tols = self._self_test_tols()
        bad = {k: v for k, v in report.items() if v > tols[k]}
        report["ok"] = not bad
        if strict and bad:
            raise ModelValidationError(
                f"{self.kind} failed self-test: "
                + ", ".join(f"{k}={v:.2e} (tol {tols[k]:.0e})" for k, v in bad.items())
            )
        self._self_test_report = report
        return report

    def random_chart_points(self, rng, count):
        raise NotImplementedError

    def _curvature_match(self, pts, rng):
        """Relative mismatch of derived Riemann vs closed-form curvature."""
        B = pts.shape[0]
        R = self.riemann_at(pts)
        X, Y, Z = (rng.normal(size=(B, self.chart_dim)) for _ in range(3))
        derived = _einsum("brsmn,bm,bn,bs->br", R, X, Y, Z)
        oracle = self.curvature_oracle(pts, X, Y, Z)
        scale = np.maximum(np.linalg.norm(oracle, axis=-1), 1.0)
        return float(np.max(np.linalg.norm(derived - oracle, axis=-1) / scale))

    def _bianchi_residual(self, pts, rng):
        R = self.riemann_at(pts)
        cyc = R + _einsum("brsmn->brmns", R) + _einsum("brsmn->brnsm", R)
        scale = max(float(np.max(np.abs(R))), 1.0)
        return float(np.max(np.abs(cyc)) / scale)


class ComplexSpaceFormModel(BaseModel):
    """Kaehler chart with a closed-form constant-holomorphic-curvature check."""

    is_sasakian = False

    def __init__(self, n: int, c: int):
        super().__init__(n)
        if c not in (-1, 0, 1):
            raise ValueError(f"holomorphic curvature sign c must be -1, 0, or +1")
        self.c = c
        self.chart_dim = 2 * n
        self.kind = {0: "C_n", 1: "CP_n", -1: "CH_n"}[c]

    # J is multiplication by i in the affine chart: (x, y) -> (-y, x).
    def _J_matrix(self):
        n = self.n
        J = np.zeros((2 * n, 2 * n))
        J[:n, n:] = -np.eye(n)
        J[n:, :n] = np.eye(n)
        return J

    def check_in_chart(self, points):
        if self.c == -1:
            s = np.sum(points**2, axis=-1)
            if np.any(s >= 1.0):
                raise DomainError(
                    f"CH_n chart requires |z| < 1, got |z|^2 max {s.max():.6f}"
                )

    def metric_entries(self, coords):
        n = self.n
        if self.c == 0:
            return [[1.0 if i == j else 0.0 for j in range(2 * n)] for i in range(2 * n)]
        x, y = coords[:n], coords[n:]
        s = x[0] * 0.0
        for i in range(n):
            s = s + x[i] * x[i] + y[i] * y[i]
        if self.c == 1:
            w = jets.recip((1.0 + s) * (1.0 + s))
            diag = (1.0 + s) * w
            sgn = -1.0
        else:
            w = jets.recip((1.0 - s) * (1.0 - s))
            diag = (1.0 - s) * w
            sgn = 1.0
        # A = diag*I + sgn*P*w, B = sgn*Q*w with P = xx^T + yy^T, Q = xy^T - yx^T
        m = 2 * n
        out = [[None] * m for _ in range(m)]
        for a in range(n):
            for b in range(n):
                P = (x[a] * x[b] + y[a] * y[b]) * w
                Q = (x[a] * y[b] - y[a] * x[b]) * w
                A = sgn * P + (diag if a == b else 0.0)
                Bm = sgn * Q
                out[a][b] = A
                out[n + a][n + b] = A
                out[a][n + b] = Bm
                out[n + a][b] = -Bm
        return out

    def fields_at(self, points) -> AmbientFields:
        G0, G1, G2 = self.metric_jets(points, order=2)
        B = G0.shape[0]
        J = self._J_matrix()
        J0 = np.broadcast_to(J, (B,) + J.shape).copy()
        J1 = np.zeros((B,) + J.shape + (self.chart_dim,))
        return AmbientFields(G0=G0, G1=G1, G2=G2, J0=J0, J1=J1)

    def curvature_oracle(self, points, X, Y, Z):
        pts = np.atleast_2d(points)
        G0, _, _ = self.metric_jets(pts, order=0)
        J = self._J_matrix()
        JX = _einsum("mn,bn->bm", J, X)
        JY = _einsum("mn,bn->bm", J, Y)
        JZ = _einsum("mn,bn->bm", J, Z)
        g = lambda U, V: _einsum("bmn,bm,bn->b", G0, U, V)
        out = (
            g(Y, Z)[:, None] * X
            - g(X, Z)[:, None] * Y
            + g(JY, Z)[:, None] * JX
            - g(JX, Z)[:, None] * JY
            - 2.0 * g(JX, Y)[:, None] * JZ
        )
        return self.c * out

    def random_chart_points(self, rng, count):
        if self.c == -1:
            pts = rng.normal(size=(count, self.chart_dim))
            pts *= (0.8 * rng.uniform(0.1, 1.0, size=(count, 1)) ** (1.0 / self.chart_dim)
                    / np.linalg.norm(pts, axis=1, keepdims=True))
            return pts
        return rng.uniform(-0.9, 0.9, size=(count, self.chart_dim))

    @staticmethod
    def _self_test_tols():
        return {
            "J_squared": 1e-12,
            "hermitian_compat": 1e-12,
            "holomorphic_sectional": 1e-8,
            "curvature_oracle": 1e-8,
            "bianchi": 1e-9,
        }

    def _run_self_test(self, pts, rng):
        B = pts.shape[0]
        G0, _, _ = self.metric_jets(pts, order=0)
        J = self._J_matrix()
        report = {}
        report["J_squared"] = float(np.max(np.abs(J @ J + np.eye(self.chart_dim))))
        X = rng.normal(size=(B, self.chart_dim))
        Y = rng.normal(size=(B, self.chart_dim))
        JX = X @ J.T
        JY = Y @ J.T
        hermitian = _einsum("bmn,bm,bn->b", G0, JX, JY) - _einsum(
            "bmn,bm,bn->b", G0, X, Y
        )
        report["hermitian_compat"] = float(np.max(np.abs(hermitian)))
        # holomorphic sectional curvature of the span {X, JX} equals 4c
        R = self.riemann_at(pts)
        RX = _einsum("brsmn,bm,bn,bs->br", R, X, JX, JX)
        num = _einsum("bmn,bm,bn->b", G0, RX, X)
        den = _einsum("bmn,bm,bn->b", G0, X, X) ** 2
        report["holomorphic_sectional"] = float(np.max(np.abs(num / den - 4.0 * self.c)))
        report["curvature_oracle"] = self._curvature_match(pts, rng)
        report["bianchi"] = self._bianchi_residual(pts, rng)
        return report


class SasakianModel(BaseModel):
    """Shared Sasakian checks; subclasses provide fields and the oracle."""

    is_sasakian = True
    c_tilde: float = 0.0

    def curvature_oracle(self, points, X, Y, Z):
        pts = np.atleast_2d(points)
        f = self.fields_at(pts)
        G0, Phi, Xi, Eta = f.G0, f.Phi0, f.Xi0, f.Eta0
        g = lambda U, V: _einsum("bmn,bm,bn->b", G0, U, V)
        eta = lambda U: _einsum("bm,bm->b", Eta, U)
        phi = lambda U: _einsum("bmn,bn->bm", Phi, U)
        pX, pY, pZ = phi(X), phi(Y), phi(Z)
        k1 = (self.c_tilde + 3.0) / 4.0
        k2 = (self.c_tilde - 1.0) / 4.0
        sect = g(Y, Z)[:, None] * X - g(X, Z)[:, None] * Y
        struct = (
            (eta(X) * eta(Z))[:, None] * Y
            - (eta(Y) * eta(Z))[:, None] * X
            + (g(X, Z) * eta(Y))[:, None] * Xi
            - (g(Y, Z) * eta(X))[:, None] * Xi
            + g(pY, Z)[:, None] * pX
            - g(pX, Z)[:, None] * pY
            + 2.0 * g(X, pY)[:, None] * pZ
        )
        return k1 * sect + k2 * struct

    @staticmethod
    def _self_test_tols():
        return {
            "eta_vs_metric": 1e-10,
            "phi_xi": 1e-10,
            "eta_phi": 1e-10,
            "phi_squared": 1e-10,
            "phi_compat": 1e-10,
            "d_eta": 1e-10,
            "rank_phi_small": 1e-10,
            "rank_phi_gap": 1.0,  # reported as 1 - ok flag style below
            "nabla_xi": 1e-8,
            "nabla_phi": 1e-8,
            "phi_sectional": 1e-8,
            "curvature_oracle": 1e-8,
            "bianchi": 1e-9,
        }

    def _run_self_test(self, pts, rng):
        B = pts.shape[0]
        f = self.fields_at(pts)
        G0, Phi0, Phi1, Xi0, Xi1, Eta0, Eta1 = (
            f.G0, f.Phi0, f.Phi1, f.Xi0, f.Xi1, f.Eta0, f.Eta1,
        )
        m = self.chart_dim
        X = rng.normal(size=(B, m))
        Y = rng.normal(size=(B, m))
        g = lambda U, V: _einsum("bmn,bm,bn->b", G0, U, V)
        report = {}
        report["eta_vs_metric"] = float(
            np.max(np.abs(Eta0 - _einsum("bmn,bn->bm", G0, Xi0)))
        )
        report["phi_xi"] = float(np.max(np.abs(_einsum("bmn,bn->bm", Phi0, Xi0))))
        report["eta_phi"] = float(np.max(np.abs(_einsum("bm,bmn->bn", Eta0, Phi0))))
        phi2 = _einsum("bmr,brn->bmn", Phi0, Phi0)
        target = -np.eye(m)[None] + _einsum("bm,bn->bmn", Xi0, Eta0)
        report["phi_squared"] = float(np.max(np.abs(phi2 - target)))
        pX = _einsum("bmn,bn->bm", Phi0, X)
        pY = _einsum("bmn,bn->bm", Phi0, Y)
        etaX = _einsum("bm,bm->b", Eta0, X)
        etaY = _einsum("bm,bm->b", Eta0, Y)
        report["phi_compat"] = float(np.max(np.abs(g(pX, pY) - g(X, Y) + etaX * etaY)))
        # d eta (X, Y) = g(X, phi Y) with the half-antisymmetrization convention;
        # Eta1[b, a, s] = d_s eta_a, so deta[b, m, n] = (d_m eta_n - d_n eta_m)/2
        deta = 0.5 * (Eta1.transpose(0, 2, 1) - Eta1)
        lhs = _einsum("bmn,bm,bn->b", deta, X, Y)
        rhs = _einsum("bmn,bm,bn->b", G0, X, pY)
        report["d_eta"] = float(np.max(np.abs(lhs - rhs)))
        sv = np.linalg.svd(Phi0, compute_uv=False)
        report["rank_phi_small"] = float(np.max(sv[:, -1]))
        report["rank_phi_gap"] = float(np.max(1e-8 / np.maximum(sv[:, -2], 1e-300)))
        # nabla_X xi = -phi X
        gamma = self.christoffel_at(pts)
        covxi = _einsum("bms,bs->bm", Xi1, X) + _einsum(
            "bmnl,bn,bl->bm", gamma, X, Xi0
        )
        report["nabla_xi"] = float(np.max(np.abs(covxi + pX)))
        # (nabla_X phi) Y = g(X, Y) xi - eta(Y) X
        dphi = _einsum("bmls,bs,bl->bm", Phi1, X, Y)
        corr = _einsum("bmnr,bn,brl,bl->bm", gamma, X, Phi0, Y) - _einsum(
            "bmr,brnl,bn,bl->bm", Phi0, gamma, X, Y
        )
        lhsp = dphi + corr
        rhsp = g(X, Y)[:, None] * Xi0 - etaY[:, None] * X
        report["nabla_phi"] = float(np.max(np.abs(lhsp - rhsp)))
        # phi-sectional curvature of span {U, phi U}, U orthogonal to xi
        U = X - (etaX / g(Xi0, Xi0))[:, None] * Xi0
        pU = _einsum("bmn,bn->bm", Phi0, U)
        R = self.riemann_at(pts)
        RU = _einsum("brsmn,bm,bn,bs->br", R, U, pU, pU)
        num = _einsum("bmn,bm,bn->b", G0, RU, U)
        den = g(U, U) * g(pU, pU)
        report["phi_sectional"] = float(np.max(np.abs(num / den - self.c_tilde)))
        report["curvature_oracle"] = self._curvature_match(pts, rng)
        report["bianchi"] = self._bianchi_residual(pts, rng)
        return report


class SasakianR(SasakianModel):
    """The standard contact metric structure on R^{2n+1} (phi-sectional -3)."""

    kind = "Sasakian_R"
    c_tilde = -3.0

    def __init__(self, n: int):
        super().__init__(n)
        self.a = 1.0
        self.chart_dim = 2 * n + 1

    def check_in_chart(self, points):
        pass  # global chart

    def _eta_entries(self, coords):
        n = self.n
        eta = [-0.5 * coords[n + i] for i in range(n)]
        eta += [0.0] * n + [0.5]
        return eta

    def metric_entries(self, coords):
        n = self.n
        m = 2 * n + 1
        eta = self._eta_entries(coords)
        out = [[None] * m for _ in range(m)]
        for i in range(m):
            for j in range(m):
                term = eta[i] * eta[j]
                if i == j and i < 2 * n:
                    term = term + 0.25
                out[i][j] = term
        return out

    def fields_at(self, points) -> AmbientFields:
        G0, G1, G2 = self.metric_jets(points, order=2)
        pts = np.atleast_2d(points)
        B = pts.shape[0]
        n, m = self.n, self.chart_dim
        y = pts[:, n : 2 * n]
        Phi0 = np.zeros((B, m, m))
        Phi1 = np.zeros((B, m, m, m))
        for j in range(n):
            Phi0[:, n + j, j] = -1.0  # phi(d/dx_j) = -d/dy_j
            Phi0[:, j, n + j] = 1.0  # phi(d/dy_j) = d/dx_j + y_j d/dz
            Phi0[:, 2 * n, n + j] = y[:, j]
            Phi1[:, 2 * n, n + j, n + j] = 1.0
        Xi0 = np.zeros((B, m))
        Xi0[:, 2 * n] = 2.0
        Xi1 = np.zeros((B, m, m))
        Eta0 = np.zeros((B, m))
        Eta0[:, :n] = -0.5 * y
        Eta0[:, 2 * n] = 0.5
        Eta1 = np.zeros((B, m, m))
        for j in range(n):
            Eta1[:, j, n + j] = -0.5
        return AmbientFields(
            G0=G0, G1=G1, G2=G2,
            Phi0=Phi0, Phi1=Phi1, Xi0=Xi0, Xi1=Xi1, Eta0=Eta0, Eta1=Eta1,
        )

    def random_chart_points(self, rng, count):
        return rng.uniform(-1.0, 1.0, size=(count, self.chart_dim))


class SasakianS(SasakianModel):
    """Unit-sphere Sasakian structure with a homothetic deformation.

    The chart solves the first real ambient coordinate of the last complex
    slot from the unit-norm constraint; structure tensors are pulled back
    from the flat complex ambient via the outward normal.
    """

    kind = "Sasakian_S"
    # phi is minus the projected ambient complex rotation; the sign is pinned
    # by the nabla_X xi = -phi X identity (see self_test).
    _phi_sign = -1.0

    def __init__(self, n: int, a: float = 1.0):
        super().__init__(n)
        if a <= 0:
            raise ValueError("deformation parameter a must be positive")
        self.a = float(a)
        self.c_tilde = 4.0 / self.a - 3.0
        self.chart_dim = 2 * n + 1

    def check_in_chart(self, points):
        s = np.sum(points**2, axis=-1)
        if np.any(s >= 1.0 - 1e-12):
            raise DomainError(
                f"Sasakian_S chart requires sum q^2 < 1, got max {s.max():.8f}"
            )

    def _embedding(self, coords):
        """Ambient coordinates (x_1..x_{n+1}, y_1..y_{n+1}) as jets."""
        n = self.n
        s = coords[0] * 0.0
        for c in coords:
            s = s + c * c
        xlast = jets.sqrt(1.0 - s)
        E = list(coords[:n]) + [xlast] + list(coords[n : 2 * n]) + [coords[2 * n]]
        return E

    @staticmethod
    def _J_ambient(E):
        """Multiplication by i on C^{n+1}: (x, y) -> (-y, x)."""
        k = len(E) // 2
        return [-e for e in E[k:]] + list(E[:k])

    def _chart_tensors(self, coords):
        """Round metric, contact form and phi-bilinear as jets (one order down)."""
        m = self.chart_dim
        E = self._embedding(coords)
        T = [[derivative(Emu, aidx) for Emu in E] for aidx in range(m)]
        JE = self._J_ambient([jets._drop(e) for e in E])
        JT = [self._J_ambient(T[aidx]) for aidx in range(m)]
        dot = lambda U, V: sum((u * v for u, v in zip(U, V)), start=U[0] * 0.0)
        gbar = [[dot(T[aidx], T[bidx]) for bidx in range(m)] for aidx in range(m)]
        etabar = [dot(T[aidx], JE) for aidx in range(m)]
        K = [[dot(T[aidx], JT[bidx]) for bidx in range(m)] for aidx in range(m)]
        return gbar, etabar, K

    _metric_seed_extra = 1

    def metric_entries(self, coords):
        m = self.chart_dim
        a = self.a
        gbar, etabar, _ = self._chart_tensors(coords)
        return [
            [a * gbar[i][j] + a * (a - 1.0) * etabar[i] * etabar[j] for j in range(m)]
            for i in range(m)
        ]

    def fields_at(self, points) -> AmbientFields:
        seeds = self._seed(points, 3)
        m = self.chart_dim
        a = self.a
        gbar, etabar, K = self._chart_tensors(seeds)
        like = gbar[0][0]
        g_entries = [
            [a * gbar[i][j] + a * (a - 1.0) * etabar[i] * etabar[j] for j in range(m)]
            for i in range(m)
        ]
        G0, G1, G2 = _stack_matrix(g_entries, like, 2)
        self._assert_spd(G0)
        Gb0, Gb1, _ = _stack_matrix(gbar, like, 1)
        K0, K1, _ = _stack_matrix(K, like, 1)
        Eb0, Eb1 = _stack_vector(etabar, like, 1)
        Gbinv0 = np.linalg.inv(Gb0)
        Gbinv1 = -_einsum("bmp,bpqs,bqn->bmns", Gbinv0, Gb1, Gbinv0)
        s = self._phi_sign
        Phi0 = s * _einsum("bac,bcd->bad", Gbinv0, K0)
        Phi1 = s * (
            _einsum("bacs,bcd->bads", Gbinv1, K0)
            + _einsum("bac,bcds->bads", Gbinv0, K1)
        )
        xibar0 = _einsum("bpq,bq->bp", Gbinv0, Eb0)
        xibar1 = _einsum("bpqs,bq->bps", Gbinv1, Eb0) + _einsum(
            "bpq,bqs->bps", Gbinv0, Eb1
        )
        return AmbientFields(
            G0=G0, G1=G1, G2=G2,
            Phi0=Phi0, Phi1=Phi1,
            Xi0=xibar0 / a, Xi1=xibar1 / a,
            Eta0=a * Eb0, Eta1=a * Eb1,
        )

    def random_chart_points(self, rng, count):
        pts = rng.normal(size=(count, self.chart_dim))
        r = 0.8 * rng.uniform(0.2, 1.0, size=(count, 1)) ** (1.0 / self.chart_dim)
        return pts * r / np.linalg.norm(pts, axis=1, keepdims=True)


class SasakianB(SasakianModel):
    """Bergman-ball times line, with a homothetic deformation."""

    kind = "Sasakian_B"
    # Contact-form orientation paired with phi = sign * (complex rotation
    # lifted horizontally); pinned by the nabla_X xi = -phi X identity.
    _phi_sign = -1.0

    def __init__(self, n: int, a: float = 1.0):
        super().__init__(n)
        if a <= 0:
            raise ValueError("deformation parameter a must be positive")
        self.a = float(a)
        self.c_tilde = -1.0 / self.a - 3.0
        self.chart_dim = 2 * n + 1

    @property
    def _kappa(self):
        return 4.0 * self._phi_sign

    def check_in_chart(self, points):
        s = np.sum(points[..., :-1] ** 2, axis=-1)
        if np.any(s >= 1.0 - 1e-12):
            raise DomainError(
                f"Sasakian_B chart requires |z| < 1, got |z|^2 max {s.max():.8f}"
            )

    def _omega_entries(self, coords):
        n = self.n
        x, y = coords[:n], coords[n : 2 * n]
        s = x[0] * 0.0
        for i in range(n):
            s = s + x[i] * x[i] + y[i] * y[i]
        w = jets.recip(1.0 - s)
        om = [self._kappa * y[i] * w for i in range(n)]
        om += [-self._kappa * x[i] * w for i in range(n)]
        om += [0.0]
        return om, s, w

    def metric_entries(self, coords):
        n = self.n
        m = self.chart_dim
        a = self.a
        x, y = coords[:n], coords[n : 2 * n]
        om, s, w = self._omega_entries(coords)
        w2 = w * w
        one_minus_s = 1.0 - s
        eta = list(om)
        eta[2 * n] = 1.0
        out = [[None] * m for _ in range(m)]
        # Bergman block scaled by 4 (phi-sectional -4 before deformation)
        for i in range(n):
            for j in range(n):
                P = (x[i] * x[j] + y[i] * y[j]) * w2
                Q = (x[i] * y[j] - y[i] * x[j]) * w2
                A = 4.0 * (P + (one_minus_s * w2 if i == j else 0.0))
                Bm = 4.0 * Q
                out[i][j] = A
                out[n + i][n + j] = A
                out[i][n + j] = Bm
                out[n + i][j] = -Bm
        for i in range(m):
            for j in range(m):
                base = out[i][j] if out[i][j] is not None else 0.0
                out[i][j] = a * base + a * a * (eta[i] * eta[j])
        return out

    def fields_at(self, points) -> AmbientFields:
        G0, G1, G2 = self.metric_jets(points, order=2)
        seeds = self._seed(points, 1)
        n, m = self.n, self.chart_dim
        om, _, _ = self._omega_entries(seeds)
        eta = list(om)
        eta[2 * n] = 1.0
        Eb0, Eb1 = _stack_vector(eta, seeds[0], 1)
        B = Eb0.shape[0]
        # phi: complex rotation on the z block, lifted to ker(eta-bar)
        Jz = np.zeros((m, m))
        Jz[:n, n : 2 * n] = -np.eye(n)
        Jz[n : 2 * n, :n] = np.eye(n)
        s = self._phi_sign
        Phi0 = np.broadcast_to(s * Jz, (B, m, m)).copy()
        Phi1 = np.zeros((B, m, m, m))
        # t-row: phi X must satisfy eta-bar(phi X) = 0
        Phi0[:, 2 * n, :] = -s * _einsum("bc,cd->bd", Eb0, Jz)
        Phi1[:, 2 * n, :, :] = -s * _einsum("bcs,cd->bds", Eb1, Jz)
        Xi0 = np.zeros((B, m))
        Xi0[:, 2 * n] = 1.0 / self.a
        Xi1 = np.zeros((B, m, m))
        return AmbientFields(
            G0=G0, G1=G1, G2=G2,
            Phi0=Phi0, Phi1=Phi1, Xi0=Xi0, Xi1=Xi1,
            Eta0=self.a * Eb0, Eta1=self.a * Eb1,
        )

    def random_chart_points(self, rng, count):
        z = rng.normal(size=(count, self.chart_dim - 1))
        r = 0.75 * rng.uniform(0.2, 1.0, size=(count, 1)) ** (1.0 / (self.chart_dim - 1))
        z = z * r / np.linalg.norm(z, axis=1, keepdims=True)
        t = rng.uniform(-1.0, 1.0, size=(count, 1))
        return np.concatenate([z, t], axis=1)


def make_model(kind: str, n: int, a: float = 1.0) -> BaseModel:
    """Build one of the six ambient models by name.

    ``kind`` is one of ``C_n, CP_n, CH_n, Sasakian_R, Sasakian_S,
    Sasakian_B``; ``a`` is the homothetic deformation parameter of the two
    deformable Sasakian models.
    """
    if kind == "C_n":
        return ComplexSpaceFormModel(n, 0)
    if kind == "CP_n":
        return ComplexSpaceFormModel(n, 1)
    if kind == "CH_n":
        return ComplexSpaceFormModel(n, -1)
    if kind == "Sasakian_R":
        return SasakianR(n)
    if kind == "Sasakian_S":
        return SasakianS(n, a)
    if kind == "Sasakian_B":
        return SasakianB(n, a)
    raise ValueError(f"unknown model kind {kind!r}")
