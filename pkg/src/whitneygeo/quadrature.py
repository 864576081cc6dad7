"""Integration grids on the sphere atlas and the flat torus.

Sphere grids put Gauss-Legendre nodes in the polar angles and a trapezoid
rule in the periodic angle, once per chart of the atlas; the smooth chart
windows (normalized to a partition of unity) blend the charts, and nodes
whose window weight vanishes are dropped.  Integrands lifted from smooth
fields on the sphere are analytic in the chart parameters, so convergence
is spectral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .immersions import SphereChart

__all__ = ["IntegrationGrid", "IntegralResult", "build_grid", "sphere_volume"]

#: default resolution per parameter dimension, keyed by sphere dimension
DEFAULT_RESOLUTION = {2: 48, 3: 32, 4: 20}


def sphere_volume(n: int) -> float:
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


@dataclass
class IntegralResult:
    value: float
    resolution: int
    richardson: float

    def resolved(self, tol: float) -> bool:
        return self.richardson <= tol


class IntegrationGrid:
    """Quadrature nodes over the parameter domain of one immersion family.

    Attributes per node: ``chart`` index, parameters ``t``, combined weight
    (quadrature times partition-of-unity), and the sphere point ``u``
    (sphere domain only).
    """

    def __init__(self, n: int, resolution: int, domain: str = "sphere",
                 atlas: SphereChart | None = None,
                 window_power: int | None = None):
        if resolution < 8:
            raise ValueError("resolution must be at least 8")
        if domain not in ("sphere", "torus"):
            raise ValueError(f"unknown integration domain {domain!r}")
        if domain == "sphere" and n > 4:
            raise ValueError("sphere grids support n <= 4 (cost guard)")
        self.n = n
        self.resolution = resolution
        self.domain = domain
        if domain == "torus":
            self.atlas = None
            self._build_torus()
            return
        self.atlas = atlas if atlas is not None else SphereChart(n)
        self._window_power = window_power
        self._build_sphere()

    def _build_torus(self):
        n, K = self.n, self.resolution
        angles = 2.0 * math.pi * np.arange(K) / K
        grids = np.meshgrid(*([angles] * n), indexing="ij")
        self.t = np.stack([g.ravel() for g in grids], axis=-1)
        self.chart = np.zeros(len(self.t), dtype=int)
        self.weight = np.full(len(self.t), (2.0 * math.pi / K) ** n)
        self.u = None
        self.trusted = np.ones(len(self.t), dtype=bool)
        self.num_charts = 1

    def _build_sphere(self):
        n, K = self.n, self.resolution
        xg, wg = np.polynomial.legendre.leggauss(K)
        theta = 0.5 * math.pi * (xg + 1.0)
        wt = 0.5 * math.pi * wg
        phi = 2.0 * math.pi * np.arange(K) / K
        wp = np.full(K, 2.0 * math.pi / K)
        axes = [theta] * (n - 1) + [phi]
        waxes = [wt] * (n - 1) + [wp]
        grids = np.meshgrid(*axes, indexing="ij")
        t_single = np.stack([g.ravel() for g in grids], axis=-1)
        wgrids = np.meshgrid(*waxes, indexing="ij")
        w_single = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)

        from .immersions import TRUST_RADIUS, WINDOW_DROP

        atlas = self.atlas
        charts, ts, ws, us, trust = [], [], [], [], []
        for c in range(atlas.num_charts):
            u = atlas.u_values(c, t_single)
            pou = atlas.partition_of_unity(u, self._window_power)[c]
            keep = pou > WINDOW_DROP
            charts.append(np.full(keep.sum(), c, dtype=int))
            ts.append(t_single[keep])
            ws.append(w_single[keep] * pou[keep])
            us.append(u[keep])
            trust.append(atlas.singular_distance(c, u[keep]) >= TRUST_RADIUS)
        self.chart = np.concatenate(charts)
        self.t = np.concatenate(ts)
        self.weight = np.concatenate(ws)
        self.u = np.concatenate(us)
        self.trusted = np.concatenate(trust)
        self.num_charts = atlas.num_charts

    # -- integration ----------------------------------------------------------

    def integrate(self, values: np.ndarray, density: np.ndarray) -> float:
        """Weighted sum of ``values`` against a per-node volume density."""
        return float(np.sum(self.weight * values * density))

    def round_sphere_volume_check(self) -> float:
        """Integrate 1 against the round metric; relative volume error."""
        if self.domain != "sphere":
            raise ValueError("round-metric check applies to sphere grids")
        dens = np.ones(len(self.t))
        for i in range(self.n - 1):
            dens *= np.sin(self.t[:, i]) ** (self.n - 1 - i)
        got = self.integrate(np.ones(len(self.t)), dens)
        want = sphere_volume(self.n)
        return abs(got - want) / want

    def chunks(self, max_nodes: int):
        """Yield (chart, slice of node indices) blocks of bounded size."""
        for c in range(self.num_charts):
            idx = np.nonzero(self.chart == c)[0]
            for k in range(0, len(idx), max_nodes):
                yield c, idx[k : k + max_nodes]


def build_grid(n: int, resolution: int | None = None, domain: str = "sphere",
               atlas: SphereChart | None = None) -> IntegrationGrid:
    """Grid with Gauss-Legendre polar nodes and trapezoidal periodic nodes."""
    if resolution is None:
        resolution = DEFAULT_RESOLUTION.get(n, 16)
    return IntegrationGrid(n, resolution, domain=domain, atlas=atlas)
