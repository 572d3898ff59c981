"""Representative members of every positive family, shared by the test modules."""

import math

import numpy as np

from planewave_flows import flows as F
from planewave_flows import forcing as G
from planewave_flows.core import ModelParams
from planewave_flows.shapes import FourierSum, GaussianKernel, SineMode


def transverse():
    p = ModelParams(dim=3, nu=0.1)
    spec = F.transverse_spec(
        p,
        [((0, 0, 1), [((1, 0.3, 0), SineMode(1.0)), ((0, 2, 0), FourierSum((SineMode(0.5, 2.0, 0.3), SineMode(0.2, 1.0, 1.0))))])],
        drift=(0.3, -0.2, 0.5),
    )
    return F.build_transverse(spec)


def interacting(n):
    p = ModelParams(dim=n, nu=0.05, rho0=1.3)
    e = np.eye(n)
    if n == 2:
        subs, lams, groups = [(e[0], e[1])], [1.0], [[(0.3, 1.0, 0.1), (1.4, 0.7, 0.5), (2.9, -0.4, 1.0)]]
    elif n == 3:
        subs, lams, groups = [((1, 1, 0), (0, 1, 1))], [1.5], [[(0.3, 1.0, 0.1), (1.4, 0.7, 0.5), (2.9, -0.4, 1.0)]]
    else:
        subs = [(e[0], e[1]), (e[2], e[3])]
        lams = [1.0, 2.0]
        groups = [[(0.3, 1.0, 0.1), (1.4, 0.7, 0.5)], [(0.2, 0.5, 0.0), (2.0, 1.0, 0.3), (4.0, 0.3, 0.9)]]
    return F.build_interacting_transverse(F.interacting_spec(p, subs, lams, groups, drift=np.full(n, 0.2)))


def horizontal_plane():
    p = ModelParams(dim=3, nu=0.1, mu=0.2, f=0.7)
    return F.build_horizontal_plane_boussinesq((1.0, 0.5), SineMode(1.0, 1.0, 0.2), GaussianKernel(1.0, 0.8), c=(0.3, -0.4, 0.2), params=p)


def interacting_horizontal(count):
    p = ModelParams(dim=3, nu=0.1, mu=0.2, f=0.7, strat=-0.5)
    angles = np.linspace(0.2, 0.2 + 2 * math.pi, count, endpoint=False)
    comps = [((math.cos(a), math.sin(a)), 1.0 + 0.1 * i, 0.3 * i) for i, a in enumerate(angles)]
    return F.build_interacting_horizontal_boussinesq(comps, GaussianKernel(1.0, 0.8), c=(0.3, -0.4, 0.0), params=p)


def kolmogorov(beta):
    base = ModelParams(dim=3, nu=0.3, mu=0.2)
    _, required = F.build_kolmogorov(1.2, 0.7, 0.9, beta, base)
    fld, _ = F.build_kolmogorov(1.2, 0.7, 0.9, beta, ModelParams(dim=3, nu=0.3, mu=0.2, strat=required))
    return fld


def mgw(f, nu):
    return F.build_mgw(1.1, 0.8, 0.7, -1, ModelParams(dim=3, strat=-1.0, f=f, nu=nu, mu=nu))


def parallel_boussinesq():
    p = ModelParams(dim=3, nu=0.1, mu=0.3, strat=-1.0)
    return F.build_parallel_boussinesq([((1.0, 0.5), 0.4, 0.3), ((0.0, 0.0), 0.5, 0.2), ((2.0, -1.0), -0.3, 0.6, 0.4)], p0=0.7, params=p)


def parallel_augmented():
    return F.add_parallel_component(interacting(3), 0.8)


def integral(Q=16, nu=0.02):
    return F.build_integral_flow(
        [((1, 0, 0), (0, 1, 0))],
        [(lambda phi: 1.0 + 0.3 * math.cos(phi), lambda phi: 0.2 * math.sin(phi))],
        [1.5],
        Q,
        ModelParams(dim=3, nu=nu),
    )


def density_example():
    """Density forcing with a density initial condition, 16-node tables."""
    p = ModelParams(dim=3, nu=0.3)
    forcing = G.DensityForcing.trapezoid((0, 0, 1), (1, 0, 0), lambda xi: xi**2 * np.exp(-xi), 4.0, 16)
    v0 = G.DensityForcing.trapezoid((0, 1, 0), (1, 0, 0), lambda xi: np.exp(-(xi**2)), 3.0, 16).as_spec(p)
    return forcing, v0, p


def forced_solutions():
    """Three forced configurations: single mode, density table, interacting."""
    p1 = ModelParams(dim=3, nu=1.0)
    single = G.build_forced_solution(None, G.PlaneWaveForcing([F.PlaneWaveComponent((0, 0, 1), (1, 0, 0), SineMode(1.0))]), p1)
    forcing_d, v0_d, p_d = density_example()
    dens = G.build_forced_solution(v0_d, forcing_d, p_d)
    p2 = ModelParams(dim=2, nu=0.2, rho0=1.5)
    v0 = F.interacting_spec(p2, [((1, 0), (0, 1))], [1.0], [[(0.3, 1.0, 0.0), (2.0, 0.5, 0.3)]])
    forcing = G.PlaneWaveForcing([F.wave_at_angle(((1, 0), (0, 1)), 1.0, 1.1, 0.7, 0.2)])
    inter = G.build_forced_solution(v0, forcing, p2)
    return {"forced_single": single, "forced_density": dens, "forced_interacting": inter}


def positive_fields():
    out = {"transverse": transverse()}
    for n in (2, 3, 4):
        out[f"interacting_n{n}"] = interacting(n)
    out["horizontal_plane"] = horizontal_plane()
    for count in (1, 2, 3):
        out[f"interacting_horizontal_N{count}"] = interacting_horizontal(count)
    out["kolmogorov_unforced"] = kolmogorov(0.0)
    out["kolmogorov_forced"] = kolmogorov(1.5)
    out["mgw_inviscid"] = mgw(0.0, 0.0)
    out["mgw_rotating"] = mgw(0.6, 0.0)
    out["mgw_viscous"] = mgw(0.6, 0.05)
    out["parallel_boussinesq"] = parallel_boussinesq()
    out["parallel_augmented"] = parallel_augmented()
    out["integral_q16"] = integral()
    for name, sol in forced_solutions().items():
        out[name] = sol.field
        out[name + "_steady"] = sol.steady
    return out
