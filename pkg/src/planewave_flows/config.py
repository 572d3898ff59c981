"""JSON run configurations: schema validation and field construction.

A configuration names a flow family and its parameters, the model
parameters, a seeded sampler and optional tolerances, grid and output
paths.  ``schema.json`` (shipped with the package) documents the top-level
layout; the family-specific keys are described in :func:`build_field`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import flows
from .core import ModelParams, StructuralError
from .fields import FlowField, PlaneWaveComponent, zero_field
from .forcing import DensityForcing, PlaneWaveForcing, build_forced_solution
from .residuals import SamplerSpec
from .shapes import FourierSum, GaussianKernel, Profile, SineMode, cosine_mode

DEFAULT_TOLERANCES = {"analytic": 1e-8, "fd": 5e-4, "fd_ratio": 3.5, "witness": 1e-2}


class ConfigError(StructuralError):
    """The configuration is malformed or inconsistent."""


@dataclass(frozen=True)
class RunConfig:
    name: str
    params: ModelParams
    flow: dict
    sampler: SamplerSpec
    system: str | None = None
    grid: dict | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    fd_step: float = 1e-3
    expect: str = "pass"
    output: dict = field(default_factory=dict)

    def with_seed(self, seed: int | None) -> "RunConfig":
        if seed is None:
            return self
        s = self.sampler
        return RunConfig(
            self.name, self.params, self.flow, SamplerSpec(s.box, s.t_range, s.count, int(seed)),
            self.system, self.grid, self.tolerances, self.fd_step, self.expect, self.output,
        )


def _schema() -> dict:
    text = resources.files("planewave_flows").joinpath("schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def parse_config(data: dict) -> RunConfig:
    """Validate ``data`` against the schema and build a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        On schema violations.
    StructuralError
        On inconsistent model parameters (for example ``f != 0`` in 2-D).
    """
    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from exc
    params = ModelParams(**data["params"])
    s = data["sampler"]
    sampler = SamplerSpec(
        tuple(s.get("box", (-math.pi, math.pi))),
        tuple(s.get("t_range", (0.0, 1.0))),
        int(s.get("count", 1000)),
        int(s["seed"]),
    )
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(data.get("tolerances", {}))
    return RunConfig(
        name=data["name"],
        params=params,
        flow=data["flow"],
        sampler=sampler,
        system=data.get("system"),
        grid=data.get("grid"),
        tolerances=tol,
        fd_step=float(data.get("fd_step", 1e-3)),
        expect=data.get("expect", "pass"),
        output=dict(data.get("output", {})),
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON configuration; ``OSError`` propagates."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    return parse_config(data)


def bundled_config_paths() -> list[Path]:
    """Example configurations shipped with the package, sorted by name."""
    root = resources.files("planewave_flows").joinpath("configs")
    return sorted((Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)


def bundled_config(name: str) -> Path:
    for p in bundled_config_paths():
        if p.stem == name:
            return p
    raise ConfigError(f"no bundled configuration named {name!r}")


# ---------------------------------------------------------------- parsing helpers


def _req(d: dict, key: str):
    if key not in d:
        raise ConfigError(f"missing key {key!r} in {sorted(d)}")
    return d[key]


def parse_shape(d: dict):
    kind = _req(d, "type")
    if kind == "sine":
        return SineMode(float(d.get("beta", 1.0)), float(d.get("sigma", 1.0)), float(d.get("delta", 0.0)))
    if kind == "cosine":
        return cosine_mode(float(d.get("beta", 1.0)), float(d.get("sigma", 1.0)), float(d.get("delta", 0.0)))
    if kind == "fourier":
        return FourierSum(tuple(parse_shape({"type": "sine", **m}) for m in _req(d, "modes")))
    if kind == "gaussian":
        return GaussianKernel(float(d.get("mass", 1.0)), float(d.get("width", 1.0)))
    if kind == "tanh":
        return Profile.tanh(float(d.get("amplitude", 1.0)), float(d.get("width", 1.0)))
    raise ConfigError(f"unknown shape type {kind!r}")


def _optional_shape(d):
    return None if d is None else parse_shape(d)


def _fourier_density(spec):
    """``c0 + c1 cos(phi) + s1 sin(phi) + c2 cos(2 phi) + ...`` from ``[c0, c1, s1, ...]``."""
    if isinstance(spec, (int, float)):
        return float(spec)
    coeffs = [float(c) for c in spec]

    def density(phi):
        out = coeffs[0]
        for j in range(1, len(coeffs)):
            order = (j + 1) // 2
            out += coeffs[j] * (math.cos(order * phi) if j % 2 else math.sin(order * phi))
        return out

    return density


def _interacting_spec(flow: dict, params: ModelParams) -> flows.FlowSpec:
    subspaces = [tuple(np.asarray(e, dtype=float) for e in pair) for pair in _req(flow, "subspaces")]
    wavelengths = [float(w) for w in _req(flow, "wavelengths")]
    groups = []
    for group in _req(flow, "groups"):
        items = []
        for item in group:
            if "angle" in item:
                items.append((float(item["angle"]), float(item.get("beta", 1.0)), float(item.get("delta", 0.0))))
            else:
                items.append(PlaneWaveComponent(_req(item, "direction"), _req(item, "wavevector"), SineMode(float(item.get("beta", 1.0)), 1.0, float(item.get("delta", 0.0)))))
        groups.append(items)
    return flows.interacting_spec(params, subspaces, wavelengths, groups, flow.get("drift"))


def _transverse_spec(flow: dict, params: ModelParams) -> flows.FlowSpec:
    groups = []
    for g in _req(flow, "groups"):
        groups.append((_req(g, "direction"), [(_req(w, "wavevector"), parse_shape(_req(w, "shape"))) for w in _req(g, "waves")]))
    return flows.transverse_spec(params, groups, flow.get("drift"), bool(flow.get("reproject", False)))


def _forcing(d: dict):
    kind = _req(d, "kind")
    if kind == "plane_waves":
        comps = [PlaneWaveComponent(_req(c, "direction"), _req(c, "wavevector"), parse_shape(_req(c, "shape"))) for c in _req(d, "components")]
        return PlaneWaveForcing(comps)
    if kind == "density":
        if "values" in d:
            return DensityForcing(_req(d, "direction"), _req(d, "wavevector"), _req(d, "nodes"), _req(d, "weights"), d["values"])
        power = float(d.get("power", 0.0))
        rate = float(d.get("rate", 1.0))
        scale = float(d.get("scale", 1.0))
        return DensityForcing.trapezoid(
            _req(d, "direction"), _req(d, "wavevector"),
            lambda xi: scale * xi**power * np.exp(-rate * xi),
            float(_req(d, "xi_max")), int(_req(d, "count")),
        )
    raise ConfigError(f"unknown forcing kind {kind!r}")


def initial_spec(flow: dict | None, params: ModelParams) -> flows.FlowSpec | None:
    if flow is None:
        return None
    family = _req(flow, "family")
    if family == "transverse":
        return _transverse_spec(flow, params)
    if family == "interacting_transverse":
        return _interacting_spec(flow, params)
    if family == "density":
        return _forcing({"kind": "density", **flow}).as_spec(params)
    raise ConfigError(f"initial conditions must be transverse, interacting or density, got {family!r}")


def build_field(flow: dict, params: ModelParams) -> FlowField:
    """Construct the flow described by a ``flow`` block.

    Family keys
    -----------
    transverse : groups [{direction, waves [{wavevector, shape}]}], drift, reproject
    interacting_transverse : subspaces, wavelengths, groups [[{angle, beta, delta} or {direction, wavevector, beta, delta}]], drift
    parallel_augmented : interacting keys plus gamma and optional parallel_direction
    integral : subspaces, wavelengths, quadrature_order, densities [{beta, delta}] (numbers or Fourier coefficients)
    horizontal_plane : k2, shape, btilde, drift
    interacting_horizontal : waves [{k2, beta, delta}], btilde, drift
    kolmogorov : k, m, alpha, beta_forcing, match_strat
    mgw : k, m, alpha, branch
    parallel_boussinesq : modes [{k2, w0, b0, phase}], p0
    forced : initial (flow or null), forcing {kind, ...}, part ("solution" or "steady")
    superposition : fields [flow, ...], check
    galilean_boost : base (flow), c
    negative_control : kind, wavevectors
    """
    family = _req(flow, "family")
    if family == "zero":
        return zero_field(params, "boussinesq" if flow.get("boussinesq") else "navier_stokes")
    if family == "transverse":
        return flows.build_transverse(_transverse_spec(flow, params))
    if family == "interacting_transverse":
        return flows.build_interacting_transverse(_interacting_spec(flow, params))
    if family == "parallel_augmented":
        base = flows.build_interacting_transverse(_interacting_spec(flow, params))
        return flows.add_parallel_component(base, float(_req(flow, "gamma")), flow.get("parallel_direction"))
    if family == "integral":
        dens = [(_fourier_density(d.get("beta", 1.0)), _fourier_density(d.get("delta", 0.0))) for d in _req(flow, "densities")]
        subspaces = [tuple(np.asarray(e, dtype=float) for e in pair) for pair in _req(flow, "subspaces")]
        return flows.build_integral_flow(subspaces, dens, _req(flow, "wavelengths"), int(_req(flow, "quadrature_order")), params, flow.get("drift"))
    if family == "horizontal_plane":
        return flows.build_horizontal_plane_boussinesq(_req(flow, "k2"), parse_shape(_req(flow, "shape")), _optional_shape(flow.get("btilde")), flow.get("drift"), params)
    if family == "interacting_horizontal":
        waves = [(_req(w, "k2"), float(w.get("beta", 1.0)), float(w.get("delta", 0.0))) for w in _req(flow, "waves")]
        return flows.build_interacting_horizontal_boussinesq(waves, _optional_shape(flow.get("btilde")), flow.get("drift"), params)
    if family == "kolmogorov":
        args = (float(_req(flow, "k")), float(_req(flow, "m")), float(_req(flow, "alpha")), float(flow.get("beta_forcing", 0.0)))
        fld, required = flows.build_kolmogorov(*args, params=params)
        if flow.get("match_strat", False):
            fld, _ = flows.build_kolmogorov(*args, params=_with(params, strat=required))
        return fld
    if family == "mgw":
        return flows.build_mgw(float(_req(flow, "k")), float(_req(flow, "m")), float(_req(flow, "alpha")), int(flow.get("branch", 1)), params)
    if family == "parallel_boussinesq":
        modes = [(_req(m, "k2"), float(_req(m, "w0")), float(_req(m, "b0")), float(m.get("phase", 0.0))) for m in _req(flow, "modes")]
        return flows.build_parallel_boussinesq(modes, float(flow.get("p0", 0.0)), params)
    if family == "forced":
        sol = build_forced_solution(initial_spec(flow.get("initial"), params), _forcing(_req(flow, "forcing")), params)
        part = flow.get("part", "solution")
        if part == "steady":
            if sol.steady is None:
                raise ConfigError("this forcing has no steady state")
            return sol.steady
        if part != "solution":
            raise ConfigError(f"unknown forced part {part!r}")
        return sol.field
    if family == "superposition":
        fields = [build_field(f, params) for f in _req(flow, "fields")]
        return flows.superpose(fields, check=bool(flow.get("check", True)))
    if family == "galilean_boost":
        return flows.galilean_boost(build_field(_req(flow, "base"), params), _req(flow, "c"))
    if family == "negative_control":
        return flows.build_negative_control(_req(flow, "kind"), params, flow.get("wavevectors"))
    raise ConfigError(f"unknown family {family!r}")


def _with(params: ModelParams, **changes) -> ModelParams:
    data = {k: getattr(params, k) for k in ("dim", "nu", "mu", "f", "rho0", "strat")}
    data.update(changes)
    return ModelParams(**data)


__all__ = [
    "ConfigError",
    "RunConfig",
    "build_field",
    "bundled_config",
    "bundled_config_paths",
    "load_config",
    "parse_config",
    "parse_shape",
]
