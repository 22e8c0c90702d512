"""Run configuration, binary field snapshots and CSV output."""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import EPS_KEYS, ConfigError, DriftTerms, GLParams, MonotonicityConfig, SimConfig
from .noise import JumpModel
from .spectral import SpectralField, random_field

MAGIC = b"SGGL"
VERSION = 1
_HEADER = struct.Struct("<4sHIIdd")

# section -> key -> (default, help)
DEFAULTS: dict[str, dict[str, tuple[Any, str]]] = {
    "params": {
        "alpha": (0.5, "dispersion of the Laplacian"),
        "beta": (0.5, "dispersion of the power nonlinearity"),
        "gamma": (0.1, "linear gain"),
        "sigma": (3.0, "power exponent"),
        "lambda1_re": ([0.02, 0.0], "real parts of lambda1 (x, y)"),
        "lambda1_im": ([0.0, 0.02], "imaginary parts of lambda1 (x, y)"),
        "lambda2_re": ([0.02, 0.0], "real parts of lambda2 (x, y)"),
        "lambda2_im": ([0.0, 0.0], "imaginary parts of lambda2 (x, y)"),
        "L1": (math.pi, "domain length in x"),
        "L2": (math.pi, "domain length in y"),
    },
    "noise": {
        "family": ("linear", "'linear' (g = c h u) or 'quadratic' (g = h u min(|u|, cap) / 2)"),
        "c": (0.5, "linear family coefficient"),
        "cap": (None, "quadratic family cap on |u| (null: uncapped)"),
        "nu": ([1.0, 2.0], "mark intensities"),
        "h": ([0.3, 0.2], "mark amplitudes"),
        "p": (2.0, "moment exponent for the noise constants"),
    },
    "sim": {
        "n1": (16, "sine modes in x"),
        "n2": (16, "sine modes in y"),
        "dt": (1e-3, "time step"),
        "t_end": (0.5, "final time"),
        "blowup_radius": (1e6, "stop a path once ||u||^2 reaches this"),
        "seed": (0, "master seed"),
        "n_paths": (100, "Monte-Carlo paths (pairs for uniqueness)"),
        "snap_every": (0, "keep the state every k steps (0: initial and final only)"),
        "initial": ("bump", "initial data: 'bump', 'random' or 'mode'"),
        "amplitude": (1.0, "L2 norm of the initial data"),
        "width": (0.4, "bump width"),
        "phase": (2.0, "bump phase gradient"),
        "decay": (3.0, "spectral decay exponent of random initial data"),
        "cubic": (True, "include the power nonlinearity"),
        "gain": (True, "include the linear gain"),
        "derivative": (True, "include the derivative nonlinearity"),
        "delta": (1e-3, "uniqueness: size of the initial perturbation"),
        "levels": ([4, 8, 16], "galerkin-scan: truncation levels (each also run at 2n)"),
        "moment": (4.0, "exponent p of the gradient moment statistic"),
    },
    "monotonicity": {
        **{f"eps_{k}": (None, f"Young splitting eps_{k} (null: balanced default)") for k in EPS_KEYS},
        "lab_modes": (8, "inequality lab: modes per axis of sampled fields"),
        "field_samples": (None, "inequality lab: pairs per field check (null: min(samples, 10^4))"),
        "sigmas": ([2.5, 3.0], "inequality lab: sigma values for the pair checks"),
        "beta_fractions": ([0.5, 0.9], "inequality lab: beta as fractions of the threshold"),
        "negative_fraction": (1.5, "inequality lab: beta / threshold for the negative control"),
    },
}


def help_text() -> str:
    lines = ["config keys (JSON sections) and defaults:"]
    for sec, keys in DEFAULTS.items():
        lines.append(f"  [{sec}]")
        for k, (d, h) in keys.items():
            lines.append(f"    {k} = {json.dumps(d)}  # {h}")
    lines.append("  lambda components may also be given flat, e.g. params.lambda1_x_re")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    params: GLParams
    model: JumpModel
    sim: SimConfig
    terms: DriftTerms
    mono_eps: dict | None
    raw: dict

    def get(self, section: str, key: str):
        return self.raw[section][key]

    def monotonicity(self) -> MonotonicityConfig:
        return MonotonicityConfig.derive(self.params, self.mono_eps, self.model.constants.k4)

    def initial(self):
        """Initial data as a SpectralField or a per-path callable."""
        s, p = self.raw["sim"], self.params
        n1, n2 = self.sim.n1, self.sim.n2
        kind = s["initial"]
        if kind == "bump":
            from .experiments import gaussian_bump
            return gaussian_bump(n1, n2, p.L1, p.L2, s["width"], s["amplitude"], phase=s["phase"])
        if kind == "mode":
            return SpectralField.mode(1, 1, n1, n2, p.L1, p.L2) * s["amplitude"]
        if kind == "random":
            n_max = max(max(s["levels"]) * 2, n1, n2)
            return lambda g: random_field(g, n_max, n_max, p.L1, p.L2, s["decay"], s["amplitude"])
        raise ConfigError(f"sim.initial: unknown kind {kind!r}")


def _merge(data: Mapping) -> dict:
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be a JSON object")
    out = {}
    for sec, keys in DEFAULTS.items():
        given = dict(data.get(sec, {}) or {})
        merged = {k: v[0] for k, v in keys.items()}
        for k, v in given.items():
            if k in keys:
                merged[k] = v
            elif sec == "params" and _flat_lambda(k):
                name, axis, part = _flat_lambda(k)
                key = f"{name}_{part}"
                merged[key] = list(merged[key])
                merged[key][axis] = v
            else:
                raise ConfigError(f"{sec}.{k}: unknown key")
        out[sec] = merged
    for sec in data:
        if sec not in DEFAULTS:
            raise ConfigError(f"{sec}: unknown section")
    return out


def _flat_lambda(key: str):
    parts = key.split("_")
    if len(parts) == 3 and parts[0] in ("lambda1", "lambda2") and parts[1] in ("x", "y") \
            and parts[2] in ("re", "im"):
        return parts[0], "xy".index(parts[1]), parts[2]
    return None


def _num(sec, key, v, kind=float):
    try:
        if isinstance(v, bool) and kind is not bool:
            raise TypeError
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{sec}.{key}: expected {kind.__name__}, got {v!r}") from None


def _lam(raw, name):
    re, im = raw[f"{name}_re"], raw[f"{name}_im"]
    for part, v in (("re", re), ("im", im)):
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            raise ConfigError(f"params.{name}_{part}: expected a list of two numbers")
    return tuple(_num("params", f"{name}_re", a) + 1j * _num("params", f"{name}_im", b)
                 for a, b in zip(re, im))


def build(data: Mapping, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    raw = _merge(data)
    for dotted, v in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if sec not in raw or (key not in raw[sec] and not (sec == "params" and _flat_lambda(key))):
            raise ConfigError(f"{dotted}: unknown key")
        if sec == "params" and _flat_lambda(key):
            name, axis, part = _flat_lambda(key)
            raw[sec][f"{name}_{part}"] = list(raw[sec][f"{name}_{part}"])
            raw[sec][f"{name}_{part}"][axis] = v
        else:
            raw[sec][key] = v
    P, N, S, M = raw["params"], raw["noise"], raw["sim"], raw["monotonicity"]

    def wrap(sec, fn):
        try:
            return fn()
        except ConfigError as e:
            msg = str(e)
            raise ConfigError(msg if msg.startswith(sec + ".") else f"{sec}: {msg}") from None

    params = wrap("params", lambda: GLParams(
        alpha=_num("params", "alpha", P["alpha"]), beta=_num("params", "beta", P["beta"]),
        gamma=_num("params", "gamma", P["gamma"]), sigma=_num("params", "sigma", P["sigma"]),
        lambda1=_lam(P, "lambda1"), lambda2=_lam(P, "lambda2"),
        L1=_num("params", "L1", P["L1"]), L2=_num("params", "L2", P["L2"])))
    model = wrap("noise", lambda: JumpModel(
        nu=tuple(_num("noise", "nu", x) for x in N["nu"]),
        h=tuple(_num("noise", "h", x) for x in N["h"]),
        family=str(N["family"]), c=_num("noise", "c", N["c"]),
        cap=math.inf if N["cap"] is None else _num("noise", "cap", N["cap"]),
        p=_num("noise", "p", N["p"])))
    sim = wrap("sim", lambda: SimConfig(
        n1=_num("sim", "n1", S["n1"], int), n2=_num("sim", "n2", S["n2"], int),
        dt=_num("sim", "dt", S["dt"]), t_end=_num("sim", "t_end", S["t_end"]),
        blowup_radius=_num("sim", "blowup_radius", S["blowup_radius"]),
        seed=_num("sim", "seed", S["seed"], int), n_paths=_num("sim", "n_paths", S["n_paths"], int),
        snap_every=_num("sim", "snap_every", S["snap_every"], int)))
    terms = DriftTerms(bool(S["cubic"]), bool(S["gain"]), bool(S["derivative"]))
    eps = {k: M[f"eps_{k}"] for k in EPS_KEYS}
    given = [k for k, v in eps.items() if v is not None]
    if given and len(given) != len(EPS_KEYS):
        missing = next(k for k in EPS_KEYS if eps[k] is None)
        raise ConfigError(f"monotonicity.eps_{missing}: set all eps_i or none")
    mono_eps = {k: _num("monotonicity", f"eps_{k}", v) for k, v in eps.items()} if given else None
    if mono_eps and any(v <= 0 for v in mono_eps.values()):
        bad = next(k for k, v in mono_eps.items() if v <= 0)
        raise ConfigError(f"monotonicity.eps_{bad}: must be positive")
    return RunConfig(params, model, sim, terms, mono_eps, raw)


def load_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    if path is None:
        return build({}, overrides)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"config: cannot read {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: invalid JSON at line {e.lineno}: {e.msg}") from None
    return build(data, overrides)


# -- binary snapshots ----------------------------------------------------------

def write_field(fh, u: SpectralField) -> None:
    """Header ("SGGL", version, n1, n2, L1, L2) then row-major (re, im) float64 pairs."""
    a = np.asarray(u.coeffs, complex)
    if a.ndim != 2:
        raise ValueError("write_field takes a single field")
    fh.write(_HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1], float(u.L1), float(u.L2)))
    fh.write(np.ascontiguousarray(a).astype("<c16").tobytes())


def read_field(fh) -> SpectralField:
    head = fh.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, ver, n1, n2, L1, L2 = _HEADER.unpack(head)
    if magic != MAGIC:
        raise ValueError("not a field snapshot")
    if ver != VERSION:
        raise ValueError(f"unsupported snapshot version {ver}")
    body = fh.read(16 * n1 * n2)
    if len(body) != 16 * n1 * n2:
        raise ValueError("truncated snapshot body")
    return SpectralField(np.frombuffer(body, "<c16").reshape(n1, n2).astype(complex), L1, L2)


def save_field(path, u: SpectralField) -> None:
    with open(path, "wb") as fh:
        write_field(fh, u)


def load_field(path) -> SpectralField:
    with open(path, "rb") as fh:
        return read_field(fh)


def save_witness(path, check: str, params: GLParams, u: SpectralField, phi: SpectralField,
                 slack: float, scale: float) -> None:
    """Field pair in ``path`` plus a JSON sidecar naming the check and parameters."""
    path = Path(path)
    with open(path, "wb") as fh:
        write_field(fh, u)
        write_field(fh, phi)
    meta = {"check": check, "slack": slack, "scale": scale, "params": params_dict(params)}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=1))


def load_witness(path):
    path = Path(path)
    with open(path, "rb") as fh:
        u, phi = read_field(fh), read_field(fh)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    return meta, u, phi


def params_dict(p: GLParams) -> dict:
    return {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "sigma": p.sigma,
            "lambda1_re": [z.real for z in p.lambda1], "lambda1_im": [z.imag for z in p.lambda1],
            "lambda2_re": [z.real for z in p.lambda2], "lambda2_im": [z.imag for z in p.lambda2],
            "L1": p.L1, "L2": p.L2}


# -- CSV -----------------------------------------------------------------------

def _g(x) -> str:
    return "%.17g" % x


def write_energy_csv(path, times, series_mean: Mapping[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "l2_sq", "h1_sq", "l2s2_pow", "mixed"])
        for k, t in enumerate(times):
            w.writerow([_g(t)] + [_g(series_mean[f][k]) for f in ("l2_sq", "h1_sq", "l2s2_pow", "mixed")])


def write_report_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "sigma", "beta", "samples", "violations", "max_slack", "tolerance"])
        for r in rows:
            name = r.check + ("_negative" if r.negative_control else "")
            w.writerow([name, _g(r.sigma), _g(r.beta), r.samples, r.violations,
                        _g(r.max_slack), _g(r.tolerance)])
