"""Flat ``key = value`` scenario files.

One assignment per line, ``#`` starts a comment, keys are namespaced
(``ris.n``, ``phase.L``, ``direct.enabled`` ...). Powers are dBm, gains dBi,
distances meters and frequencies Hz; conversion to linear units happens
once, in :func:`risfox.mc.link_budget`.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .errors import ConfigError
from .fading import DGGParams, GenKParams
from .mc import MCConfig, ScenarioConfig


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _level(v: str) -> Optional[int]:
    s = v.strip().lower()
    if s in ("perfect", "none", "inf"):
        return None
    return int(s)


def _int(v: str) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _opt_float(v: str) -> Optional[float]:
    return None if v.strip().lower() in ("", "none") else float(v)


# key -> (target, converter); targets prefixed with "dgg." / "direct." / "mc." are grouped
KEYS: dict[str, tuple[str, Callable]] = {
    "ris.n": ("N", _int),
    "geometry.d1": ("d1", float),
    "geometry.d2": ("d2", float),
    "pathloss.a": ("a", float),
    "carrier.fc": ("f_c", float),
    "power.pt": ("P_t", float),
    "noise.power": ("noise", float),
    "gain.tx": ("G_T", float),
    "gain.rx": ("G_R", float),
    "fading.kappa": ("kappa", float),
    "fading.mu": ("mu", float),
    "fading.K": ("K", _int),
    "dgg.alpha1": ("dgg.alpha1", float),
    "dgg.beta1": ("dgg.beta1", float),
    "dgg.alpha2": ("dgg.alpha2", float),
    "dgg.beta2": ("dgg.beta2", float),
    "dgg.msp1": ("dgg.msp1", float),
    "dgg.msp2": ("dgg.msp2", float),
    "phase.L": ("phase_L", _level),
    "mobility.topology": ("topology", lambda v: v.strip().lower().replace("-", "")),
    "mobility.special_case": ("special_case", str.strip),
    "direct.enabled": ("omega", lambda v: int(_bool(v))),
    "direct.m": ("direct.m", float),
    "direct.M": ("direct.M", _opt_float),
    "direct.m0": ("direct.m0", float),
    "direct.sigma_db": ("direct.sigma_db", _opt_float),
    "direct.topology": ("direct_topology", lambda v: v.strip().lower().replace("-", "")),
    "outage.threshold_db": ("gamma_th_db", float),
    "mc.trials": ("mc.trials", _int),
    "mc.seed": ("mc.seed", _int),
    "mc.streams": ("mc.streams", _int),
    "mc.projection": ("mc.projection", str.strip),
}


@dataclass(frozen=True)
class LoadedScenario:
    scenario: ScenarioConfig
    mc: MCConfig
    digest: str
    source: str


def parse_scenario(text: str, source: str = "<string>") -> LoadedScenario:
    """Parse scenario text; errors carry the offending line and key."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=no)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", line=no, field=key)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", line=no, field=key)
        target, conv = KEYS[key]
        try:
            values[target] = conv(val)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad value {val!r}: {e}", line=no, field=key) from None
        lines[key] = no
    by_target = {KEYS[k][0]: n for k, n in lines.items()}
    by_field = {k.split(".", 1)[-1]: n for k, n in lines.items()}

    def locate(err: ConfigError) -> ConfigError:
        f = err.field or ""
        no = by_target.get(f) or by_field.get(f.split(".")[-1])
        key = next((k for k, (t, _) in KEYS.items() if t == f or k.endswith("." + f)), f)
        return ConfigError(err.message, line=no, field=key or None)

    groups = {"dgg": {}, "direct": {}, "mc": {}}
    flat = {}
    for t, v in values.items():
        head, _, tail = t.partition(".")
        if tail and head in groups:
            groups[head][tail] = v
        else:
            flat[t] = v
    base = ScenarioConfig()
    try:
        g = base.dgg
        dgg = DGGParams(**{**dict(alpha1=g.alpha1, beta1=g.beta1, alpha2=g.alpha2, beta2=g.beta2,
                                  msp1=g.msp1, msp2=g.msp2), **groups["dgg"]})
        d = groups["direct"]
        if "sigma_db" in d and "M" not in d:
            d["M"] = None
        dk = {**dict(m=base.direct.m, M=base.direct.M, m0=base.direct.m0), **d}
        direct = GenKParams(**dk)
        sc = ScenarioConfig(**flat, dgg=dgg, direct=direct)
        mc = MCConfig(**groups["mc"])
    except ConfigError as e:
        raise locate(e) from None
    digest = hashlib.sha256(text.encode()).hexdigest()
    return LoadedScenario(sc, mc, digest, source)


def load_scenario(path=None) -> LoadedScenario:
    """Read a scenario file; ``None`` loads the packaged default scenario."""
    if path is None:
        text = resources.files("risfox").joinpath("data/default.scn").read_text()
        return parse_scenario(text, "default.scn")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {p}: {e.strerror}") from None
    return parse_scenario(text, str(p))


def default_scenario() -> ScenarioConfig:
    return load_scenario().scenario
