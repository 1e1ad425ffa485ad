"""System configuration, named presets and the INI-style config file.

A config file has one section per sub-config::

    [run]
    preset = desk
    seed = 7

    [geometry]
    M = 8

    [power]
    P_T_dBm = 50

Keys left out keep the values of the named preset. Transmit power is
given in dBm in files and on the command line and stored in watts.
"""

import configparser
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

from ._validation import ContractError, check_positive
from .beamforming.common import BeamformerConfig
from .channel import CarrierPlan, Geometry
from .rectenna import RectifierParams
from .waveform import WaveformOptConfig

SCHEMA_VERSION = 1


def dbm_to_watts(p_dbm):
    return 10 ** ((float(p_dbm) - 30) / 10)


def watts_to_dbm(p_w):
    check_positive(p_w, "P_T")
    return 10 * math.log10(p_w) + 30


@dataclass(frozen=True)
class SystemConfig:
    """Everything an experiment needs. ``kappa`` is linear; ``inf`` is pure line of sight."""

    carrier: CarrierPlan = field(default_factory=CarrierPlan)
    geometry: Geometry = field(default_factory=Geometry)
    kappa: float = 0.0
    alpha: float = 0.1
    n_taps: int = 18
    P_T: float = 100.0
    rectifier: RectifierParams = field(default_factory=RectifierParams)
    beamformer: BeamformerConfig = field(default_factory=BeamformerConfig)
    waveform: WaveformOptConfig = field(default_factory=WaveformOptConfig)
    realizations: int = 20
    seed: int = 0
    out_dir: str = "results"

    def __post_init__(self):
        check_positive(self.P_T, "P_T")
        check_positive(self.alpha, "alpha")
        if not (self.kappa >= 0):
            raise ContractError(f"kappa must be >= 0, got {self.kappa!r}")
        if int(self.n_taps) != self.n_taps or self.n_taps < 1:
            raise ContractError("n_taps must be a positive integer")
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ContractError("realizations must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ContractError("seed must be a non-negative integer")

    @property
    def M(self):
        return self.geometry.M

    @property
    def N(self):
        return self.carrier.N

    @property
    def P_T_dBm(self):
        return watts_to_dbm(self.P_T)

    def replace(self, **changes):
        """Copy with top-level fields and the shortcuts ``M``, ``N``, ``P_T_dBm``, ``kind`` replaced."""
        if "M" in changes:
            changes["geometry"] = dataclasses.replace(changes.get("geometry", self.geometry), M=int(changes.pop("M")))
        if "N" in changes:
            changes["carrier"] = dataclasses.replace(changes.get("carrier", self.carrier), N=int(changes.pop("N")))
        if "P_T_dBm" in changes:
            changes["P_T"] = dbm_to_watts(changes.pop("P_T_dBm"))
        if "kind" in changes:
            changes["beamformer"] = dataclasses.replace(changes.get("beamformer", self.beamformer), kind=changes.pop("kind"))
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["kappa"] = "inf" if math.isinf(self.kappa) else self.kappa
        return d

    def config_hash(self):
        """Short SHA-256 of the canonical JSON form (output directory excluded)."""
        d = self.to_dict()
        d.pop("out_dir")
        blob = json.dumps(d, sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


PRESETS = {
    "paper-wifi": SystemConfig(
        beamformer=BeamformerConfig(K_rand=50_000),
        realizations=200,
    ),
    "desk": SystemConfig(
        beamformer=BeamformerConfig(K_rand=10_000),
        realizations=20,
    ),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ContractError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None


_SECTIONS = {"carrier": "carrier", "geometry": "geometry", "rectifier": "rectifier",
             "beamformer": "beamformer", "waveform": "waveform"}
_TOP_LEVEL = {"channel": ("kappa", "alpha", "n_taps"), "run": ("realizations", "seed", "out_dir")}


def _coerce(raw, current, name):
    text = raw.strip()
    try:
        if text.lower() in ("none", ""):
            return None
        if isinstance(current, bool):
            return {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}[text.lower()]
        if isinstance(current, int) and not isinstance(current, bool):
            return int(text)
        if isinstance(current, float) or current is None:
            value = float(text)
            return int(value) if current is None and value.is_integer() and "." not in text else value
        return text
    except (ValueError, KeyError):
        raise ContractError(f"cannot parse {name} = {raw!r}") from None


def _apply(obj, items, section):
    names = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, raw in items:
        if key not in names:
            raise ContractError(f"unknown key {key!r} in [{section}]")
        changes[key] = _coerce(raw, getattr(obj, key), f"{section}.{key}")
    try:
        return dataclasses.replace(obj, **changes)
    except (TypeError, ValueError) as exc:
        raise ContractError(f"[{section}]: {exc}") from None


def parse_config_text(text, base=None):
    """Build a SystemConfig from INI text on top of ``base`` (or the preset named in [run])."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ContractError(f"malformed config: {exc}") from None
    cfg = base
    if parser.has_option("run", "preset"):
        cfg = preset(parser.get("run", "preset").strip())
    cfg = cfg or PRESETS["desk"]
    changes = {}
    for section in parser.sections():
        items = [(k, v) for k, v in parser.items(section) if not (section == "run" and k == "preset")]
        if section in _SECTIONS:
            changes[_SECTIONS[section]] = _apply(getattr(cfg, _SECTIONS[section]), items, section)
        elif section in _TOP_LEVEL:
            for key, raw in items:
                if key not in _TOP_LEVEL[section]:
                    raise ContractError(f"unknown key {key!r} in [{section}]")
                changes[key] = _coerce(raw, getattr(cfg, key), f"{section}.{key}")
        elif section == "power":
            for key, raw in items:
                if key == "P_T_dBm":
                    changes["P_T"] = dbm_to_watts(_coerce(raw, 0.0, "power.P_T_dBm"))
                elif key == "P_T":
                    changes["P_T"] = _coerce(raw, 0.0, "power.P_T")
                else:
                    raise ContractError(f"unknown key {key!r} in [power]")
        else:
            raise ContractError(f"unknown section [{section}]")
    try:
        return dataclasses.replace(cfg, **changes)
    except (TypeError, ValueError) as exc:
        raise ContractError(str(exc)) from None


def load_config(path, base=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ContractError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, base)


def dump_config(cfg):
    """INI text that :func:`parse_config_text` maps back to ``cfg``."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, attr in _SECTIONS.items():
        parser[section] = {k: repr(v) if isinstance(v, float) else str(v)
                           for k, v in dataclasses.asdict(getattr(cfg, attr)).items()}
    parser["channel"] = {"kappa": "inf" if math.isinf(cfg.kappa) else repr(float(cfg.kappa)),
                         "alpha": repr(float(cfg.alpha)), "n_taps": str(cfg.n_taps)}
    parser["power"] = {"P_T": repr(float(cfg.P_T))}
    parser["run"] = {"realizations": str(cfg.realizations), "seed": str(cfg.seed), "out_dir": cfg.out_dir}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
