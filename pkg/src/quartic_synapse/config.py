"""JSON run configuration: schema validation, presets, canonical hashing.

A config document has a mandatory "model" block with every model constant
explicit, plus optional per-command blocks. Unknown keys anywhere are
rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError, ModelError
from .model_dynamics import ModelParams, Stimulus, TailParams
from .quartic_geometry import QuarticSpec

MODEL_KEYS = {"epsilon", "a", "b", "a_tilde", "b_tilde", "alpha", "Q",
              "c", "r", "stimulus", "tail"}
STIMULUS_KEYS = {"V", "t_start", "t_end", "timescale"}
TAIL_KEYS = {"tau_D", "tau_F", "f0", "F_fac", "tau_syn", "gbar_syn",
             "C_cap", "g_L", "E_L", "E_syn"}
SIMULATE_KEYS = {"t_end", "timescale", "system", "initial", "p2_floor", "tol"}
ENTRY_EXIT_KEYS = {"n_entries", "margin", "simulate_check", "delta"}
CONTINUATION_KEYS = {"alpha_lo", "alpha_hi", "T_max", "max_points", "origins"}
TOP_KEYS = {"model", "simulate", "entry_exit", "continuation"}

PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig9", "fig11")


@dataclass(frozen=True)
class SimulateSpec:
    t_end: float = 4000.0
    timescale: str = "fast"
    system: str = "core"              # "core" | "full"
    initial: tuple | None = None      # default: (-b/a, epsilon) resp. 6D rest
    p2_floor: float | None = None
    tol: float = 1e-9


@dataclass(frozen=True)
class EntryExitSpec:
    n_entries: int = 20
    margin: float = 0.05              # clearance from the interval ends
    simulate_check: bool = False      # also run the (slow) direct simulation
    delta: float | None = None


@dataclass(frozen=True)
class ContinuationSpec:
    alpha_lo: float = 1e-3
    alpha_hi: float | None = None     # default: just past the largest zero
    T_max: float = 2500.0
    max_points: int = 800
    origins: tuple[str, ...] | None = None   # Hopf labels; None = all


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    simulate: SimulateSpec = field(default_factory=SimulateSpec)
    entry_exit: EntryExitSpec = field(default_factory=EntryExitSpec)
    continuation: ContinuationSpec = field(default_factory=ContinuationSpec)
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    """Hash of the canonical (sorted, minimal) JSON serialization."""
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _require(d: dict, keys: set[str], allowed: set[str], where: str):
    missing = keys - d.keys()
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")
    unknown = d.keys() - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _number(d: dict, key: str, where: str) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _quadruple(d: dict, key: str, where: str) -> tuple:
    v = d[key]
    if not isinstance(v, list) or len(v) != 4:
        raise ConfigError(f"{where}.{key}: expected a list of 4 numbers")
    return tuple(float(x) for x in v)


def parse_model(doc: dict) -> ModelParams:
    _require(doc, MODEL_KEYS - {"stimulus", "tail"}, MODEL_KEYS, "model")
    kw = {k: _number(doc, k, "model")
          for k in ("epsilon", "a", "b", "a_tilde", "b_tilde", "alpha", "Q")}
    c = _quadruple(doc, "c", "model")
    r = _quadruple(doc, "r", "model")

    stim = Stimulus()
    if "stimulus" in doc:
        s = doc["stimulus"]
        _require(s, STIMULUS_KEYS - {"timescale"}, STIMULUS_KEYS, "stimulus")
        stim = Stimulus(V=_number(s, "V", "stimulus"),
                        t_start=_number(s, "t_start", "stimulus"),
                        t_end=_number(s, "t_end", "stimulus"),
                        timescale=s.get("timescale", "fast"))

    tail = TailParams()
    if "tail" in doc:
        t = doc["tail"]
        _require(t, TAIL_KEYS, TAIL_KEYS, "tail")
        tail = TailParams(tau_D=_number(t, "tau_D", "tail"),
                          tau_F=_number(t, "tau_F", "tail"),
                          f0=_number(t, "f0", "tail"),
                          F=_number(t, "F_fac", "tail"),
                          tau_syn=_number(t, "tau_syn", "tail"),
                          gbar_syn=_number(t, "gbar_syn", "tail"),
                          C=_number(t, "C_cap", "tail"),
                          g_L=_number(t, "g_L", "tail"),
                          E_L=_number(t, "E_L", "tail"),
                          E_syn=_number(t, "E_syn", "tail"))

    try:
        quartic = QuarticSpec(Q=kw.pop("Q"), c=c, r=r)
        return ModelParams(**kw, quartic=quartic, stimulus=stim, tail=tail)
    except (ValueError, ModelError) as exc:
        raise ConfigError(f"model rejected: {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    _require(doc, {"model"}, TOP_KEYS, "config")
    model = parse_model(doc["model"])

    sim = SimulateSpec()
    if "simulate" in doc:
        s = dict(doc["simulate"])
        _require(s, set(), SIMULATE_KEYS, "simulate")
        if "initial" in s and s["initial"] is not None:
            s["initial"] = tuple(float(x) for x in s["initial"])
        sim = SimulateSpec(**s)
        if sim.system not in ("core", "full"):
            raise ConfigError(f"simulate.system must be core|full, got {sim.system!r}")
        if sim.timescale not in ("fast", "slow"):
            raise ConfigError(f"simulate.timescale must be fast|slow")
        if sim.tol <= 0 or sim.t_end <= 0:
            raise ConfigError("simulate.tol and simulate.t_end must be positive")

    ee = EntryExitSpec()
    if "entry_exit" in doc:
        e = doc["entry_exit"]
        _require(e, set(), ENTRY_EXIT_KEYS, "entry_exit")
        ee = EntryExitSpec(**e)
        if ee.n_entries < 1:
            raise ConfigError("entry_exit.n_entries must be >= 1")

    cont = ContinuationSpec()
    if "continuation" in doc:
        cdoc = dict(doc["continuation"])
        _require(cdoc, set(), CONTINUATION_KEYS, "continuation")
        if cdoc.get("origins") is not None:
            cdoc["origins"] = tuple(str(x) for x in cdoc["origins"])
        cont = ContinuationSpec(**cdoc)
        if cont.T_max <= 0 or cont.max_points < 1:
            raise ConfigError("continuation.T_max and max_points must be positive")

    return RunConfig(model=model, simulate=sim, entry_exit=ee,
                     continuation=cont, raw=doc)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def load_preset(name: str) -> RunConfig:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    ref = resources.files("quartic_synapse").joinpath(f"presets/{name}.json")
    doc = json.loads(ref.read_text(encoding="utf-8"))
    return parse_config(doc)
