"""JSON problem files for the command-line tool.

Full form::

    {
      "channel": [[0.9, 0.1], [0.1, 0.9]],      # p(y|x), row-major
      "distortion": "hamming",                   # or a square matrix
      "distortion_bound": null,                  # optional D (matrix form only)
      "alpha": 0.1,
      "joint": [[0.45, 0.05], [0.05, 0.45]],     # optional p(u,x) for simulate/attack
      "solver": {"mode": "generic", "restarts": 32, "u_size": null, "max_iter": 3000},
      "simulation": {"n": 100, "messages": 1024, "trials": 2000,
                     "decoder": "ml", "epsilon": 0.05, "ensemble": "materialized"},
      "seed": 20240101
    }

Binary shorthand: ``{"binary": {"p1": 0.1, "alpha": 0.1, "p2": 0.1}}`` stands
for a BSC(p1) channel, Hamming distortion, and (when ``p2`` <= 1/2 is given or
defaulted from ``alpha``) the joint of uniform content through a BSC(p2) hash
perturbation. Explicit fields win over the shorthand.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .capacity import binary_achieving_joint
from .codec_sim import DEFAULT_SEED
from .prob_core import Channel, JointUX
from .security import DistortionMatrix

TOP_LEVEL_KEYS = {
    "channel",
    "distortion",
    "distortion_bound",
    "alpha",
    "joint",
    "binary",
    "solver",
    "simulation",
    "seed",
    "x_size",
    "y_size",
    "u_size",
}


class SpecError(ValueError):
    """Problem file could not be parsed or failed validation."""


@dataclass
class SolverSettings:
    mode: str = "generic"
    restarts: int = 32
    u_size: int | None = None
    max_iter: int = 3000


@dataclass
class SimSettings:
    n: int = 100
    messages: int = 1024
    trials: int = 2000
    decoder: str = "ml"
    epsilon: float = 0.05
    ensemble: str = "materialized"


@dataclass(eq=False)
class RunSpec:
    channel: Channel
    distortion: DistortionMatrix
    alpha: float
    joint: JointUX | None = None
    binary: dict | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    simulation: SimSettings = field(default_factory=SimSettings)
    seed: int = DEFAULT_SEED

    def to_dict(self) -> dict:
        d = self.distortion
        out = {
            "x_size": self.channel.in_size,
            "y_size": self.channel.out_size,
            "u_size": self.joint.u_size if self.joint is not None else self.solver.u_size,
            "channel": self.channel.rows.tolist(),
            "distortion": "hamming" if d.is_hamming and d.bound == 2.0 else d.d.tolist(),
            "distortion_bound": None if d.is_hamming and d.bound == 2.0 else d.bound,
            "alpha": self.alpha,
            "joint": None if self.joint is None else self.joint.table.tolist(),
            "solver": asdict(self.solver),
            "simulation": asdict(self.simulation),
            "seed": self.seed,
        }
        if self.binary is not None:
            out["binary"] = dict(self.binary)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, RunSpec) and self.to_dict() == other.to_dict()


def _settings(cls, raw, name):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise SpecError(f"'{name}' must be an object")
    known = set(cls.__dataclass_fields__)
    extra = set(raw) - known
    if extra:
        raise SpecError(f"unknown keys in '{name}': {sorted(extra)}")
    return cls(**raw)


def parse_spec(doc: dict) -> RunSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    extra = set(doc) - TOP_LEVEL_KEYS
    if extra:
        raise SpecError(f"unknown keys: {sorted(extra)}")
    try:
        return _parse(doc)
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError(str(exc)) from exc


def _parse(doc: dict) -> RunSpec:
    binary = doc.get("binary")
    channel = distortion = joint = None
    alpha = doc.get("alpha")
    if binary is not None:
        if not isinstance(binary, dict) or "p1" not in binary:
            raise SpecError("'binary' must be an object with at least 'p1'")
        extra = set(binary) - {"p1", "alpha", "p2"}
        if extra:
            raise SpecError(f"unknown keys in 'binary': {sorted(extra)}")
        binary = {k: float(v) for k, v in binary.items()}
        channel = Channel.bsc(binary["p1"])
        distortion = DistortionMatrix.hamming(2)
        if alpha is None:
            alpha = binary.get("alpha")
        p2 = binary.get("p2", alpha)
        if p2 is not None and 0.0 <= p2 <= 0.5:
            joint = binary_achieving_joint(p2)

    if doc.get("channel") is not None:
        channel = Channel(doc["channel"])
    if channel is None:
        raise SpecError("missing 'channel' (or 'binary' shorthand)")

    raw_d = doc.get("distortion")
    if raw_d is not None:
        if raw_d == "hamming":
            distortion = DistortionMatrix.hamming(channel.in_size)
        elif isinstance(raw_d, str):
            raise SpecError(f"unknown distortion preset {raw_d!r}")
        else:
            distortion = DistortionMatrix(raw_d, bound=doc.get("distortion_bound"))
    if distortion is None:
        raise SpecError("missing 'distortion'")
    if distortion.size != channel.in_size:
        raise SpecError("distortion matrix size does not match the channel input alphabet")

    if alpha is None:
        raise SpecError("missing 'alpha'")
    alpha = float(alpha)
    if not alpha >= 0:
        raise SpecError("alpha must be >= 0")

    if doc.get("joint") is not None:
        joint = JointUX(doc["joint"])
    if joint is not None and joint.x_size != channel.in_size:
        raise SpecError("joint has a different content alphabet than the channel")

    for key, size in (("x_size", channel.in_size), ("y_size", channel.out_size)):
        if doc.get(key) is not None and int(doc[key]) != size:
            raise SpecError(f"'{key}' = {doc[key]} does not match the matrices ({size})")

    solver = _settings(SolverSettings, doc.get("solver"), "solver")
    if doc.get("u_size") is not None and solver.u_size is None and joint is None:
        solver.u_size = int(doc["u_size"])
    if solver.mode not in ("generic", "closed-form"):
        raise SpecError(f"unknown solver mode {solver.mode!r}")
    sim = _settings(SimSettings, doc.get("simulation"), "simulation")
    seed = int(doc.get("seed", DEFAULT_SEED))
    return RunSpec(channel, distortion, alpha, joint, binary, solver, sim, seed)


def load_spec(path) -> RunSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return parse_spec(doc)


def dump_spec(spec: RunSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2, sort_keys=True)


def binary_p1(spec: RunSpec) -> float | None:
    """Crossover of the channel if the problem is binary symmetric with Hamming distortion."""
    if spec.distortion.size != 2 or not spec.distortion.is_hamming:
        return None
    return spec.channel.bsc_crossover()


def joint_or_error(spec: RunSpec) -> JointUX:
    if spec.joint is None:
        raise SpecError("this command needs a 'joint' (or binary shorthand with p2 <= 1/2)")
    return spec.joint
