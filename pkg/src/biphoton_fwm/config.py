"""Simulation configuration and the envelope/mask mini-grammar.

Grammar (whitespace not allowed inside a token)::

    envelope := "gaussian:" CENTER "," WIDTH | "point:" CELL
    mask     := "full" | "window:" START "," END      (cells START <= l < END)

CENTER and WIDTH are decimal numbers in cells; CELL, START and END are
non-negative integers.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace

from .errors import SpecSyntaxError
from .lattice import (
    Envelope,
    Lattice,
    TwoPhotonState,
    diagonal_entangled_input,
    make_gaussian_envelope,
    make_point_envelope,
    separable_input,
)
from .propagator import MediumMask, StepPlan

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_INT = r"\d+"
_ENV_GAUSS = re.compile(rf"gaussian:({_NUM}),({_NUM})")
_ENV_POINT = re.compile(rf"point:({_INT})")
_MASK_WINDOW = re.compile(rf"window:({_INT}),({_INT})")

INPUT_KINDS = ("separable", "diagonal")

DEFAULT_TOLERANCES = {
    "amplitude": 1e-12,
    "intensity": 1e-12,
    "conservation": 1e-12,
    "norm": 1e-12,
    "xicondition": 1e-10,
    "oracle_l2": 1e-8,
    "fock_deviation": 1e-9,
    "fock_leakage": 1e-12,
    "fock_lambda": 1e-12,
}


def parse_envelope(spec: str, lattice: Lattice) -> Envelope:
    spec = spec.strip()
    m = _ENV_GAUSS.fullmatch(spec)
    if m:
        return make_gaussian_envelope(lattice, float(m.group(1)), float(m.group(2)))
    m = _ENV_POINT.fullmatch(spec)
    if m:
        return make_point_envelope(lattice, int(m.group(1)))
    raise SpecSyntaxError(f"malformed envelope spec {spec!r}; expected gaussian:C,W or point:L", spec)


def parse_mask(spec: str, M: int) -> MediumMask:
    spec = spec.strip()
    if spec == "full":
        return MediumMask.full(M)
    m = _MASK_WINDOW.fullmatch(spec)
    if m:
        return MediumMask.window(M, int(m.group(1)), int(m.group(2)))
    raise SpecSyntaxError(f"malformed mask spec {spec!r}; expected full or window:START,END", spec)


@dataclass(frozen=True)
class SimConfig:
    M: int = 45
    kappa: float = math.pi / 45
    steps: int = 45
    snapshot_every: int = 1
    envelope: str = "gaussian:22,4"
    mask: str = "full"
    input: str = "separable"
    initial_sector: str = "omega"
    dz: float = 1.0
    c: float = 1.0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if self.input not in INPUT_KINDS:
            raise SpecSyntaxError(f"input must be one of {INPUT_KINDS}, got {self.input!r}", self.input)
        if self.initial_sector not in ("omega", "e"):
            raise SpecSyntaxError(f"initial_sector must be omega or e, got {self.initial_sector!r}",
                                  self.initial_sector)

    @property
    def lattice(self) -> Lattice:
        return Lattice(self.M, self.dz, self.c)

    def make_envelope(self, lattice: Lattice = None) -> Envelope:
        return parse_envelope(self.envelope, lattice or self.lattice)

    def make_mask(self) -> MediumMask:
        return parse_mask(self.mask, self.M)

    def initial_state(self, lattice: Lattice = None) -> TwoPhotonState:
        env = self.make_envelope(lattice)
        s = separable_input(env, env) if self.input == "separable" else diagonal_entangled_input(env)
        return s.swapped() if self.initial_sector == "e" else s

    def plan(self, steps: int = None) -> StepPlan:
        return StepPlan(self.kappa, self.steps if steps is None else steps, self.make_mask())

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls) if f.name != "tolerances"]
