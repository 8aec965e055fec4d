"""Constructors for the optical elements used in the interferometer.

Polarization conventions, fixed across the package:

* angles are measured from the V axis toward H, so 0 deg = V, 90 deg = H
  and 45 deg = (H + V)/sqrt(2);
* two-port couplers act identically and independently on every temporal
  bin;
* the polarizing beamsplitter transmits H (photon keeps its spatial
  label) and reflects V (labels swap); the default reflection amplitude
  is 1 ("perm" convention), the alternative "i-reflect" convention
  multiplies each reflection by i;
* a half-wave plate at plate angle theta applies the real Jones matrix
  [[cos 2t, sin 2t], [sin 2t, -cos 2t]] to the (V, H) amplitudes, i.e.
  it rotates linear polarization by 2*theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distinguishability import OverlapModel, overlap_from_delay
from .fock import ModeTransform
from .modes import H, V, ModeId, ModeRegistry

PBS_CONVENTIONS = ("perm", "i-reflect")


class ElementError(ValueError):
    pass


@dataclass(frozen=True)
class ElementSpec:
    """Declarative description of one element, as found in config files."""

    kind: str
    ports: tuple
    angle_deg: float | None = None
    phi: float | None = None
    transmissivity: float | None = None
    delta_um: float | None = None
    overlap: complex | None = None
    pol: str | None = None
    loss: str | None = None
    bin_map: dict | None = None


def _pair_block(registry: ModeRegistry, s1: str, s2: str, block2) -> ModeTransform:
    """Lift a (V,H)x(V,H) two-port block to all bins of two spatial labels.

    block2 is 4x4 over ((s1,V), (s1,H), (s2,V), (s2,H)).
    """
    modes = []
    for b in range(registry.bins):
        modes.extend(
            [ModeId(s1, V, b), ModeId(s1, H, b), ModeId(s2, V, b), ModeId(s2, H, b)]
        )
    n = len(modes)
    m = np.zeros((n, n), dtype=complex)
    for b in range(registry.bins):
        o = 4 * b
        m[o : o + 4, o : o + 4] = block2
    return ModeTransform(tuple(modes), m)


def pbs(registry: ModeRegistry, s1: str, s2: str, convention: str = "perm") -> ModeTransform:
    """Polarizing beamsplitter: H transmits, V reflects (swaps ports)."""
    if s1 == s2:
        raise ElementError("pbs needs two distinct spatial labels")
    registry.require_spatial(s1)
    registry.require_spatial(s2)
    if convention not in PBS_CONVENTIONS:
        raise ElementError(f"unknown PBS convention {convention!r}")
    r = 1j if convention == "i-reflect" else 1.0
    # Basis (s1 V, s1 H, s2 V, s2 H): V components swap, H stay.
    block = np.array(
        [
            [0, 0, r, 0],
            [0, 1, 0, 0],
            [r, 0, 0, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    t = _pair_block(registry, s1, s2, block)
    return ModeTransform(t.modes, t.matrix, name=f"pbs({s1},{s2})")


def hwp(registry: ModeRegistry, s: str, plate_angle_deg: float) -> ModeTransform:
    """Half-wave plate on one spatial label, plate angle in degrees."""
    registry.require_spatial(s)
    t2 = 2.0 * math.radians(plate_angle_deg)
    c, sn = math.cos(t2), math.sin(t2)
    jones = np.array([[c, sn], [sn, -c]], dtype=complex)  # (V, H) basis
    modes = []
    for b in range(registry.bins):
        modes.extend([ModeId(s, V, b), ModeId(s, H, b)])
    m = np.zeros((len(modes), len(modes)), dtype=complex)
    for b in range(registry.bins):
        o = 2 * b
        m[o : o + 2, o : o + 2] = jones
    return ModeTransform(tuple(modes), m, name=f"hwp({s},{plate_angle_deg})")


def rpbs(registry: ModeRegistry, s1: str, s2: str, convention: str = "perm"):
    """45-degree oriented PBS: a PBS sandwiched by 22.5-degree plates.

    The composite acts on the +/-45 basis exactly as a plain PBS acts on
    V/H: the +45 component swaps ports and the -45 component stays.
    """
    if s1 == s2:
        raise ElementError("rpbs needs two distinct spatial labels")
    return [
        hwp(registry, s1, 22.5),
        hwp(registry, s2, 22.5),
        pbs(registry, s1, s2, convention),
        hwp(registry, s1, 22.5),
        hwp(registry, s2, 22.5),
    ]


def polarizer(registry: ModeRegistry, s: str, pass_angle_deg: float, loss: str) -> ModeTransform:
    """Linear polarizer as a unitary dilation onto a loss label.

    The pass-axis component stays in s; the orthogonal component is routed
    to the loss label (and vice versa, to keep the map unitary).
    """
    registry.require_spatial(s)
    registry.require_spatial(loss)
    if loss == s:
        raise ElementError("polarizer loss label must differ from its port")
    a = math.radians(pass_angle_deg)
    p = np.array([math.cos(a), math.sin(a)])  # pass axis, (V, H)
    o = np.array([-math.sin(a), math.cos(a)])  # orthogonal axis
    keep = np.outer(p, p)
    swap = np.outer(o, o)
    block = np.block([[keep, swap], [swap, keep]]).astype(complex)
    t = _pair_block(registry, s, loss, block)
    return ModeTransform(t.modes, t.matrix, name=f"polarizer({s},{pass_angle_deg})")


def phase_shift(registry: ModeRegistry, s: str, phi: float, pol: str | None = None) -> ModeTransform:
    """Diagonal phase e^{i phi} on one spatial label (optionally one pol)."""
    registry.require_spatial(s)
    modes = registry.group(s, pol=pol)
    m = np.diag([np.exp(1j * phi)] * len(modes))
    return ModeTransform(tuple(modes), m, name=f"phase({s},{phi:.4f})")


def beamsplitter(registry: ModeRegistry, s1: str, s2: str, transmissivity: float) -> ModeTransform:
    """Polarization-insensitive two-mode coupler with real amplitudes."""
    if s1 == s2:
        raise ElementError("beamsplitter needs two distinct spatial labels")
    if not 0.0 <= transmissivity <= 1.0:
        raise ElementError(f"transmissivity {transmissivity} outside [0, 1]")
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    # Rotation-like coupler: T = 1 is the identity.
    block = np.array(
        [
            [t, 0, r, 0],
            [0, t, 0, r],
            [-r, 0, t, 0],
            [0, -r, 0, t],
        ],
        dtype=complex,
    )
    out = _pair_block(registry, s1, s2, block)
    return ModeTransform(out.modes, out.matrix, name=f"beamsplitter({s1},{s2},{transmissivity})")


def bin_mixer(
    registry: ModeRegistry,
    s: str,
    overlap: complex,
    pol: str | None = None,
    bin_map: dict | None = None,
) -> ModeTransform:
    """Rewrite temporal bins of one spatial label by a partial overlap.

    Each source bin keeps amplitude `overlap` and leaks the remainder into
    its designated fresh bin: the 2x2 block [[v, -s], [s, conj(v)]] with
    s = sqrt(1 - |v|^2).  This is the common core of the delay element and
    of polarization-selective walk-off.
    """
    registry.require_spatial(s)
    v = complex(overlap)
    if abs(v) > 1.0 + 1e-12:
        raise ElementError(f"overlap magnitude {abs(v)} exceeds 1")
    sres = math.sqrt(max(0.0, 1.0 - abs(v) ** 2))
    if bin_map is None:
        bin_map = {0: 1}
    srcs = sorted(int(k) for k in bin_map)
    dsts = [int(bin_map[k] if k in bin_map else bin_map[str(k)]) for k in srcs]
    if len(set(srcs) | set(dsts)) != len(srcs) + len(dsts):
        raise ElementError(f"bin_map {bin_map} reuses a bin")
    for b in srcs + dsts:
        if not 0 <= b < registry.bins:
            raise ElementError(f"bin {b} outside registry range 0..{registry.bins - 1}")
    pols = (H, V) if pol is None else (pol,)
    modes = []
    for p in pols:
        for src, dst in zip(srcs, dsts):
            modes.extend([ModeId(s, p, src), ModeId(s, p, dst)])
    n = len(modes)
    m = np.zeros((n, n), dtype=complex)
    block = np.array([[v, -sres], [sres, v.conjugate()]], dtype=complex)
    for k in range(n // 2):
        m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return ModeTransform(tuple(modes), m, name=f"bin_mixer({s},{pol or 'HV'})")


def delay(
    registry: ModeRegistry,
    s: str,
    delta_um: float,
    model: OverlapModel | None = None,
    pol: str | None = None,
    bin_map: dict | None = None,
) -> ModeTransform:
    """Path delay: bin rewrite with overlap v(delta) plus its fringe phase."""
    model = model or OverlapModel()
    v = overlap_from_delay(delta_um, model)
    t = bin_mixer(registry, s, v, pol=pol, bin_map=bin_map)
    return ModeTransform(t.modes, t.matrix, name=f"delay({s},{delta_um}um)")


def lower_element(
    spec: ElementSpec,
    registry: ModeRegistry,
    model: OverlapModel | None = None,
    convention: str = "perm",
):
    """Lower one ElementSpec to its ModeTransform sequence."""
    kind = spec.kind
    ports = tuple(spec.ports)
    two_port = {"pbs", "rpbs", "beamsplitter"}
    if kind in two_port:
        if len(ports) != 2 or ports[0] == ports[1]:
            raise ElementError(f"{kind} needs exactly two distinct ports, got {ports}")
    elif len(ports) != 1:
        raise ElementError(f"{kind} needs exactly one port, got {ports}")
    if kind == "pbs":
        return [pbs(registry, ports[0], ports[1], convention)]
    if kind == "rpbs":
        return rpbs(registry, ports[0], ports[1], convention)
    if kind == "hwp":
        if spec.angle_deg is None:
            raise ElementError("hwp needs angle_deg")
        return [hwp(registry, ports[0], spec.angle_deg)]
    if kind == "polarizer":
        if spec.angle_deg is None or spec.loss is None:
            raise ElementError("polarizer needs angle_deg and a loss label")
        return [polarizer(registry, ports[0], spec.angle_deg, spec.loss)]
    if kind == "phase":
        return [phase_shift(registry, ports[0], spec.phi or 0.0, pol=spec.pol)]
    if kind == "beamsplitter":
        if spec.transmissivity is None:
            raise ElementError("beamsplitter needs transmissivity")
        return [beamsplitter(registry, ports[0], ports[1], spec.transmissivity)]
    if kind == "delay":
        if spec.delta_um is None:
            raise ElementError("delay needs delta_um")
        return [
            delay(registry, ports[0], spec.delta_um, model=model, pol=spec.pol, bin_map=spec.bin_map)
        ]
    if kind == "bin_mixer":
        if spec.overlap is None:
            raise ElementError("bin_mixer needs overlap")
        return [
            bin_mixer(registry, ports[0], spec.overlap, pol=spec.pol, bin_map=spec.bin_map)
        ]
    raise ElementError(f"unknown element kind {kind!r}")


def _lift_to_common(t: ModeTransform, modes: tuple) -> np.ndarray:
    idx = {m: i for i, m in enumerate(modes)}
    n = len(modes)
    out = np.eye(n, dtype=complex)
    rows = [idx[m] for m in t.modes]
    for a, ra in enumerate(rows):
        for b, rb in enumerate(rows):
            out[ra, rb] = t.matrix[a, b]
    return out


def compose(transforms) -> ModeTransform:
    """Single ModeTransform equal to applying the sequence in order."""
    transforms = list(transforms)
    if not transforms:
        raise ElementError("compose needs at least one transform")
    modes = tuple(sorted({m for t in transforms for m in t.modes}))
    total = np.eye(len(modes), dtype=complex)
    for t in transforms:
        total = _lift_to_common(t, modes) @ total
    return ModeTransform(modes, total, name="composite")
