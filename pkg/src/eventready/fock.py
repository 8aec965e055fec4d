"""Sparse Fock-state representation and exact linear-optical evolution.

States are stored as a sparse map from occupation vectors (one count per
registered mode) to complex amplitudes.  Occupation kets are normalized,
so a term with counts n has the operator form  prod_j (a_j^dag)^{n_j} / sqrt(n_j!)
acting on vacuum.  Mode unitaries act by substituting each creation
operator with its image and expanding the product multinomially; the
sqrt(n!) factors are carried explicitly so that the permanent formula
<m|U|n> = per(U[m|n]) / sqrt(prod m_i! prod n_j!) holds verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .modes import ModeId, ModeRegistry, H, V

PRUNE_TOL = 1e-14
NORM_TOL = 1e-10
INPUT_NORM_TOL = 1e-12
UNITARY_TOL = 1e-12

Occupation = tuple  # counts per registered mode, registry order


class FockError(ValueError):
    pass


@dataclass
class PureState:
    """Sparse pure state over a mode registry.

    terms maps occupation tuples to complex amplitudes; every stored
    occupation has the same total photon number.
    """

    registry: ModeRegistry
    terms: dict = field(default_factory=dict)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def total_photons(self) -> int:
        if not self.terms:
            return 0
        counts = {sum(occ) for occ in self.terms}
        if len(counts) != 1:
            raise FockError(f"state mixes photon numbers {sorted(counts)}")
        return counts.pop()

    def pruned(self, tol: float = PRUNE_TOL) -> "PureState":
        return PureState(
            self.registry,
            {occ: a for occ, a in self.terms.items() if abs(a) > tol},
        )

    def normalized(self) -> "PureState":
        n = self.norm()
        if n == 0.0:
            raise FockError("cannot normalize the zero state")
        return PureState(self.registry, {o: a / n for o, a in self.terms.items()})

    def scaled(self, factor: complex) -> "PureState":
        return PureState(self.registry, {o: a * factor for o, a in self.terms.items()})

    def sorted_terms(self):
        """Deterministic (occupation, amplitude) listing, sorted by occupation."""
        return sorted(self.terms.items())

    def amplitude(self, occupation) -> complex:
        return self.terms.get(tuple(occupation), 0.0 + 0.0j)

    def dump_amplitudes(self) -> dict:
        """JSON-ready amplitude listing: occupation label -> [re, im]."""
        out = {}
        for occ, amp in self.sorted_terms():
            label = " ".join(
                f"{m}={n}" for m, n in zip(self.registry.modes, occ) if n
            ) or "vacuum"
            out[label] = [amp.real, amp.imag]
        return out

    def count_in(self, occ, modes) -> int:
        idx = self.registry.index
        return sum(occ[idx(m)] for m in modes)

    def __repr__(self):
        lines = [f"PureState({len(self.terms)} terms, norm {self.norm():.6f})"]
        for occ, amp in self.sorted_terms()[:12]:
            label = " ".join(
                f"{m}={n}" for m, n in zip(self.registry.modes, occ) if n
            ) or "vacuum"
            lines.append(f"  {amp:+.4f}  |{label}>")
        if len(self.terms) > 12:
            lines.append(f"  ... {len(self.terms) - 12} more")
        return "\n".join(lines)


def vacuum(registry: ModeRegistry) -> PureState:
    return PureState(registry, {tuple([0] * registry.size): 1.0 + 0.0j})


def basis_state(registry: ModeRegistry, counts: dict) -> PureState:
    """Single occupation ket from a {ModeId: count} mapping."""
    occ = [0] * registry.size
    for mode, n in counts.items():
        occ[registry.index(mode)] += int(n)
    return PureState(registry, {tuple(occ): 1.0 + 0.0j})


@dataclass(frozen=True)
class PhotonSpec:
    """One source photon: spatial label, polarization amplitudes, bin amplitudes.

    pol_amps is (H, V) ordered; bins is the temporal wavepacket amplitude
    vector, starting at bin 0.
    """

    spatial: str
    pol_amps: tuple
    bins: tuple

    @staticmethod
    def plus(spatial: str, bins=(1.0,)) -> "PhotonSpec":
        s = 1.0 / math.sqrt(2.0)
        return PhotonSpec(spatial, (s, s), tuple(bins))

    @staticmethod
    def from_angle(spatial: str, pol_angle_deg: float, bins=(1.0,)) -> "PhotonSpec":
        """Linear polarization at the given angle, measured from V toward H."""
        a = math.radians(pol_angle_deg)
        return PhotonSpec(spatial, (math.sin(a), math.cos(a)), tuple(bins))


def _creation_op_vector(registry: ModeRegistry, photon: PhotonSpec):
    """Single-photon creation operator as {mode index: coefficient}."""
    registry.require_spatial(photon.spatial)
    pol_norm = math.sqrt(sum(abs(a) ** 2 for a in photon.pol_amps))
    bin_norm = math.sqrt(sum(abs(a) ** 2 for a in photon.bins))
    if abs(pol_norm - 1.0) > INPUT_NORM_TOL:
        raise FockError(
            f"photon on {photon.spatial}: polarization amplitudes not normalized "
            f"(norm {pol_norm:.3e})"
        )
    if abs(bin_norm - 1.0) > INPUT_NORM_TOL:
        raise FockError(
            f"photon on {photon.spatial}: bin amplitudes not normalized "
            f"(norm {bin_norm:.3e})"
        )
    if len(photon.bins) > registry.bins:
        raise FockError(
            f"photon on {photon.spatial} uses {len(photon.bins)} bins, "
            f"registry has {registry.bins}"
        )
    op = {}
    for pol, pamp in zip((H, V), photon.pol_amps):
        for b, bamp in enumerate(photon.bins):
            c = complex(pamp) * complex(bamp)
            if c != 0:
                op[registry.index(ModeId(photon.spatial, pol, b))] = c
    return op


def _apply_creation(registry: ModeRegistry, state_terms: dict, op: dict) -> dict:
    """Apply one creation operator (linear combination) to normalized kets."""
    out = {}
    for occ, amp in state_terms.items():
        for idx, coeff in op.items():
            n = occ[idx]
            new = list(occ)
            new[idx] = n + 1
            key = tuple(new)
            out[key] = out.get(key, 0.0j) + amp * coeff * math.sqrt(n + 1)
    return out


def prepare_product_state(registry: ModeRegistry, photons) -> PureState:
    """Normalized tensor product of single-photon wavepackets on vacuum.

    Photons sharing a mode pick up the bosonic sqrt(n!) enhancement before
    the final normalization.
    """
    photons = list(photons)
    if len(photons) > registry.photon_budget:
        raise FockError(
            f"{len(photons)} photons exceed the budget of {registry.photon_budget}"
        )
    terms = vacuum(registry).terms
    for photon in photons:
        terms = _apply_creation(registry, terms, _creation_op_vector(registry, photon))
    state = PureState(registry, terms).pruned()
    return state.normalized()


def superpose(states, amplitudes, normalize: bool = True) -> PureState:
    """Linear combination of pure states over one registry."""
    states = list(states)
    if not states:
        raise FockError("superpose needs at least one state")
    registry = states[0].registry
    photon_counts = set()
    terms = {}
    for st, amp in zip(states, amplitudes):
        if st.registry != registry:
            raise FockError("superpose: registry mismatch")
        photon_counts.add(st.total_photons())
        for occ, a in st.terms.items():
            terms[occ] = terms.get(occ, 0.0j) + complex(amp) * a
    if len(photon_counts) > 1:
        raise FockError(f"superpose mixes photon numbers {sorted(photon_counts)}")
    out = PureState(registry, terms).pruned()
    return out.normalized() if normalize else out


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b> over a shared registry."""
    if a.registry != b.registry:
        raise FockError("inner_product: registry mismatch")
    small, big = (a, b) if len(a.terms) <= len(b.terms) else (b, a)
    acc = 0.0j
    for occ, amp in small.terms.items():
        other = big.terms.get(occ)
        if other is not None:
            if small is a:
                acc += amp.conjugate() * other
            else:
                acc += other.conjugate() * amp
    return acc


@dataclass(frozen=True)
class ModeTransform:
    """Unitary matrix over an ordered subset of registry modes."""

    modes: tuple
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.modes), len(self.modes)):
            raise FockError(
                f"transform {self.name or '(unnamed)'}: matrix shape {m.shape} "
                f"does not match {len(self.modes)} modes"
            )
        object.__setattr__(self, "matrix", m)

    def unitarity_deviation(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(len(self.modes)))))


def _column_power_expansion(col_entries, n: int) -> dict:
    """Expand (sum_k c_k a_k^dag)^n into {counts-per-target: coefficient}.

    col_entries is a list of (target index position, coefficient); only
    nonzero entries should be passed.  Returned keys are tuples of counts
    aligned with col_entries order.
    """
    k = len(col_entries)
    out = {}
    for combo in combinations_with_replacement(range(k), n):
        counts = [0] * k
        for slot in combo:
            counts[slot] += 1
        coeff = math.factorial(n)
        for c in counts:
            coeff //= math.factorial(c)
        value = complex(coeff)
        for slot in range(k):
            if counts[slot]:
                value *= col_entries[slot][1] ** counts[slot]
        out[tuple(counts)] = value
    return out


def apply_mode_unitary(state: PureState, t: ModeTransform) -> PureState:
    """Exact evolution of a sparse state under a mode unitary.

    Amplitudes on modes outside t.modes are untouched; the output norm
    equals the input norm.
    """
    registry = state.registry
    if t.unitarity_deviation() > UNITARY_TOL:
        raise FockError(
            f"transform {t.name or '(unnamed)'} is not unitary "
            f"(deviation {t.unitarity_deviation():.3e})"
        )
    idxs = [registry.index(m) for m in t.modes]
    matrix = t.matrix
    # Nonzero entries per column, as (local row position, coefficient).
    col_support = []
    for j in range(len(idxs)):
        entries = [(i, matrix[i, j]) for i in range(len(idxs)) if matrix[i, j] != 0]
        col_support.append(entries)

    out_terms = {}
    for occ, amp in state.terms.items():
        local_ns = [occ[i] for i in idxs]
        total_local = sum(local_ns)
        if total_local == 0:
            out_terms[occ] = out_terms.get(occ, 0.0j) + amp
            continue
        base = amp
        for n in local_ns:
            base /= math.sqrt(math.factorial(n))
        # Monomials over local positions: {local counts tuple: coefficient}.
        monos = {tuple([0] * len(idxs)): base}
        for j, nj in enumerate(local_ns):
            if nj == 0:
                continue
            expansion = _column_power_expansion(col_support[j], nj)
            nxt = {}
            for counts, coeff in monos.items():
                for sub_counts, sub_coeff in expansion.items():
                    merged = list(counts)
                    for (pos, _), c in zip(col_support[j], sub_counts):
                        merged[pos] += c
                    key = tuple(merged)
                    nxt[key] = nxt.get(key, 0.0j) + coeff * sub_coeff
            monos = nxt
        template = list(occ)
        for i in idxs:
            template[i] = 0
        for counts, coeff in monos.items():
            new_occ = list(template)
            factor = coeff
            for pos, c in enumerate(counts):
                if c:
                    new_occ[idxs[pos]] = c
                    factor *= math.sqrt(math.factorial(c))
            key = tuple(new_occ)
            out_terms[key] = out_terms.get(key, 0.0j) + factor
    out = PureState(registry, out_terms).pruned()
    if abs(out.norm() - state.norm()) > NORM_TOL:
        raise FockError(
            f"norm drifted {state.norm():.12f} -> {out.norm():.12f} "
            f"under {t.name or '(unnamed)'}"
        )
    return out


POL_BASIS = ("HH", "HV", "VH", "VV")


def partial_trace_to_polarization(state: PureState, kept_spatial) -> np.ndarray:
    """4x4 two-qubit polarization density matrix for a kept pair of arms.

    Every term must hold exactly one photon in each kept arm and vacuum
    everywhere else; the temporal-bin index of each kept photon is traced
    out.  Basis order is (HH, HV, VH, VV), first arm then second.
    """
    registry = state.registry
    arm_a, arm_b = kept_spatial
    amp_map = {}  # (pol_a, bin_a, pol_b, bin_b) -> amplitude
    idx_of = registry.index
    kept_idx = {
        idx_of(m): m for arm in (arm_a, arm_b) for m in registry.group(arm)
    }
    for occ, amp in state.terms.items():
        found = {}
        for i, n in enumerate(occ):
            if n == 0:
                continue
            mode = kept_idx.get(i)
            if mode is None:
                raise FockError(
                    f"non-vacuum residual mode {registry.modes[i]} in kept-pair state"
                )
            if n > 1:
                raise FockError(f"non-qubit support: {n} photons in {mode}")
            if mode.spatial in found:
                raise FockError(
                    f"non-qubit support: two photons in arm {mode.spatial}"
                )
            found[mode.spatial] = mode
        if set(found) != {arm_a, arm_b}:
            raise FockError(
                f"non-qubit support: arms {sorted(found)} occupied, "
                f"expected one photon in each of {arm_a}, {arm_b}"
            )
        ma, mb = found[arm_a], found[arm_b]
        amp_map[(ma.pol, ma.bin, mb.pol, mb.bin)] = amp
    norm = math.sqrt(sum(abs(a) ** 2 for a in amp_map.values()))
    if norm == 0:
        raise FockError("kept-pair state is empty")
    rho = np.zeros((4, 4), dtype=complex)
    pol_index = {"HH": 0, "HV": 1, "VH": 2, "VV": 3}
    items = list(amp_map.items())
    for (pa, ba, pb, bb), amp in items:
        row = pol_index[pa + pb]
        for (qa, ca, qb, cb), amp2 in items:
            if ba == ca and bb == cb:
                col = pol_index[qa + qb]
                rho[row, col] += (amp / norm) * (amp2 / norm).conjugate()
    return rho
