import cmath
import math

import numpy as np
import pytest

from eventready import (
    ModeRegistry,
    ModeTransform,
    OverlapModel,
    PhotonSpec,
    apply_mode_unitary,
    assign_wavepackets,
    bins_for_reference_overlap,
    overlap_from_delay,
    prepare_product_state,
)
from eventready.distinguishability import OverlapError


class TestOverlapFromDelay:
    def test_zero_delay_unity(self):
        assert overlap_from_delay(0.0) == pytest.approx(1.0)

    def test_magnitude_at_coherence_length(self):
        model = OverlapModel(coherence_length_um=200.0)
        assert abs(overlap_from_delay(200.0, model)) == pytest.approx(math.exp(-0.5))

    def test_three_coherence_lengths_kill_fringes(self):
        model = OverlapModel(coherence_length_um=200.0)
        assert abs(overlap_from_delay(600.0, model)) == pytest.approx(math.exp(-4.5), rel=1e-9)
        assert abs(overlap_from_delay(600.0, model)) < 0.012

    def test_magnitude_even_phase_odd(self):
        model = OverlapModel()
        for d in (0.37, 10.0, 123.4):
            v_plus = overlap_from_delay(d, model)
            v_minus = overlap_from_delay(-d, model)
            assert abs(v_plus) == pytest.approx(abs(v_minus), abs=1e-15)
            assert cmath.phase(v_plus) == pytest.approx(-cmath.phase(v_minus), abs=1e-12)

    def test_magnitude_monotone_in_abs_delay(self):
        model = OverlapModel()
        mags = [abs(overlap_from_delay(d, model)) for d in np.linspace(0, 800, 41)]
        assert all(a >= b - 1e-15 for a, b in zip(mags, mags[1:]))

    def test_phase_follows_fringe_period(self):
        model = OverlapModel(fringe_period_um=0.788)
        v = overlap_from_delay(0.197, model)  # quarter period
        assert cmath.phase(v) == pytest.approx(math.pi / 2, abs=1e-9)

    def test_bad_model_rejected(self):
        with pytest.raises(OverlapError):
            OverlapModel(coherence_length_um=-1.0)


class TestAssignWavepackets:
    def test_full_overlap_shares_bin0(self):
        packets = assign_wavepackets(2, [(0, 1, 1.0)])
        assert packets[0] == (1.0,)
        assert np.vdot(packets[1], packets[0]) == pytest.approx(1.0)
        assert len(packets[1]) == 1

    def test_zero_overlap_uses_fresh_bin(self):
        packets = assign_wavepackets(2, [(0, 1, 0.0)])
        assert packets[0][0] == pytest.approx(1.0)
        assert packets[1][0] == pytest.approx(0.0)
        assert abs(packets[1][1]) == pytest.approx(1.0)

    def test_hom_style_overlap(self):
        v = math.sqrt(0.94)
        packets = assign_wavepackets(2, [(0, 1, v)])
        assert packets[1][0] == pytest.approx(v)
        assert abs(packets[1][1]) == pytest.approx(math.sqrt(0.06))

    def test_pairwise_overlaps_reproduced(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = 4
            reqs = []
            # Random, guaranteed-PSD Gram from random unit vectors.
            vecs = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            vecs /= np.linalg.norm(vecs, axis=1)[:, None]
            for i in range(n):
                for j in range(i + 1, n):
                    reqs.append((i, j, complex(np.vdot(vecs[i], vecs[j]))))
            packets = assign_wavepackets(n, reqs, max_bins=4)
            padded = np.zeros((n, 4), dtype=complex)
            for k, p in enumerate(packets):
                padded[k, : len(p)] = p
            for i, j, v in reqs:
                assert np.vdot(padded[i], padded[j]) == pytest.approx(v, abs=1e-12)

    def test_infeasible_gram_rejected(self):
        # Three mutually anti-aligned unit vectors cannot exist.
        with pytest.raises(OverlapError, match="PSD"):
            assign_wavepackets(3, [(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)])

    def test_bin_budget_enforced(self):
        reqs = [(i, j, 0.0) for i in range(4) for j in range(i + 1, 4)]
        with pytest.raises(OverlapError, match="bin budget"):
            assign_wavepackets(4, reqs, max_bins=2)

    def test_reference_overlap_helper(self):
        bins = bins_for_reference_overlap(0.6)
        assert bins[0] == pytest.approx(0.6)
        assert abs(bins[1]) == pytest.approx(0.8)
        assert bins_for_reference_overlap(1.0) == (1.0,)


class TestBinsCollapse:
    def test_all_unit_overlaps_match_single_bin_simulation(self):
        """With every overlap at 1, extra bins change nothing downstream."""
        rng = np.random.default_rng(5)
        reg4 = ModeRegistry(["a", "b"], bins=4)
        reg1 = ModeRegistry(["a", "b"], bins=1)
        photons4 = [PhotonSpec.plus("a", bins=(1.0,)), PhotonSpec.plus("b", bins=(1.0,))]
        photons1 = [PhotonSpec.plus("a"), PhotonSpec.plus("b")]
        st4 = prepare_product_state(reg4, photons4)
        st1 = prepare_product_state(reg1, photons1)
        u = np.kron(
            np.array([[1, 1], [1, -1]]) / math.sqrt(2), np.eye(2)
        )  # couple a/b per polarization
        modes1 = reg1.modes
        t1 = ModeTransform(
            tuple(sorted(modes1, key=lambda m: (m.pol, m.spatial))), u.astype(complex)
        )
        modes4 = [m for m in reg4.modes if m.bin == 0]
        t4 = ModeTransform(
            tuple(sorted(modes4, key=lambda m: (m.pol, m.spatial))), u.astype(complex)
        )
        out4 = apply_mode_unitary(st4, t4)
        out1 = apply_mode_unitary(st1, t1)

        def strip(state):
            listing = {}
            for occ, amp in state.terms.items():
                label = tuple(
                    (m.spatial, m.pol, n)
                    for m, n in zip(state.registry.modes, occ)
                    if n
                )
                listing[label] = amp
            return listing

        l4, l1 = strip(out4), strip(out1)
        assert l4.keys() == l1.keys()
        for key, amp in l1.items():
            assert l4[key] == amp  # bit-identical
