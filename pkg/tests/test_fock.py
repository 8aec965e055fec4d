import math

import numpy as np
import pytest

from eventready import (
    FockError,
    ModeId,
    ModeRegistry,
    ModeTransform,
    PhotonSpec,
    apply_mode_unitary,
    basis_state,
    inner_product,
    partial_trace_to_polarization,
    prepare_product_state,
    superpose,
)

from oracles import (
    evolve_occupation_via_permanent,
    prepare_photons_via_permanent,
    random_unitary,
)


def single_bin_registry(labels, budget=4):
    return ModeRegistry(labels, bins=1, photon_budget=budget)


class TestPrepareProductState:
    def test_single_photon_identity(self):
        reg = single_bin_registry(["A1"])
        st = prepare_product_state(reg, [PhotonSpec("A1", (1.0, 0.0), (1.0,))])
        occ = tuple(1 if m == ModeId("A1", "H", 0) else 0 for m in reg.modes)
        assert st.terms.keys() == {occ}
        assert st.terms[occ] == pytest.approx(1.0)
        assert st.norm() == pytest.approx(1.0)

    def test_four_plus_photons_give_sixteen_terms(self):
        reg = single_bin_registry(["A1", "A2", "B1", "B2"])
        st = prepare_product_state(
            reg, [PhotonSpec.plus(s) for s in ("A1", "A2", "B1", "B2")]
        )
        assert len(st.terms) == 16
        for amp in st.terms.values():
            assert amp == pytest.approx(0.25)

    def test_two_photons_same_mode_normalize_away_sqrt2(self):
        # a+ a+ |0> = sqrt(2) |2>; after normalization the ket has amplitude 1.
        reg = single_bin_registry(["A1"])
        photon = PhotonSpec("A1", (1.0, 0.0), (1.0,))
        st = prepare_product_state(reg, [photon, photon])
        occ = tuple(2 if m == ModeId("A1", "H", 0) else 0 for m in reg.modes)
        assert st.terms.keys() == {occ}
        assert st.terms[occ] == pytest.approx(1.0)

    def test_matches_permanent_preparation_oracle(self):
        reg = ModeRegistry(["A1", "A2"], bins=2)
        photons = [
            PhotonSpec("A1", (0.6, 0.8), (1.0,)),
            PhotonSpec.plus("A2", bins=(0.8, 0.6)),
            PhotonSpec("A1", (0.0, 1.0), (0.6, 0.8)),
        ]
        st = prepare_product_state(reg, photons)
        vectors = []
        for p in photons:
            vec = np.zeros(reg.size, dtype=complex)
            for pol, pa in zip(("H", "V"), p.pol_amps):
                for b, ba in enumerate(p.bins):
                    vec[reg.index(ModeId(p.spatial, pol, b))] = pa * ba
            vectors.append(vec)
        expected = prepare_photons_via_permanent(vectors, reg.size)
        assert set(st.terms) == set(expected)
        for occ, amp in expected.items():
            assert st.terms[occ] == pytest.approx(amp, abs=1e-12)

    def test_unnormalized_pol_rejected(self):
        reg = single_bin_registry(["A1"])
        with pytest.raises(FockError, match="not normalized"):
            prepare_product_state(reg, [PhotonSpec("A1", (1.0, 1.0), (1.0,))])

    def test_unknown_spatial_label_rejected(self):
        reg = single_bin_registry(["A1"])
        with pytest.raises(KeyError, match="Z9"):
            prepare_product_state(reg, [PhotonSpec("Z9", (1.0, 0.0), (1.0,))])

    def test_photon_budget_enforced(self):
        reg = ModeRegistry(["A1"], bins=1, photon_budget=2)
        photon = PhotonSpec("A1", (1.0, 0.0), (1.0,))
        with pytest.raises(FockError, match="budget"):
            prepare_product_state(reg, [photon] * 3)


class TestApplyModeUnitary:
    def test_identity_leaves_state_alone(self):
        reg = single_bin_registry(["A1", "A2"])
        st = prepare_product_state(reg, [PhotonSpec.plus("A1"), PhotonSpec.plus("A2")])
        ident = ModeTransform(reg.modes, np.eye(reg.size))
        out = apply_mode_unitary(st, ident)
        assert out.terms.keys() == st.terms.keys()
        for occ, amp in st.terms.items():
            assert out.terms[occ] == pytest.approx(amp)

    def test_hom_bunching_on_symmetric_splitter(self):
        reg = single_bin_registry(["a", "b"])
        st = prepare_product_state(
            reg,
            [PhotonSpec("a", (1.0, 0.0), (1.0,)), PhotonSpec("b", (1.0, 0.0), (1.0,))],
        )
        h = ModeId("a", "H", 0)
        h2 = ModeId("b", "H", 0)
        m = np.eye(reg.size, dtype=complex)
        i, j = reg.index(h), reg.index(h2)
        s = 1 / math.sqrt(2)
        m[i, i], m[i, j], m[j, i], m[j, j] = s, s, s, -s
        out = apply_mode_unitary(st, ModeTransform(reg.modes, m))
        # |1,1> -> (|2,0> - |0,2>)/sqrt(2) under this splitter sign choice.
        two_a = basis_state(reg, {h: 2})
        two_b = basis_state(reg, {h2: 2})
        assert out.amplitude(next(iter(two_a.terms))) == pytest.approx(s)
        assert out.amplitude(next(iter(two_b.terms))) == pytest.approx(-s)
        coincidence = basis_state(reg, {h: 1, h2: 1})
        assert out.amplitude(next(iter(coincidence.terms))) == pytest.approx(0.0, abs=1e-14)

    def test_norm_preserved_for_random_unitaries(self):
        rng = np.random.default_rng(7)
        reg = ModeRegistry(["a", "b"], bins=2)
        for _ in range(25):
            n = int(rng.integers(1, 5))
            occ = [0] * reg.size
            for _ in range(n):
                occ[int(rng.integers(reg.size))] += 1
            st = basis_state(reg, {m: c for m, c in zip(reg.modes, occ) if c})
            u = random_unitary(reg.size, rng)
            out = apply_mode_unitary(st, ModeTransform(reg.modes, u))
            assert abs(out.norm() - 1.0) < 1e-10
            assert out.total_photons() == n

    def test_composition_matches_product(self):
        rng = np.random.default_rng(11)
        reg = ModeRegistry(["a"], bins=2)
        st = prepare_product_state(
            reg, [PhotonSpec.plus("a", bins=(0.6, 0.8)), PhotonSpec.plus("a")]
        )
        u1 = random_unitary(reg.size, rng)
        u2 = random_unitary(reg.size, rng)
        seq = apply_mode_unitary(
            apply_mode_unitary(st, ModeTransform(reg.modes, u1)),
            ModeTransform(reg.modes, u2),
        )
        combined = apply_mode_unitary(st, ModeTransform(reg.modes, u2 @ u1))
        for occ in set(seq.terms) | set(combined.terms):
            assert seq.amplitude(occ) == pytest.approx(combined.amplitude(occ), abs=1e-10)

    def test_non_unitary_rejected(self):
        reg = single_bin_registry(["a"])
        st = prepare_product_state(reg, [PhotonSpec.plus("a")])
        bad = np.eye(reg.size, dtype=complex)
        bad[0, 0] = 1.01
        with pytest.raises(FockError, match="not unitary"):
            apply_mode_unitary(st, ModeTransform(reg.modes, bad))

    def test_amplitudes_match_permanent_oracle(self):
        rng = np.random.default_rng(42)
        reg = ModeRegistry(["a", "b", "c", "d"], bins=1)
        assert reg.size == 8
        for _ in range(20):
            n = int(rng.integers(1, 5))
            occ = [0] * reg.size
            for _ in range(n):
                occ[int(rng.integers(reg.size))] += 1
            occ = tuple(occ)
            st = basis_state(reg, {m: c for m, c in zip(reg.modes, occ) if c})
            u = random_unitary(reg.size, rng)
            out = apply_mode_unitary(st, ModeTransform(reg.modes, u))
            expected = evolve_occupation_via_permanent(u, occ)
            assert set(out.terms) == set(expected)
            for o, amp in expected.items():
                assert out.amplitude(o) == pytest.approx(amp, abs=1e-10)


class TestInnerProduct:
    def test_self_overlap_is_one(self):
        reg = single_bin_registry(["a", "b"])
        st = prepare_product_state(reg, [PhotonSpec.plus("a"), PhotonSpec.plus("b")])
        assert inner_product(st, st) == pytest.approx(1.0)

    def test_orthogonal_occupations(self):
        reg = single_bin_registry(["a", "b"])
        hv_a = basis_state(reg, {ModeId("a", "H", 0): 1, ModeId("a", "V", 0): 1})
        hv_b = basis_state(reg, {ModeId("b", "H", 0): 1, ModeId("b", "V", 0): 1})
        assert inner_product(hv_a, hv_b) == 0

    def test_conjugate_symmetry(self):
        reg = single_bin_registry(["a"])
        s1 = superpose(
            [
                basis_state(reg, {ModeId("a", "H", 0): 1}),
                basis_state(reg, {ModeId("a", "V", 0): 1}),
            ],
            [1.0, 1j],
        )
        s2 = superpose(
            [
                basis_state(reg, {ModeId("a", "H", 0): 1}),
                basis_state(reg, {ModeId("a", "V", 0): 1}),
            ],
            [0.6, 0.8],
        )
        assert inner_product(s1, s2) == pytest.approx(inner_product(s2, s1).conjugate())

    def test_registry_mismatch_rejected(self):
        r1 = single_bin_registry(["a"])
        r2 = single_bin_registry(["b"])
        s1 = prepare_product_state(r1, [PhotonSpec.plus("a")])
        s2 = prepare_product_state(r2, [PhotonSpec.plus("b")])
        with pytest.raises(FockError, match="registry"):
            inner_product(s1, s2)


class TestPartialTrace:
    def test_phi_plus_single_bin(self):
        reg = single_bin_registry(["a", "b"])
        st = superpose(
            [
                basis_state(reg, {ModeId("a", "H", 0): 1, ModeId("b", "H", 0): 1}),
                basis_state(reg, {ModeId("a", "V", 0): 1, ModeId("b", "V", 0): 1}),
            ],
            [1.0, 1.0],
        )
        rho = partial_trace_to_polarization(st, ("a", "b"))
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[0, 3] = expected[3, 0] = expected[3, 3] = 0.5
        assert np.allclose(rho, expected, atol=1e-12)
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-10

    def test_orthogonal_bins_kill_coherence(self):
        reg = ModeRegistry(["a", "b"], bins=2)
        st = superpose(
            [
                basis_state(reg, {ModeId("a", "H", 0): 1, ModeId("b", "H", 0): 1}),
                basis_state(reg, {ModeId("a", "V", 1): 1, ModeId("b", "V", 1): 1}),
            ],
            [1.0, 1.0],
        )
        rho = partial_trace_to_polarization(st, ("a", "b"))
        expected = np.diag([0.5, 0.0, 0.0, 0.5])
        assert np.allclose(rho, expected, atol=1e-12)

    def test_partial_overlap_sets_off_diagonal(self):
        # V photons on one side ride sqrt(0.89) bin0 + sqrt(0.11) bin1.
        reg = ModeRegistry(["a", "b"], bins=2)
        c, s = math.sqrt(0.89), math.sqrt(0.11)
        hh = basis_state(reg, {ModeId("a", "H", 0): 1, ModeId("b", "H", 0): 1})
        vv0 = basis_state(reg, {ModeId("a", "V", 0): 1, ModeId("b", "V", 0): 1})
        vv1 = basis_state(reg, {ModeId("a", "V", 1): 1, ModeId("b", "V", 0): 1})
        st = superpose([hh, vv0, vv1], [1.0, c, s])
        rho = partial_trace_to_polarization(st, ("a", "b"))
        assert rho[0, 3] == pytest.approx(c / 2, abs=1e-12)
        assert rho[0, 0] == pytest.approx(0.5, abs=1e-12)
        assert rho[3, 3] == pytest.approx(0.5, abs=1e-12)

    def test_two_photons_in_one_arm_rejected(self):
        reg = single_bin_registry(["a", "b"])
        st = basis_state(reg, {ModeId("a", "H", 0): 1, ModeId("a", "V", 0): 1})
        with pytest.raises(FockError, match="non-qubit"):
            partial_trace_to_polarization(st, ("a", "b"))

    def test_residual_photon_rejected(self):
        reg = single_bin_registry(["a", "b", "c"])
        st = basis_state(
            reg,
            {
                ModeId("a", "H", 0): 1,
                ModeId("b", "H", 0): 1,
                ModeId("c", "H", 0): 1,
            },
        )
        with pytest.raises(FockError, match="residual"):
            partial_trace_to_polarization(st, ("a", "b"))


class TestSuperpose:
    def test_mixed_photon_number_rejected(self):
        reg = single_bin_registry(["a"])
        one = basis_state(reg, {ModeId("a", "H", 0): 1})
        two = basis_state(reg, {ModeId("a", "H", 0): 2})
        with pytest.raises(FockError, match="photon numbers"):
            superpose([one, two], [1.0, 1.0])

    def test_normalization(self):
        reg = single_bin_registry(["a"])
        h = basis_state(reg, {ModeId("a", "H", 0): 1})
        v = basis_state(reg, {ModeId("a", "V", 0): 1})
        st = superpose([h, v], [3.0, 4.0])
        assert st.norm() == pytest.approx(1.0)
        assert abs(st.amplitude(next(iter(h.terms)))) == pytest.approx(0.6)
