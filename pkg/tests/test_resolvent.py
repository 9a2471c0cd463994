import math

import numpy as np
import pytest

from rabicf import (
    DivergedTailError,
    GZeroError,
    ModelParams,
    Parity,
    PoleSeparationError,
    ResolventStatus,
    WindowEmptyError,
    build_chain,
    build_pathological,
    char_poly,
    eigenvalues,
    inverse_recurrence_tail,
    poles_of_resolvent,
    resolvent_cf,
    sturm_count,
)
from rabicf.resolvent import PathologicalVariant

from conftest import FIXTURE, ORACLE_MINUS_12, ORACLE_PLUS_12


def reconstruct(seq, j):
    return seq.mantissas[j] * 2.0 ** float(seq.scale_exponents[j])


class TestCharPoly:
    def test_two_site_closed_form(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 1)
        for energy in (-0.5, 0.0, 0.3, 1.1, 2.0):
            det = reconstruct(char_poly(energy, chain), 0)
            expected = (energy - 0.4) * (energy - 0.6) - 0.49
            assert det == pytest.approx(expected, rel=1e-14)

    def test_two_site_roots(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 1)
        roots = poles_of_resolvent(chain, (-1.0, 2.0), 2).energies
        expected = [0.5 - math.sqrt(0.5), 0.5 + math.sqrt(0.5)]
        np.testing.assert_allclose(roots, expected, atol=1e-11)

    def test_diagonal_product_form(self):
        chain = build_chain(ModelParams(1.0, 0.0, 0.4), Parity.MINUS, 4)
        for energy in (-0.7, 0.25, 3.8):
            det = reconstruct(char_poly(energy, chain), 0)
            assert det == pytest.approx(np.prod(energy - chain.diag), rel=1e-13)

    def test_seed_minor(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 3)
        seq = char_poly(0.2, chain)
        assert reconstruct(seq, 4) == 1.0

    def test_no_overflow_large_order(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 800)
        seq = char_poly(0.5, chain)
        assert np.all(np.isfinite(seq.mantissas))

    def test_ratio_is_level_resolvent(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 6)
        seq = char_poly(0.2, chain)
        assert seq.ratio(0) == pytest.approx(resolvent_cf(0.2, chain).value, rel=1e-12)


class TestResolventCf:
    def test_diagonal_limit(self):
        chain = build_chain(ModelParams(1.0, 0.0, 0.4), Parity.PLUS, 5)
        for energy in (-1.0, 0.1, 0.9):
            got = resolvent_cf(energy, chain)
            assert got.value == pytest.approx(1.0 / (energy - 0.4), rel=1e-14)

    def test_two_site_hand_value(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 1)
        got = resolvent_cf(0.0, chain)
        assert got.value == pytest.approx(1.0 / (-0.4 - 0.49 / (-0.6)), rel=1e-14)
        assert got.value == pytest.approx(2.4, rel=1e-12)

    def test_reciprocal_inverse_identity(self):
        chain = build_chain(FIXTURE, Parity.MINUS, 40)
        for energy in np.linspace(-1.0, 4.0, 37):
            got = resolvent_cf(energy, chain)
            if got.status is ResolventStatus.CONVERGED and got.value != 0.0:
                assert got.value * got.reciprocal == pytest.approx(1.0, rel=1e-14)

    def test_tiny_reciprocal_at_eigenvalue(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 30)
        pole = poles_of_resolvent(chain, (-1.0, 1.0), 1).levels[0]
        got = resolvent_cf(pole.energy, chain)
        assert got.status is ResolventStatus.POLE_HIT or abs(got.reciprocal) < 1e-9


class TestPolesOfResolvent:
    def test_diagonal_spectrum(self):
        chain = build_chain(ModelParams(1.0, 0.0, 0.4), Parity.PLUS, 2)
        got = poles_of_resolvent(chain, (-1.0, 3.0), 5).energies
        np.testing.assert_allclose(got, [0.4, 0.6, 2.4], atol=1e-11)

    def test_matches_oracle(self):
        for parity, reference in (
            (Parity.PLUS, ORACLE_PLUS_12),
            (Parity.MINUS, ORACLE_MINUS_12),
        ):
            chain = build_chain(FIXTURE, parity, 200)
            got = poles_of_resolvent(chain, (-1.2, 7.0), 6).energies
            np.testing.assert_allclose(got, reference[:6], atol=1e-9)

    def test_empty_window(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 40)
        with pytest.raises(WindowEmptyError):
            poles_of_resolvent(chain, (-5.0, -3.0), 3)

    def test_interlacing_with_next_order(self):
        big = poles_of_resolvent(build_chain(FIXTURE, Parity.PLUS, 31), (-1.0, 6.0), 8).energies
        small = poles_of_resolvent(build_chain(FIXTURE, Parity.PLUS, 30), (-1.0, 6.0), 8).energies
        k = min(len(big), len(small)) - 1
        assert np.all(big[:k] <= small[:k] + 1e-9)
        assert np.all(small[:k] <= big[1 : k + 1] + 1e-9)

    def test_parity_union_at_g_zero(self):
        p = ModelParams(1.0, 0.0, 0.4)
        plus = poles_of_resolvent(build_chain(p, Parity.PLUS, 20), (-1.0, 4.0), 8).energies
        minus = poles_of_resolvent(build_chain(p, Parity.MINUS, 20), (-1.0, 4.0), 8).energies
        expected = {0.4, 0.6, 2.4, 2.6}, {-0.4, 1.4, 1.6, 3.4, 3.6}
        np.testing.assert_allclose(plus, sorted(expected[0]), atol=1e-10)
        np.testing.assert_allclose(minus, sorted(expected[1]), atol=1e-10)
        # each value appears in exactly one chain
        for value in plus:
            assert np.min(np.abs(minus - value)) > 0.1


class TestInverseRecurrenceTail:
    def test_seed_formula(self):
        chain = build_chain(FIXTURE, Parity.PLUS, 1)
        got = inverse_recurrence_tail(0.0, chain)
        assert got == pytest.approx(-0.4 / 0.49, rel=1e-15)
        assert got == pytest.approx(-0.8163265306122449, rel=1e-14)

    def test_approach_to_limit(self):
        # the upward recurrence is attracted to -omega/g^2 regardless of E0
        limit = -FIXTURE.omega / FIXTURE.g**2
        g40 = inverse_recurrence_tail(0.5, build_chain(FIXTURE, Parity.PLUS, 40))
        assert abs(g40 - limit) < 0.1 * abs(limit)

    def test_monotone_approach(self):
        limit = -FIXTURE.omega / FIXTURE.g**2
        g20 = inverse_recurrence_tail(0.5, build_chain(FIXTURE, Parity.PLUS, 20))
        g200 = inverse_recurrence_tail(0.5, build_chain(FIXTURE, Parity.PLUS, 200))
        assert abs(g200 - limit) < abs(g20 - limit)

    def test_g_zero_rejected(self):
        chain = build_chain(ModelParams(1.0, 0.0, 0.4), Parity.PLUS, 5)
        with pytest.raises(GZeroError):
            inverse_recurrence_tail(0.0, chain)

    def test_diverged_tail_reports_level(self):
        # E0 on the first diagonal entry zeroes the seed: pole at j=1
        chain = build_chain(FIXTURE, Parity.PLUS, 10)
        with pytest.raises(DivergedTailError) as exc:
            inverse_recurrence_tail(0.4, chain)
        assert exc.value.j == 1


class TestPathological:
    def test_projection_untouched(self):
        modified = build_pathological(0.5, FIXTURE, Parity.PLUS, 30)
        chain = modified.to_chain()
        base = modified.base
        np.testing.assert_array_equal(chain.diag[:30], base.diag[:30])
        np.testing.assert_array_equal(chain.offdiag, base.offdiag)
        assert chain.diag[30] != base.diag[30]

    def test_offdiag_variant_entries(self):
        modified = build_pathological(
            0.5, FIXTURE, Parity.PLUS, 30, PathologicalVariant.DIAG_AND_OFFDIAG
        )
        chain = modified.to_chain()
        assert chain.offdiag[29] == FIXTURE.g * 30
        np.testing.assert_array_equal(chain.offdiag[:29], modified.base.offdiag[:29])
        assert modified.modified_diag_nn == pytest.approx(
            0.5 - 30 / modified.tail, rel=1e-14
        )

    def test_planted_eigenvalue_location(self):
        # the modified matrix genuinely acquires an eigenvalue at E0 to
        # near machine precision, at every order; the Sturm count is the
        # robust witness
        for order in (10, 20, 40, 80, 160):
            chain = build_pathological(0.5, FIXTURE, Parity.PLUS, order).to_chain()
            assert sturm_count(0.5 + 1e-10, chain) - sturm_count(0.5 - 1e-10, chain) == 1

    def test_planted_reciprocal_small_order(self):
        # at order 10 the planted pole's residue is still resolvable in
        # double precision and the reciprocal at E0 is tiny; at larger
        # orders the border overlap of the planted mode collapses below
        # machine resolution (see decisions ledger)
        chain = build_pathological(0.5, FIXTURE, Parity.PLUS, 10).to_chain()
        assert abs(resolvent_cf(0.5, chain).reciprocal) < 1e-9

    def test_separation_from_genuine_poles(self):
        base = build_chain(FIXTURE, Parity.PLUS, 30)
        genuine = eigenvalues(base, 8).energies
        assert np.min(np.abs(genuine - 0.5)) >= 1e-3

    def test_rejects_e0_on_genuine_pole(self):
        genuine = eigenvalues(build_chain(FIXTURE, Parity.PLUS, 30), 1).energies[0]
        with pytest.raises(PoleSeparationError):
            build_pathological(float(genuine), FIXTURE, Parity.PLUS, 30)

    def test_low_mode_invariance_and_count(self):
        order = 40
        window = (-1.0, 6.0)
        pathological = build_pathological(0.5, FIXTURE, Parity.PLUS, order).to_chain()
        unmodified = build_chain(FIXTURE, Parity.PLUS, order)
        previous = build_chain(FIXTURE, Parity.PLUS, order - 1)
        count_pat = sturm_count(window[1], pathological) - sturm_count(window[0], pathological)
        count_unmod = sturm_count(window[1], unmodified) - sturm_count(window[0], unmodified)
        assert abs(count_pat - count_unmod) <= 1
        # every low eigenvalue of the order N-1 chain survives in the
        # pathological order-N chain essentially unmoved
        low_prev = eigenvalues(previous, 8).energies
        low_pat = eigenvalues(pathological, 9).energies
        for e in low_prev:
            assert np.min(np.abs(low_pat - e)) < 1e-6

    def test_tail_diagnostic(self):
        modified = build_pathological(0.5, FIXTURE, Parity.PLUS, 80)
        limit = -FIXTURE.omega / FIXTURE.g**2
        assert modified.slow_approach_diagnostic == pytest.approx(
            80 * (modified.tail - limit), rel=1e-14
        )
