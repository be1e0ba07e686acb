import json
import math

import numpy as np
from django.test import SimpleTestCase

from dualities.exceptions import FusionRingError
from dualities.services.abelian_group import default_bicharacter, parse_group
from dualities.services.center_channels import extreme_channels
from dualities.services.fusion_ring import (
    FusionRing,
    GradedLabel,
    OutOfWindow,
    build_ring,
    fibonacci_ring,
    fp_dimensions,
    group_ring,
    is_weakly_integral,
    tambara_yamagami,
    unitality_residual,
    verify_ring_axioms,
    weak_integral_report,
    z_graded_extension,
)
from dualities.tests.groups import GROUPS_UP_TO_16

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


def corrupted_z2():
    """Vec_Z2 with eta x eta = 2*1: still associative, but not a based ring."""
    N = np.zeros((2, 2, 2), dtype=np.int64)
    N[0, 0, 0] = N[0, 1, 1] = N[1, 0, 1] = 1
    N[1, 1, 0] = 2
    return FusionRing('bad_Z2', ['1', 'eta'], 0, [0, 1], N)


class BuiltinRingTests(SimpleTestCase):
    def test_group_ring(self):
        ring = group_ring(parse_group('Z3'))
        self.assertEqual(ring.name, 'Vec_Z3')
        self.assertEqual(ring.fuse('eta1', 'eta2'), {'1': 1})
        self.assertEqual(ring.dual, [0, 2, 1])
        np.testing.assert_allclose(ring.dims, [1, 1, 1])
        self.assertTrue(verify_ring_axioms(ring)['pass'])

    def test_ising(self):
        ring = tambara_yamagami(parse_group('Z2'))
        self.assertEqual(ring.labels, ['1', 'eta', 'm'])
        self.assertEqual(ring.fuse('m', 'm'), {'1': 1, 'eta': 1})
        self.assertEqual(ring.fuse('eta', 'm'), {'m': 1})
        np.testing.assert_allclose(ring.dims, [1, 1, math.sqrt(2)])
        self.assertTrue(verify_ring_axioms(ring)['pass'])
        self.assertTrue(is_weakly_integral(ring))

    def test_tambara_yamagami_of_klein_group(self):
        ring = tambara_yamagami(parse_group('Z2xZ2'))
        self.assertEqual(ring.rank, 5)
        self.assertAlmostEqual(ring.dims[-1], 2.0)
        self.assertLess(unitality_residual(ring), 1e-12)

    def test_fibonacci_is_not_weakly_integral(self):
        ring = fibonacci_ring()
        self.assertTrue(verify_ring_axioms(ring)['pass'])
        np.testing.assert_allclose(ring.dims, [1, GOLDEN_RATIO])
        report = weak_integral_report(ring)
        self.assertFalse(report['weakly_integral'])
        tau = report['simples'][1]
        self.assertEqual(tau['label'], 'tau')
        self.assertAlmostEqual(tau['dim_squared'], GOLDEN_RATIO + 1)
        self.assertAlmostEqual(tau['distance'], 3 - (GOLDEN_RATIO + 1))

    def test_build_ring_dispatch(self):
        z2 = parse_group('Z2')
        self.assertEqual(build_ring('group', z2).name, 'Vec_Z2')
        self.assertEqual(build_ring('ty', z2).name, 'TY_Z2')
        self.assertEqual(build_ring('fibonacci').name, 'Fibonacci')
        with self.assertRaises(FusionRingError):
            build_ring('haagerup', z2)

    def test_csv_and_json(self):
        ring = group_ring(parse_group('Z2'))
        lines = ring.to_csv().splitlines()
        self.assertEqual(lines[0], 'x,y,product')
        self.assertIn('eta,eta,1', lines)
        data = json.loads(ring.to_json())
        self.assertEqual(data['labels'], ['1', 'eta'])
        self.assertIn([1, 1, 0, 1], data['N'])

    def test_unknown_label(self):
        with self.assertRaises(FusionRingError):
            group_ring(parse_group('Z2')).fuse('1', 'tau')

    def test_negative_coefficients_are_rejected(self):
        N = -np.ones((1, 1, 1), dtype=np.int64)
        with self.assertRaises(FusionRingError):
            FusionRing('neg', ['1'], 0, [0], N)


class RingAxiomTests(SimpleTestCase):
    def test_builtin_rings_up_to_order_sixteen(self):
        for spec in GROUPS_UP_TO_16:
            group = parse_group(spec)
            for ring in (group_ring(group), tambara_yamagami(group)):
                with self.subTest(ring=ring.name):
                    self.assertTrue(verify_ring_axioms(ring)['pass'])
                    self.assertTrue(is_weakly_integral(ring))

    def test_corrupted_z2_fails_frobenius_and_dual_but_stays_associative(self):
        report = verify_ring_axioms(corrupted_z2())
        self.assertFalse(report['pass'])
        checks = report['checks']
        self.assertTrue(checks['unit']['pass'])
        self.assertTrue(checks['associativity']['pass'])
        self.assertFalse(checks['frobenius']['pass'])
        self.assertFalse(checks['dual']['pass'])
        self.assertEqual(checks['dual']['counterexample'], {'x': 'eta', 'dual': 'eta'})

    def test_corrupted_ising_fails_associativity(self):
        ring = tambara_yamagami(parse_group('Z2'))
        N = ring.N.copy()
        N[1, 2, 2] = 2
        bad = FusionRing('bad_Ising', ring.labels, ring.unit, ring.dual, N)
        report = verify_ring_axioms(bad)
        failure = report['checks']['associativity']['counterexample']
        self.assertEqual((failure['x'], failure['y'], failure['z'], failure['w']), ('eta', 'eta', 'm', 'm'))
        self.assertEqual((failure['lhs'], failure['rhs']), (1, 4))
        with self.assertRaises(FusionRingError):
            fp_dimensions(bad)


class GradedExtensionTests(SimpleTestCase):
    def setUp(self):
        self.chi = default_bicharacter(parse_group('Z2'))

    def test_window_one(self):
        ring = z_graded_extension(self.chi, 1)
        self.assertEqual([str(x) for x in ring.labels], ['D-', '1', 'eta', 'D+'])
        self.assertEqual(ring.grades, [-1, 0, 0, 1])
        self.assertEqual(ring.fuse('D+', 'D-'), {'1': 1, 'eta': 1})
        self.assertEqual(ring.fuse('eta', 'D+'), {'D+': 1})
        self.assertIsInstance(ring.fuse('D+', 'D+'), OutOfWindow)
        self.assertEqual(ring.dual, [3, 1, 2, 0])
        np.testing.assert_allclose(ring.dims, [math.sqrt(2), 1, 1, math.sqrt(2)])
        self.assertTrue(verify_ring_axioms(ring)['pass'])

    def test_window_two_has_eight_simples(self):
        ring = build_ring('graded', chi=self.chi, window=2)
        self.assertEqual(ring.rank, 8)
        self.assertEqual(ring.grades, [-2, -2, -1, 0, 0, 1, 2, 2])
        self.assertEqual(ring.fuse('D+', 'D+'), {'T+': 1, 'etaT+': 1})
        self.assertEqual(ring.fuse('T+', 'T-'), {'1': 1})
        self.assertIn(GradedLabel(2, 'etaT+'), ring.labels)
        self.assertTrue(verify_ring_axioms(ring)['pass'])
        self.assertTrue(is_weakly_integral(ring))
        self.assertLess(unitality_residual(ring), 1e-9)

    def test_graded_to_dict_lists_truncated_pairs(self):
        data = z_graded_extension(self.chi, 1).to_dict()
        self.assertEqual(data['window'], 1)
        self.assertIn([3, 3], data['out_of_window'])
        self.assertIn([0, 0], data['out_of_window'])
        self.assertNotIn([0, 3], data['out_of_window'])

    def test_klein_group_duality_has_dimension_two(self):
        ring = z_graded_extension(default_bicharacter(parse_group('Z2xZ2')), 1)
        self.assertEqual(ring.rank, 6)
        self.assertAlmostEqual(ring.dims[ring.index('D+')], 2.0)
        self.assertTrue(is_weakly_integral(ring))

    def test_channel_counts_match_the_graded_simples(self):
        for spec in ('Z3', 'Z4', 'Z2xZ2'):
            chi = default_bicharacter(parse_group(spec))
            n = chi.group.order
            ring = z_graded_extension(chi, 3)
            with self.subTest(spec=spec):
                for grade in range(-3, 4):
                    simples = ring.grades.count(grade)
                    self.assertEqual(simples, len(extreme_channels(chi, grade)))
                    self.assertEqual(simples, 1 if grade % 2 else n)
                self.assertTrue(verify_ring_axioms(ring)['pass'])
                self.assertTrue(is_weakly_integral(ring))

    def test_negative_window(self):
        with self.assertRaises(FusionRingError):
            z_graded_extension(self.chi, -1)
