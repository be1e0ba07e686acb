import json
import tempfile
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase, override_settings

from dualities.exceptions import CapExceededError, UnsupportedChainError
from dualities.services.abelian_group import default_bicharacter, parse_group
from dualities.services.golden import compare_golden, load_golden, record_golden
from dualities.services.identity_suites import run_suite
from dualities.services.mpo_chain import ChainConfig
from dualities.tasks import build_chain, dispatch_suites, run_identity_suite


def chain(spec='Z2', length=4):
    group = parse_group(spec)
    return ChainConfig(group, default_bicharacter(group), length)


class FusionSuiteTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.reports = run_suite('fusion', chain())
        cls.by_name = {r['identity']: r for r in cls.reports}

    def test_every_identity_passes(self):
        failed = [r for r in self.reports if not r['pass']]
        self.assertEqual(failed, [])

    def test_identity_names(self):
        for name in ('D+eta = D+', 'etaD+ = D+', 'etaT+ = eta.T+', 'D+^2 = T+ + etaT+', 'D- = D+T-',
                     'T+ = cyclic shift', 'T+T- = 1', 'D+D- = (sum_g eta_g)', 'D-D+ = (sum_g eta_g)',
                     'rank(D+) < |A|^L', 'D+^2 weights = D+ o D+ channel weights'):
            self.assertIn(name, self.by_name)

    def test_fitted_scales(self):
        for name in ('D+eta = D+', 'etaD+ = D+', 'D+^2 = T+ + etaT+', 'D- = D+T-'):
            self.assertEqual(self.by_name[name]['fitted_scale'], 1.0)

    def test_rank_and_weights(self):
        rank = self.by_name['rank(D+) < |A|^L']['detail']
        self.assertEqual((rank['rank'], rank['expected'], rank['dimension']), (8, 8, 16))
        weights = self.by_name['D+^2 weights = D+ o D+ channel weights']['detail']
        self.assertAlmostEqual(weights['measured']['T+'], 0.5)
        self.assertAlmostEqual(weights['channel']['etaT+'], 0.5)

    def test_reports_are_json_safe_and_tagged(self):
        json.dumps(self.reports)
        self.assertEqual({r['suite'] for r in self.reports}, {'fusion'})
        self.assertEqual({(r['group'], r['L']) for r in self.reports}, {('Z2', 4)})


class OtherSuiteTests(SimpleTestCase):
    def test_selfdual_clock(self):
        reports = run_suite('selfdual', chain('Z3', 2))
        self.assertTrue(all(r['pass'] for r in reports), reports)
        self.assertEqual(reports[-1]['identity'], '[D+, H_clock] = 0')
        self.assertEqual(reports[-1]['detail']['variant'], 'exact')

    def test_selfdual_cluster_needs_klein_cells(self):
        with self.assertRaises(UnsupportedChainError):
            run_suite('selfdual', chain('Z2', 4), model='cluster')
        reports = run_suite('selfdual', chain('Z2xZ2', 2), model='cluster')
        self.assertEqual(len(reports), 4)
        self.assertTrue(all(r['pass'] for r in reports), reports)

    def test_qca(self):
        reports = run_suite('qca', chain('Z2', 4))
        self.assertTrue(all(r['pass'] for r in reports), reports)
        self.assertEqual(reports[1]['detail']['offset'], -1)
        with self.assertRaises(UnsupportedChainError):
            run_suite('qca', chain('Z2', 3))
        with self.assertRaises(UnsupportedChainError):
            run_suite('qca', chain('Z2', 2))

    def test_intertwiner(self):
        reports = run_suite('intertwiner', chain('Z2', 4))
        names = [r['identity'] for r in reports]
        self.assertIn('T+eta -> etaT+', names)
        self.assertIn('D+D+ -> T+', names)
        self.assertIn('F(eta,T+,T+) = 1', names)
        self.assertIn('F(T-,T-,eta) = 1', names)
        self.assertNotIn('F(eta,T+,T-) = 1', names)
        self.assertTrue(all(r['pass'] for r in reports), [r for r in reports if not r['pass']])

    def test_unknown_suite(self):
        with self.assertRaises(UnsupportedChainError):
            run_suite('anomaly', chain())


class LongerChainSuiteTests(SimpleTestCase):
    def test_fusion_suite_matches_the_locked_scales(self):
        reports = compare_golden(run_suite('fusion', chain('Z2', 6)))
        by_name = {r['identity']: r for r in reports}
        self.assertTrue(all(r['pass'] for r in reports), [r for r in reports if not r['pass']])
        for name in ('D+^2 = T+ + etaT+', 'D+eta = D+', 'etaD+ = D+', 'D- = D+T-'):
            self.assertEqual(by_name[name]['detail']['golden_scale'], 1.0)
        rank = by_name['rank(D+) < |A|^L']['detail']
        self.assertEqual((rank['rank'], rank['dimension']), (32, 64))

    def test_selfdual_clock(self):
        for spec, length in (('Z2', 6), ('Z3', 4)):
            reports = run_suite('selfdual', chain(spec, length))
            with self.subTest(spec=spec, L=length):
                self.assertTrue(all(r['pass'] for r in reports), reports)
                self.assertEqual(reports[-1]['detail']['variant'], 'exact')

    def test_selfdual_cluster_on_four_cells(self):
        reports = run_suite('selfdual', chain('Z2xZ2', 4), model='cluster')
        self.assertTrue(all(r['pass'] for r in reports), reports)
        self.assertEqual(reports[-1]['detail']['variant'], 'exact')

    def test_qca(self):
        reports = run_suite('qca', chain('Z2', 6))
        self.assertTrue(all(r['pass'] for r in reports), reports)
        generators = reports[0]['detail']
        self.assertTrue(generators['bijective'])
        self.assertLessEqual(generators['spread'], 1)
        self.assertEqual(len(generators['generators']), 12)
        self.assertEqual(reports[1]['detail']['offset'], -1)


class GoldenTests(SimpleTestCase):
    def report(self, scale, identity='D+eta = D+', passed=True):
        return {'identity': identity, 'L': 4, 'group': 'Z2', 'max_error': 0.0, 'fitted_scale': scale,
                'pass': passed, 'detail': {}}

    def test_shipped_golden_file(self):
        golden = load_golden()
        self.assertEqual(golden['Z2']['L4']['D+^2 = T+ + etaT+'], 1.0)
        self.assertEqual(golden['Z2']['L6']['D- = D+T-'], 1.0)

    def test_drift_fails_the_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            Path(tmp, 'fitted_scales.json').write_text(json.dumps({'Z2': {'L4': {'D+eta = D+': 1.0}}}))
            ok, drifted, unknown = self.report(1.0), self.report(-1.0), self.report(3.0, identity='new')
            compare_golden([ok, drifted, unknown], tmp)
        self.assertTrue(ok['pass'])
        self.assertEqual(ok['detail']['golden_scale'], 1.0)
        self.assertFalse(drifted['pass'])
        self.assertTrue(unknown['pass'])

    def test_complex_scales(self):
        with tempfile.TemporaryDirectory() as tmp:
            Path(tmp, 'fitted_scales.json').write_text(json.dumps({'Z2': {'L4': {'D+eta = D+': [0.0, 1.0]}}}))
            report = self.report([0.0, 1.0])
            compare_golden([report], tmp)
        self.assertTrue(report['pass'])

    def test_record_merges_passing_scales(self):
        with tempfile.TemporaryDirectory() as tmp:
            record_golden([self.report(1.0), self.report(2.0, identity='failed', passed=False),
                           self.report(None, identity='unscaled')], tmp)
            record_golden([self.report(1.0, identity='D- = D+T-')], tmp)
            golden = load_golden(tmp)
        self.assertEqual(golden, {'Z2': {'L4': {'D+eta = D+': 1.0, 'D- = D+T-': 1.0}}})


class TaskTests(SimpleTestCase):
    job = {'group': 'Z2', 'chi': [[1]], 'length': 4, 'model': 'clock', 'tol': None, 'seed': None}

    def test_build_chain(self):
        cfg = build_chain(self.job)
        self.assertEqual(str(cfg), 'Z2 L=4')
        self.assertEqual(build_chain(dict(self.job, chi=None, group='Z3', length=2)).chi.matrix, ((1,),))

    def test_task_runs_one_suite(self):
        reports = run_identity_suite.apply(args=[dict(self.job, suite='qca')]).get()
        self.assertTrue(reports)
        self.assertEqual({r['suite'] for r in reports}, {'qca'})

    def test_dispatch_keeps_suite_order(self):
        reports = dispatch_suites(self.job, ['qca', 'fusion'])
        suites = [r['suite'] for r in reports]
        self.assertEqual(suites, sorted(suites, key=['qca', 'fusion'].index))

    @override_settings(RUN_TASK_INLINE=False)
    def test_unreachable_broker_falls_back_to_inline(self):
        with mock.patch('dualities.tasks.broker_available', return_value=False), \
                mock.patch('dualities.tasks.group') as fan_out:
            reports = dispatch_suites(self.job, ['qca'])
        fan_out.assert_not_called()
        self.assertTrue(all(r['pass'] for r in reports))

    def test_cap_errors_propagate(self):
        with self.assertRaises(CapExceededError):
            dispatch_suites(dict(self.job, length=20), ['fusion'])

    def test_task_result_keeps_the_cap_error(self):
        result = run_identity_suite.apply(args=[dict(self.job, length=20, suite='fusion')])
        with self.assertRaises(CapExceededError) as cm:
            result.get()
        self.assertEqual(cm.exception.cap, 4096)
