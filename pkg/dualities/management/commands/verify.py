import csv
import io
import logging

from django.core.management.base import CommandError

from dualities.management.base import EXIT_VERIFICATION_FAILED, DualityCommand
from dualities.serializers import MODEL_CHOICES, SUITE_CHOICES, VerificationRunSerializer
from dualities.services.golden import compare_golden, record_golden
from dualities.services.identity_suites import QCA_MIN_LENGTH, SUITES
from dualities.tasks import dispatch_suites

logger = logging.getLogger(__name__)

GOLDEN_SUITES = ('fusion',)


class Command(DualityCommand):
    help = 'Build the chain MPOs and verify the duality identities numerically'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('-L', '--length', type=int, default=4, help='Number of sites')
        parser.add_argument('--suite', choices=SUITE_CHOICES, default='all')
        parser.add_argument('--model', choices=MODEL_CHOICES, default='clock')
        parser.add_argument('--record-golden', action='store_true', help='Lock the fitted scales of passing identities')
        parser.add_argument('--golden-dir', default=None)

    def handle(self, *args, **options):
        spec = self.job_spec(options, length=options['length'], suite=options['suite'], model=options['model'])
        data = spec.validated_data
        suites = list(SUITES) if data['suite'] == 'all' else [data['suite']]
        if data['suite'] == 'all' and data['length'] < QCA_MIN_LENGTH:
            suites.remove('qca')
        if data['suite'] == 'all' and data['model'] == 'cluster' and str(data['group']) != 'Z2xZ2':
            suites.remove('selfdual')

        reports = self.run(dispatch_suites, spec.task_payload(), suites)
        golden = [r for r in reports if r['suite'] in GOLDEN_SUITES]
        compare_golden(golden, options['golden_dir'])
        if options['record_golden']:
            path = record_golden(golden, options['golden_dir'])
            logger.info('golden scales written to %s', path)

        all_pass = all(r['pass'] for r in reports)
        run = {
            'group': str(data['group']),
            'L': data['length'],
            'suites': suites,
            'all_pass': all_pass,
            'reports': reports,
        }
        self.emit(data['output'], VerificationRunSerializer(run).data, csv_text=_csv(reports), text=_text(run))
        if not all_pass:
            failed = [r['identity'] for r in reports if not r['pass']]
            raise CommandError(f'{len(failed)} identities failed: {failed}', returncode=EXIT_VERIFICATION_FAILED)


def _csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['identity', 'L', 'group', 'max_error', 'fitted_scale', 'pass'])
    for r in reports:
        writer.writerow([r['identity'], r['L'], r['group'], r['max_error'], r['fitted_scale'], r['pass']])
    return buf.getvalue()


def _text(run):
    lines = [f"{run['group']} L={run['L']} suites={','.join(run['suites'])}"]
    for r in run['reports']:
        mark = 'ok  ' if r['pass'] else 'FAIL'
        lines.append(f"  {mark} {r['identity']}  max_error={r['max_error']:.3g}")
    lines.append('all pass' if run['all_pass'] else 'FAILED')
    return '\n'.join(lines) + '\n'
