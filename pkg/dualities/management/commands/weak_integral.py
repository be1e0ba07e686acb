import csv
import io

from dualities.management.base import DualityCommand
from dualities.serializers import VARIANT_CHOICES, WeakIntegralReportSerializer
from dualities.services.fusion_ring import build_ring, weak_integral_report


class Command(DualityCommand):
    help = 'Check whether every FP dimension squared of a fusion ring is an integer'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--ring', choices=VARIANT_CHOICES, default='graded')
        parser.add_argument('--window', type=int, default=1)

    def handle(self, *args, **options):
        spec = self.job_spec(options, variant=options['ring'], window=options['window'])
        data = spec.validated_data
        ring = self.run(build_ring, data['variant'], data['group'], data['bicharacter'], data['window'], data.get('seed'))
        report = self.run(weak_integral_report, ring, data.get('tol'))

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(['label', 'dim', 'dim_squared', 'distance'])
        for s in report['simples']:
            writer.writerow([s['label'], s['dim'], s['dim_squared'], s['distance']])
        verdict = 'weakly integral' if report['weakly_integral'] else 'not weakly integral'
        text = '\n'.join(
            [f'{ring.name}: {verdict}']
            + [f"  {s['label']}: d^2 = {s['dim_squared']:.12g}" for s in report['simples']]
        ) + '\n'
        self.emit(data['output'], WeakIntegralReportSerializer(report).data, csv_text=buf.getvalue(), text=text)
