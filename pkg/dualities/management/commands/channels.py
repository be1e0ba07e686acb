import csv
import io

from dualities.management.base import DualityCommand
from dualities.serializers import ChannelReportSerializer
from dualities.services.center_channels import channel_report


def _csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['grade', 'name', 'qdim', 'convolution_coefficient'])
    for grade in report['grades']:
        for row in zip(grade['names'], grade['qdims'], grade['convolution_coefficients']):
            writer.writerow([grade['grade'], *row])
    return buf.getvalue()


def _text(report):
    lines = [f"{report['group']} chi={report['chi']} window={report['window']}"]
    for grade in report['grades']:
        names = ', '.join(f'{n} (d={q:.6g})' for n, q in zip(grade['names'], grade['qdims']))
        lines.append(f"  grade {grade['grade']:+d}: {grade['count']} channels: {names}")
    for row in report['composition_table']:
        terms = ' + '.join(f'{c:.6g} {n}' for n, c in sorted(row['terms'].items()))
        lines.append(f"  {row['left']} o {row['right']} = {terms}")
    return '\n'.join(lines) + '\n'


class Command(DualityCommand):
    help = 'Enumerate the extreme duality channels of each grade and their compositions'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--window', type=int, default=1, help='Largest |grade| to enumerate')

    def handle(self, *args, **options):
        spec = self.job_spec(options, window=options['window'])
        data = spec.validated_data
        report = self.run(channel_report, data['bicharacter'], data['window'], seed=data.get('seed'), tol=data.get('tol'))
        payload = ChannelReportSerializer(report).data
        self.emit(data['output'], payload, csv_text=_csv(report), text=_text(report))
