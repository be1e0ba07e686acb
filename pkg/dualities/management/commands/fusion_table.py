from dualities.management.base import DualityCommand
from dualities.serializers import VARIANT_CHOICES, FusionRingSerializer
from dualities.services.fusion_ring import build_ring


class Command(DualityCommand):
    help = 'Print the fusion table of a group ring, a Tambara-Yamagami ring, Fibonacci or the Z-graded extension'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--variant', choices=VARIANT_CHOICES, default='group')
        parser.add_argument('--window', type=int, default=1, help='Grades kept by the graded variant')

    def handle(self, *args, **options):
        spec = self.job_spec(options, variant=options['variant'], window=options['window'])
        data = spec.validated_data
        ring = self.run(build_ring, data['variant'], data['group'], data['bicharacter'], data['window'], data.get('seed'))
        payload = self.run(lambda: FusionRingSerializer(ring.to_dict()).data)
        self.emit(data['output'], payload, csv_text=ring.to_csv(), text=ring.to_text())
