import json
import logging

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from dualities.exceptions import CapExceededError, DualityError
from dualities.serializers import OUTPUT_CHOICES, JobSpecSerializer

logger = logging.getLogger(__name__)

EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT = 2
EXIT_CAP = 3


class DualityCommand(BaseCommand):
    """Shared flags, job validation and output for the dualities commands."""

    def add_arguments(self, parser):
        parser.add_argument('--group', default='Z2', help='Group spec Z<n>(xZ<m>)*, e.g. Z2 or Z2xZ2')
        parser.add_argument('--chi', default=None, help='Bicharacter as a JSON integer matrix, default diagonal')
        parser.add_argument('--output', choices=OUTPUT_CHOICES, default='json')
        parser.add_argument('--seed', type=int, default=None, help='Seed of the generic element in idempotent searches')
        parser.add_argument('--tol', type=float, default=None, help='Override both tolerance levels')

    def job_spec(self, options, **extra):
        data = {k: options.get(k) for k in ('group', 'output', 'seed', 'tol')}
        data = {k: v for k, v in data.items() if v is not None}
        if options.get('chi'):
            try:
                data['chi'] = json.loads(options['chi'])
            except json.JSONDecodeError as e:
                raise CommandError(f'--chi is not valid JSON: {e}', returncode=EXIT_INPUT)
        data.update({k: v for k, v in extra.items() if v is not None})
        spec = JobSpecSerializer(data=data)
        if not spec.is_valid():
            raise CommandError(f'Invalid job: {json.dumps(spec.errors, sort_keys=True)}', returncode=EXIT_INPUT)
        return spec

    def run(self, fn, *args, **kwargs):
        """Call into the services, mapping their failures onto exit codes."""
        try:
            return fn(*args, **kwargs)
        except CapExceededError as e:
            raise CommandError(str(e), returncode=EXIT_CAP)
        except (DualityError, serializers.ValidationError) as e:
            raise CommandError(str(e), returncode=EXIT_INPUT)

    def emit(self, output, payload, csv_text=None, text=None):
        if output == 'json':
            self.stdout.write(json.dumps(payload, sort_keys=True))
        elif output == 'csv':
            self.stdout.write(csv_text, ending='')
        else:
            self.stdout.write(text, ending='')
