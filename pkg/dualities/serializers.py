from rest_framework import serializers

from .exceptions import BicharacterError, DomainError
from .services.abelian_group import Bicharacter, default_bicharacter, is_nondegenerate, parse_group

SCHEMA_VERSION = 1

OUTPUT_CHOICES = ['json', 'csv', 'text']
VARIANT_CHOICES = ['group', 'ty', 'graded', 'fibonacci']
SUITE_CHOICES = ['fusion', 'selfdual', 'qca', 'intertwiner', 'all']
MODEL_CHOICES = ['clock', 'cluster']


class JobSpecSerializer(serializers.Serializer):
    group = serializers.CharField(max_length=64, default='Z2')
    chi = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField()), required=False, allow_null=True
    )
    length = serializers.IntegerField(min_value=2, required=False)
    window = serializers.IntegerField(min_value=0, default=1)
    variant = serializers.ChoiceField(choices=VARIANT_CHOICES, default='group')
    suite = serializers.ChoiceField(choices=SUITE_CHOICES, default='all')
    model = serializers.ChoiceField(choices=MODEL_CHOICES, default='clock')
    tol = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    seed = serializers.IntegerField(required=False, allow_null=True)
    output = serializers.ChoiceField(choices=OUTPUT_CHOICES, default='json')

    def validate_group(self, value):
        try:
            return parse_group(value)
        except DomainError as e:
            raise serializers.ValidationError(str(e))

    def validate(self, attrs):
        g = attrs['group']
        matrix = attrs.get('chi')
        try:
            chi = default_bicharacter(g) if matrix is None else Bicharacter(g, matrix)
        except BicharacterError as e:
            raise serializers.ValidationError({'chi': str(e)})
        if not is_nondegenerate(chi):
            raise serializers.ValidationError({'chi': f'{chi} is degenerate'})
        attrs['bicharacter'] = chi
        return attrs

    def task_payload(self):
        """JSON-safe job for the identity-suite task."""
        data = self.validated_data
        return {
            'group': str(data['group']),
            'chi': [list(row) for row in data['bicharacter'].matrix],
            'length': data['length'],
            'model': data['model'],
            'tol': data.get('tol'),
            'seed': data.get('seed'),
        }


class FusionRingSerializer(serializers.Serializer):
    schema = serializers.SerializerMethodField()
    name = serializers.CharField()
    labels = serializers.ListField(child=serializers.CharField())
    unit = serializers.IntegerField()
    dual = serializers.ListField(child=serializers.IntegerField())
    N = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))
    dims = serializers.ListField(child=serializers.FloatField())
    grades = serializers.ListField(child=serializers.IntegerField(), required=False)
    window = serializers.IntegerField(required=False)
    out_of_window = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()), required=False)

    def get_schema(self, obj):
        return SCHEMA_VERSION


class ChannelGradeSerializer(serializers.Serializer):
    grade = serializers.IntegerField()
    count = serializers.IntegerField()
    names = serializers.ListField(child=serializers.CharField())
    qdims = serializers.ListField(child=serializers.FloatField())
    convolution_coefficients = serializers.ListField(child=serializers.FloatField())


class CompositionSerializer(serializers.Serializer):
    left = serializers.CharField()
    right = serializers.CharField()
    grade = serializers.IntegerField()
    terms = serializers.DictField(child=serializers.FloatField())


class ChannelReportSerializer(serializers.Serializer):
    schema = serializers.SerializerMethodField()
    group = serializers.CharField()
    chi = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))
    window = serializers.IntegerField()
    grades = ChannelGradeSerializer(many=True)
    counts = serializers.SerializerMethodField()
    composition_table = CompositionSerializer(many=True)

    def get_schema(self, obj):
        return SCHEMA_VERSION

    def get_counts(self, obj):
        return [g['count'] for g in obj['grades']]


class VerificationReportSerializer(serializers.Serializer):
    identity = serializers.CharField()
    suite = serializers.CharField(required=False)
    L = serializers.IntegerField()
    group = serializers.CharField()
    max_error = serializers.FloatField()
    fitted_scale = serializers.JSONField(allow_null=True)
    passed = serializers.BooleanField()
    detail = serializers.DictField(required=False)

    def get_fields(self):
        fields = super().get_fields()
        # 'pass' is a keyword, so the field is declared as `passed` and renamed on output
        fields['pass'] = fields.pop('passed')
        return fields


class VerificationRunSerializer(serializers.Serializer):
    schema = serializers.SerializerMethodField()
    group = serializers.CharField()
    L = serializers.IntegerField()
    suites = serializers.ListField(child=serializers.CharField())
    all_pass = serializers.BooleanField()
    reports = VerificationReportSerializer(many=True)

    def get_schema(self, obj):
        return SCHEMA_VERSION


class SimpleDimensionSerializer(serializers.Serializer):
    label = serializers.CharField()
    dim = serializers.FloatField()
    dim_squared = serializers.FloatField()
    distance = serializers.FloatField()


class WeakIntegralReportSerializer(serializers.Serializer):
    schema = serializers.SerializerMethodField()
    ring = serializers.CharField()
    tol = serializers.FloatField()
    simples = SimpleDimensionSerializer(many=True)
    weakly_integral = serializers.BooleanField()

    def get_schema(self, obj):
        return SCHEMA_VERSION
