"""
Validation of run configurations.

A run configuration arrives as strings from a ``key=value`` file and as
typed command-line flags; the serializer coerces both, applies the
project defaults from ``settings.IRTENSEMBLE`` and cross-checks the
neighborhood settings.
"""
import re

from django.conf import settings
from rest_framework import serializers

from detector_app.detectors import REGIME_T1, REGIME_T2, DetectorConfig
from detector_app.neighbors import BRUTE, KD_TREE
from scoring_app.exceptions import InputError

# k_max used when only k is given
_DEFAULT_K_SPAN = 5


def _setting(name):
    return lambda: settings.IRTENSEMBLE[name]


class KappaRangeField(serializers.Field):
    """
    Inclusive kappa range written as ``low-high``, ``low,high``, ``low:high``
    or a two-element sequence.
    """
    default_error_messages = {
        'invalid': 'Expected a range such as "1-10".',
        'order': 'The range must satisfy 1 <= low <= high.',
    }

    def to_internal_value(self, data):
        if isinstance(data, str):
            parts = re.split(r'\s*[-,:]\s*', data.strip())
        elif isinstance(data, (list, tuple)):
            parts = list(data)
        else:
            self.fail('invalid')
        if len(parts) != 2:
            self.fail('invalid')
        try:
            low, high = int(parts[0]), int(parts[1])
        except (TypeError, ValueError):
            self.fail('invalid')
        if not 1 <= low <= high:
            self.fail('order')
        return (low, high)

    def to_representation(self, value):
        return f"{value[0]}-{value[1]}"


class RunConfigSerializer(serializers.Serializer):
    """
    Serializer for a run configuration.

    Either a regime or explicit neighborhood sizes may be given, not both;
    with neither, the T1 regime applies.
    """
    regime = serializers.ChoiceField(
        choices=[REGIME_T1, REGIME_T2], required=False, allow_null=True
    )
    k = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    k_min = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    k_max = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    h = serializers.FloatField(default=1.0)
    c = serializers.FloatField(default=0.1)
    algorithm = serializers.ChoiceField(choices=[BRUTE, KD_TREE], default=BRUTE)

    epsilon = serializers.FloatField(default=_setting('EPSILON'))
    kappa = serializers.IntegerField(min_value=1, default=5)
    kappa_range = KappaRangeField(default=(1, 10))
    max_iter = serializers.IntegerField(min_value=1, default=_setting('MAX_ITER'))
    tol = serializers.FloatField(default=_setting('TOL'))
    strict = serializers.BooleanField(default=False)
    damping = serializers.FloatField(default=_setting('AP_DAMPING'))
    ap_max_iter = serializers.IntegerField(min_value=1, default=_setting('AP_MAX_ITER'))
    ap_convergence_iter = serializers.IntegerField(
        min_value=1, default=_setting('AP_CONVERGENCE_ITER')
    )

    seed = serializers.IntegerField(min_value=0, default=0)
    out_dir = serializers.CharField(default=_setting('OUT_DIR'))
    jobs = serializers.IntegerField(min_value=-1, default=1)

    def validate_epsilon(self, value):
        if not 0.0 < value < 0.5:
            raise serializers.ValidationError("epsilon must lie in (0, 0.5).")
        return value

    def validate_tol(self, value):
        if value <= 0.0:
            raise serializers.ValidationError("tol must be positive.")
        return value

    def validate_damping(self, value):
        if not 0.5 <= value < 1.0:
            raise serializers.ValidationError("damping must lie in [0.5, 1).")
        return value

    def validate_jobs(self, value):
        if value == 0:
            raise serializers.ValidationError("jobs must be a positive count or -1 for all cores.")
        return value

    def validate(self, attrs):
        explicit = [name for name in ('k', 'k_min', 'k_max') if attrs.get(name) is not None]
        if attrs.get('regime') and explicit:
            raise serializers.ValidationError(
                "Give either a regime or explicit neighborhood sizes, "
                f"not both ({', '.join(explicit)})."
            )
        if explicit:
            if attrs.get('k') is None:
                raise serializers.ValidationError(
                    {'k': "k is required with explicit neighborhood sizes."}
                )
            attrs['k_min'] = attrs.get('k_min') or attrs['k']
            attrs['k_max'] = attrs.get('k_max') or max(attrs['k_min'], attrs['k'] + _DEFAULT_K_SPAN)
            try:
                DetectorConfig(
                    k=attrs['k'],
                    k_min=attrs['k_min'],
                    k_max=attrs['k_max'],
                    h=attrs['h'],
                    c=attrs['c'],
                )
            except InputError as exc:
                raise serializers.ValidationError(str(exc)) from exc
        elif not attrs.get('regime'):
            attrs['regime'] = REGIME_T1
        if attrs['h'] <= 0 or attrs['c'] <= 0:
            raise serializers.ValidationError("LDF constants h and c must be positive.")
        return attrs
