from django.apps import AppConfig


class DetectorAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'detector_app'
    verbose_name = 'Nearest-neighbor anomaly detectors'
