from django.apps import AppConfig


class SynthAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'synth_app'
    verbose_name = 'Synthetic benchmark datasets'
