from django.apps import AppConfig


class CombinerAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'combiner_app'
    verbose_name = 'Ensemble combination functions'
