from django.apps import AppConfig


class EvaluationAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'evaluation_app'
    verbose_name = 'AUC reports and significance tests'
