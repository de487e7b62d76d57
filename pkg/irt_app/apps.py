from django.apps import AppConfig


class IrtAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'irt_app'
    verbose_name = 'Continuous IRT ensemble'
