from django.apps import AppConfig


class ExecutorConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.executor'
    verbose_name = 'Program Executor'
