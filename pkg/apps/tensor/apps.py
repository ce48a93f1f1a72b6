from django.apps import AppConfig


class TensorConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.tensor'
    verbose_name = 'Soft Logic Tensor Core'
