from django.apps import AppConfig

class DualitiesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dualities'
