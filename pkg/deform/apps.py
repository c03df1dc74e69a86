from django.apps import AppConfig

class DeformConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'deform'
