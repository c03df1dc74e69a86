from django.apps import AppConfig

class CollageConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'collage'
