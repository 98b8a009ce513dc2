from django.apps import AppConfig


class ModularsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "modulars"
