from django.apps import AppConfig


class OrliczConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "orlicz"
