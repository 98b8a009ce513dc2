from django.apps import AppConfig


class CliConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "cli"

    def ready(self):
        from django.conf import settings
        import os

        output_dir = getattr(settings, "OUTPUT_PATH", None)
        if output_dir:
            try:
                os.makedirs(output_dir, exist_ok=True)
            except OSError:
                # Read-only data paths still allow --out elsewhere
                pass
