"""Console entry point: ``orliczlab <command> [options]``."""

import os
import sys


def main(argv=None):
    """Run an OrliczLab management command and return its exit status."""
    os.environ.setdefault(
        "DJANGO_SETTINGS_MODULE",
        os.environ.get("ORLICZLAB_SETTINGS_MODULE", "orliczlab.settings"),
    )
    from django.core.management import execute_from_command_line

    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        execute_from_command_line(["orliczlab", *argv])
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
