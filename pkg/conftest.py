"""Test collection wiring: configure Django before pytest imports the apps' tests.py modules."""

import os

import django

os.environ.setdefault(
    "DJANGO_SETTINGS_MODULE",
    os.environ.get("ORLICZLAB_SETTINGS_MODULE", "orliczlab.settings"),
)
django.setup()
