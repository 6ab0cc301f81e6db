"""Django-Setup für pytest (die Tests sind django.test.SimpleTestCase-Klassen)."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'backend.settings')
django.setup()
