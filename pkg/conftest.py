import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dualitykit.settings')
django.setup()
