import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'rdepth.settings')
django.setup()
