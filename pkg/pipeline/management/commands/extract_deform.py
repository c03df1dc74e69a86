from .extract import Command as ExtractCommand


class Command(ExtractCommand):
    help = 'Extract the banded deformation-magnitude statistics only'
    families = ('deform',)
