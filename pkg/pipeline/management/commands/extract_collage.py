from .extract import Command as ExtractCommand


class Command(ExtractCommand):
    help = 'Extract tumor and peri-lesional COLLAGE features only'
    families = ('collage',)
