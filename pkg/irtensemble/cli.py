"""Console-script entry point: ``irtensemble detect data.csv ...``."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'irtensemble.settings')
    from django.core.management import execute_from_command_line

    execute_from_command_line(sys.argv)
