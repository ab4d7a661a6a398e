import sys

from mcid_hub.cli.interface import run_cli


def main():
    """Главная точка входа"""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
