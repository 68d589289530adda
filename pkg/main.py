import sys

from ptsusy.cli import main


if __name__ == "__main__":
    sys.exit(main())
