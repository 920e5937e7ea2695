"""Allow ``python3 -m spin7flow`` to run the command-line front end."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
