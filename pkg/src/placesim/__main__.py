"""Allow ``python -m placesim`` as an alias for the ``placesim`` command."""

from .cli import main

if __name__ == "__main__":
    main()
