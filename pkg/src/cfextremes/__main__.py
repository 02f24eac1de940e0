"""Module entry point for `python -m cfextremes`."""


if __name__ == "__main__":
    from cfextremes.cli import main

    raise SystemExit(main())
