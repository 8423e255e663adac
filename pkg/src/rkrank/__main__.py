if __name__ == "__main__":
    from .harness.cli import main

    raise SystemExit(main())
