"""Allow running as python -m holonomic_gate."""

from .main import main

if __name__ == "__main__":
    raise SystemExit(main())
