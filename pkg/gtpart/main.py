from __future__ import annotations

from .cli import app


def run():
    app(prog_name="gtpart")


if __name__ == "__main__":
    run()
