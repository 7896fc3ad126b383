"""kerrq CLI"""

from kerrq.cli import run


def main() -> None:
    """Entry point for kerrq CLI"""
    run()


if __name__ == "__main__":
    main()
