import sys
from argparse import ArgumentParser
from typing import NoReturn

if sys.version_info >= (3, 12):
    from typing import override
else:
    from typing_extensions import override

from kerrq.display.handles import cerr

USAGE_EXIT_CODE = 2


class ArgParser(ArgumentParser):
    """``ArgumentParser`` printing through the themed stderr console.

    Usage errors exit with status 2, the same status as configuration errors.
    """

    def rich_print_err(self, message: str) -> None:
        cerr.print(message)

    @override
    def exit(self, status: int = 0, message: str | None = None) -> NoReturn:
        if message:
            self.rich_print_err(message)
        sys.exit(status)

    @override
    def error(self, message: str) -> NoReturn:
        self.rich_print_err(f"[status.error]{self.prog}: error:[/status.error] {message}")
        self.print_usage(sys.stderr)
        sys.exit(USAGE_EXIT_CODE)
