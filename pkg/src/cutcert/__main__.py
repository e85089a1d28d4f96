from .bench_cli import cli_entry

cli_entry()
